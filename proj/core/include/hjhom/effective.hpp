#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hjhom/cell.hpp"

namespace hjhom {

// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Butland slopes).
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);
  double operator()(double t) const;
  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }
  bool empty() const { return x_.empty(); }

 private:
  std::vector<double> x_, y_, d_;
};

struct ThetaPair {
  double lambda = 0.0;
  double theta_minus = 0.0;
  double theta_plus = 0.0;
};

ThetaPair theta_pair(const CellProblem& cell, double lambda);

struct EnsembleTheta {
  double lambda = 0.0;
  double mean_minus = 0.0, mean_plus = 0.0;
  double spread_minus = 0.0, spread_plus = 0.0;  // sample standard deviation over seeds
  std::vector<std::uint64_t> seeds;
  std::vector<ThetaPair> per_seed;
};

EnsembleTheta theta_pair_ensemble(const EnvironmentSpec& spec, const std::vector<std::uint64_t>& seeds,
                                  Interval window, double lambda, const CellOptions& opts = {});

struct CurveOptions {
  double tol_lambda = 1e-7;
  double first_offset = 1e-5;
  int levels_per_octave = 8;
  double theta_max = 2.0;
  double lambda_max = 0.0;  // 0: alpha1 (theta_max^gamma + 1)
  std::optional<double> lambda0;
  int threads = 1;
};

struct EffectiveCurve {
  double lambda0 = 0.0;
  Interval window;
  std::uint64_t seed = 0;
  std::vector<double> lambdas, theta_minus, theta_plus;
  double theta_minus_0 = 0.0, theta_plus_0 = 0.0;
  MonotoneCubic right, left;

  double theta_lo() const { return theta_minus.back(); }
  double theta_hi() const { return theta_plus.back(); }
  void write_lambda_csv(std::ostream& os) const;
  void write_hbar_csv(std::ostream& os, double theta_lo, double theta_hi, std::size_t n) const;
};

// Flat endpoints by Aitken extrapolation of the three smallest levels, clamped by the table,
// then the two monotone wings.
EffectiveCurve assemble_curve(double lambda0, std::vector<double> lambdas, std::vector<double> theta_minus,
                              std::vector<double> theta_plus);

EffectiveCurve build_effective_curve(const CellProblem& cell, const CurveOptions& opts = {});

double evaluate_Hbar(const EffectiveCurve& curve, double theta);

struct AuditCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;
  double at = 0.0;
};

struct AuditReport {
  std::vector<AuditCheck> checks;
  double lipschitz_estimate = 0.0;
  bool all_passed() const;
  const AuditCheck& get(const std::string& name) const;
  std::string to_text() const;
};

AuditReport audit_curve(const EffectiveCurve& curve, double alpha0, double alpha1, double gamma,
                        std::size_t n = 401, double tol = 1e-7);

// Runs f(i) for i in [0, n) on up to `threads` workers; results must go to preallocated slots.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f);

}  // namespace hjhom

#include <algorithm>
#include <exception>
#include <thread>

namespace hjhom {

template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  std::size_t t = threads > 1 ? std::min<std::size_t>(static_cast<std::size_t>(threads), n) : 1;
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  for (std::size_t w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += t) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace hjhom
