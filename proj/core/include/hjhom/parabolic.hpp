#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "hjhom/effective.hpp"
#include "hjhom/environment.hpp"

namespace hjhom {

enum class NumericalHamiltonian { lax_friedrichs, engquist_osher };
enum class BoundaryMode { periodic, linear_far_field };

std::string to_string(NumericalHamiltonian f);
std::string to_string(BoundaryMode b);

struct SchemeConfig {
  double dx = 0.02;
  double dt = 0.0;  // 0: cfl_safety times the largest stable step
  double cfl_safety = 0.9;
  NumericalHamiltonian flux = NumericalHamiltonian::lax_friedrichs;
  BoundaryMode boundary = BoundaryMode::periodic;
  // Periodic: [x_lo, x_hi) must be a whole number of periods. Far field: closed interval.
  double x_lo = 0.0, x_hi = 1.0;
  double horizon = 200.0;
  double x_ref = 0.0;
  double tail_fraction = 0.25;
  std::size_t max_records = 100000;
  double gradient_bound = 0.0;  // 0: derived from the sublevel radius at sup_x H(x, theta)
  int threads = 1;              // jobs over theta lists
};

struct ParabolicRun {
  double theta = 0.0;
  SchemeConfig config;  // dt and gradient_bound resolved
  std::size_t steps = 0;
  std::vector<double> t, u_ref;  // downsampled trace of u(t, x_ref), t > 0
  std::vector<double> x, u;      // final profile
  double h_L = 0.0, h_U = 0.0;   // min / max of u(t, x_ref)/t over the tail, every step
  double h_final = 0.0;          // u(T, x_ref)/T
  double tail_slope = 0.0;       // (u(T) - u(T0)) / (T - T0) over the tail
  double max_gradient = 0.0;     // max |u_x| over all steps
  bool gradient_exceeded = false;

  void write_csv(std::ostream& os) const;
};

// Explicit monotone scheme for u_t = a u_xx + H(x, u_x), unknown v = u - theta x.
class ParabolicSolver {
 public:
  ParabolicSolver(Environment env, double theta, SchemeConfig cfg);

  // Full u on the grid; periodic mode requires u - theta x to be periodic.
  void set_u(const std::vector<double>& u);
  void step();
  double time() const { return t_; }
  std::size_t steps() const { return steps_; }
  double dt() const { return dt_; }
  double alpha_max() const { return alpha_max_; }
  const std::vector<double>& x() const { return x_; }
  std::vector<double> u() const;
  double u_at(double x) const;
  double max_gradient() const;
  const SchemeConfig& config() const { return cfg_; }

 private:
  double flux(std::size_t i, double vm, double v0, double vp) const;

  Environment env_;
  double theta_;
  SchemeConfig cfg_;
  std::vector<double> x_, a_, alpha_, p_hat_, h_hat_, v_, next_;
  double dt_ = 0.0, t_ = 0.0, alpha_max_ = 0.0;
  std::size_t steps_ = 0;
};

ParabolicRun solve_parabolic(const Environment& env, double theta, const SchemeConfig& cfg);

struct EffectiveEstimate {
  double h_L = 0.0, h_U = 0.0, h = 0.0, tail_slope = 0.0;
  double gap = 0.0;
  bool conclusive = true;  // gap <= gap_tol
};

// From the recorded trace; h is u(T, x_ref)/T.
EffectiveEstimate estimate_effective(const ParabolicRun& run, double tail_fraction, double gap_tol = 0.02);

struct ComparisonRow {
  double theta = 0.0;
  double hbar = 0.0;
  EffectiveEstimate estimate;
  double error = 0.0;  // |h - hbar| / max(1, |hbar|)
  bool passed = false;
  bool gradient_exceeded = false;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::vector<ParabolicRun> runs;  // same order as rows
  double tol = 0.0, gap_tol = 0.0;
  bool all_passed() const;
  std::string to_text() const;
};

ComparisonReport homogenization_test(const Environment& env, const EffectiveCurve& curve,
                                     const std::vector<double>& thetas, const SchemeConfig& cfg,
                                     double tol = 0.05, double gap_tol = 0.02);

}  // namespace hjhom
