#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hjhom/environment.hpp"
#include "hjhom/hamlib.hpp"
#include "hjhom/stiff_ode.hpp"

namespace hjhom {

enum class Branch { plus, minus };
enum class Provenance { integrated, algebraic, zero_set };

std::string to_string(Branch b);
std::string to_string(Provenance p);

struct CellOptions {
  double a_tol = 1e-10;
  double resolution = 1e-2;   // coarse scan cell for the component decomposition
  double c_gamma = 10.0;      // calibration constant of the a-priori bounds
  double endpoint_tol = 1e-9; // slack in lambda >= lambda_hat(endpoint)
  double switch_a = 1e-7;     // algebraic switch allowed where a <= switch_a ...
  double junction_tol = 1e-6; // ... and assembled profiles must match p_lambda at zeros this well
  double root_tol = 1e-13;
  StiffControl ode;
};

struct BranchSample {
  double x;
  double f;
  double u;  // integral of f from the component's left endpoint
  Provenance provenance;
};

struct BranchResult {
  Branch branch = Branch::plus;
  Component component;
  double lambda = 0.0;
  bool tracked = false;
  double escape_x = 0.0;  // where |f| passed M_bound (when !tracked)
  double end_value = 0.0; // f at the far endpoint
  double integral = 0.0;  // integral of f over the component
  std::vector<BranchSample> samples;  // ordered by increasing x
  std::size_t steps = 0, rejected = 0;
};

enum class ComponentVerdict { tracked, blew_down, obstructed, inconclusive };

struct ComponentReport {
  Component component;
  ComponentVerdict verdict = ComponentVerdict::tracked;
  double x = 0.0;
  std::string message;
};

struct FeasibilityReport {
  double lambda = 0.0;
  double zero_set_sup = 0.0;  // sup over zero-set samples of lambda_hat
  bool zero_set_ok = false;
  bool feasible = false;
  bool inconclusive = false;
  std::vector<ComponentReport> components;
  std::string to_text() const;
};

struct CriticalValue {
  double lambda0 = 0.0;
  double lo = 0.0, hi = 0.0;
  double zero_set_sup = 0.0;
  double min_lambda_hat = 0.0;
  int iterations = 0;
  std::vector<std::pair<double, bool>> spot_checks;
  std::string to_text() const;
};

struct CorrectorProfile {
  double lambda = 0.0;
  Branch branch = Branch::plus;
  Interval window;
  double dx = 0.0;
  std::vector<double> x, f, u;
  std::vector<Provenance> provenance;

  double theta() const { return (u.back() - u.front()) / (x.back() - x.front()); }
  void write_csv(std::ostream& os) const;
};

// Cell problem on one window of one environment. Caches the decomposition and zero-set data.
class CellProblem {
 public:
  CellProblem(Environment env, Interval window, CellOptions opts = {});

  const Environment& env() const { return env_; }
  const CellOptions& options() const { return opts_; }
  const ComponentDecomposition& decomposition() const { return dec_; }
  // Zero-to-zero trimmed window; only full components lie inside it.
  Interval trimmed() const { return trimmed_; }
  std::vector<Component> full_components() const;
  double zero_set_sup() const { return zero_sup_; }
  double min_lambda_hat() const { return min_hat_; }

  MinPoint min_point(double x) const { return min_profile(env_.hamiltonian(), x); }
  // p^-_lambda(x) / p^+_lambda(x)
  double p_lambda(double x, double lambda, Branch b) const;
  double escape_bound(double lambda) const;

  CellProblem with_options(CellOptions opts) const { return CellProblem(env_, dec_.window, opts); }

 private:
  Environment env_;
  CellOptions opts_;
  ComponentDecomposition dec_;
  Interval trimmed_;
  double zero_sup_ = 0.0, min_hat_ = 0.0;
};

// `grid` (increasing, inside the component) lists points where f must be recorded;
// when empty, every accepted step is recorded.
BranchResult integrate_branch(const CellProblem& cell, const Component& J, double lambda, Branch b,
                              std::span<const double> grid = {});

FeasibilityReport feasibility(const CellProblem& cell, double lambda);

CriticalValue critical_value(const CellProblem& cell, double tol_lambda = 1e-7);

// Uniform grid over the trimmed window with spacing <= dx.
CorrectorProfile build_corrector(const CellProblem& cell, double lambda, Branch b, double dx);

// Window average of f over the trimmed window without building a grid profile.
double branch_average(const CellProblem& cell, double lambda, Branch b);

// max |a u'' + H(x, u') - lambda| with u'', u' from central differences of the recorded u.
double residual(const Environment& env, const CorrectorProfile& prof, double lambda_override = NAN);

struct MergeSample {
  double x;
  double gap;
  double bound;
  double inv_a_integral;
};

struct MergeReport {
  std::vector<MergeSample> samples;
  double eta = 0.0;
  bool bound_respected = true;
  bool divergence_confirmed = true;  // int 1/a dominates the bound implied by sqrt(a) <= kappa dist
  double merge_x = NAN;              // first x with gap <= merge_threshold
  double final_gap = 0.0;
};

MergeReport gronwall_merge_check(const CellProblem& cell, const Component& J, double lambda, double y,
                                 double f_a, double f_b, double merge_threshold = 1e-8,
                                 std::optional<double> eta = std::nullopt);

struct BridgeReport {
  std::vector<double> x, w_prime, w;
  double x0 = 0.0;
  double worst = 0.0;  // max over grid of a w'' + H(x, w') - lambda
  double worst_x = 0.0;
  double tol = 0.0;
  bool passed = false;
};

BridgeReport bridge_supersolution(const Environment& env, const CorrectorProfile& minus,
                                  const CorrectorProfile& plus, double x0, double tol);

}  // namespace hjhom
