#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hjhom {

class KeyValueConfig;

class DiffusionModel {
 public:
  virtual ~DiffusionModel() = default;
  virtual double sqrt_a(double x) const = 0;
};

class HamiltonianModel {
 public:
  virtual ~HamiltonianModel() = default;
  virtual double value(double x, double p) const = 0;
  // Central difference unless overridden.
  virtual double dp(double x, double p) const;
};

std::shared_ptr<const DiffusionModel> make_diffusion_model(std::function<double(double)> sqrt_a);
std::shared_ptr<const HamiltonianModel> make_hamiltonian_model(
    std::function<double(double, double)> value, std::function<double(double, double)> dp = {});

enum class DiffusionRepresentation { closed_form, grid };

// a = sqrt_a^2; sqrt_a is kappa-Lipschitz. `offset` implements the shift group.
struct DiffusionField {
  std::shared_ptr<const DiffusionModel> model;
  double kappa = 0.0;
  double period_or_window = 1.0;
  DiffusionRepresentation representation = DiffusionRepresentation::closed_form;
  double offset = 0.0;

  double sqrt_a(double x) const { return model->sqrt_a(x + offset); }
  double a(double x) const {
    double s = model->sqrt_a(x + offset);
    return s * s;
  }
};

enum class HamiltonianForm { power, separable, pinned, double_well, flat_bottom, strictified, custom };

std::string to_string(HamiltonianForm f);

struct HamiltonianField {
  std::shared_ptr<const HamiltonianModel> model;
  double alpha0 = 1.0;
  double alpha1 = 1.0;
  double gamma = 2.0;
  double eta = 0.0;
  HamiltonianForm form = HamiltonianForm::custom;
  double offset = 0.0;

  double operator()(double x, double p) const { return model->value(x + offset, p); }
  double dp(double x, double p) const { return model->dp(x + offset, p); }
};

enum class EnvironmentKind { periodic, random_stationary };

class Environment {
 public:
  Environment(DiffusionField diffusion, HamiltonianField hamiltonian, std::uint64_t seed,
              EnvironmentKind kind);

  double a(double x) const { return diffusion_.a(x); }
  double sqrt_a(double x) const { return diffusion_.sqrt_a(x); }
  double H(double x, double p) const { return hamiltonian_(x, p); }
  double H_p(double x, double p) const { return hamiltonian_.dp(x, p); }

  const DiffusionField& diffusion() const { return diffusion_; }
  const HamiltonianField& hamiltonian() const { return hamiltonian_; }
  std::uint64_t seed() const { return seed_; }
  EnvironmentKind kind() const { return kind_; }
  // Period for periodic environments, macro window length otherwise.
  double period() const { return diffusion_.period_or_window; }
  double kappa() const { return diffusion_.kappa; }
  double gamma() const { return hamiltonian_.gamma; }

  Environment with_hamiltonian(HamiltonianField h) const;

 private:
  DiffusionField diffusion_;
  HamiltonianField hamiltonian_;
  std::uint64_t seed_;
  EnvironmentKind kind_;
};

// x -> (a(x+y), H(x+y, .)); composes additively.
Environment shift(const Environment& env, double y);

// Restriction to [lo, hi) repeated with period hi - lo.
Environment periodize(const Environment& env, double lo, double hi);

// ---------------------------------------------------------------- specs

struct FieldSpec {
  std::string family = "zero";  // zero | constant | cosine | bumps | shot-noise
  double amplitude = 0.0;
  double level = 0.0;
  double period = 1.0;
  double phase = 0.0;
  double width = 0.25;
  double center = 0.5;
  double intensity = 1.0;
};

struct DiffusionSpec {
  std::string family = "sin2";  // sin2 | tent | poisson | grid | constant
  double period = 1.0;
  double floor = 0.0;
  double slope = 1.0;
  double center = 0.0;
  double intensity = 1.0;
  double level = 1.0;
  std::vector<double> samples;
  double grid_x0 = 0.0;
  double grid_dx = 0.1;
  std::optional<double> kappa;
};

struct HamiltonianSpec {
  std::string family = "power";  // power | pinned | double-well | flat-bottom
  double coefficient = 1.0;
  double gamma = 3.0;
  double linear = 0.0;
  double flat_width = 1.0;
  FieldSpec potential;
  FieldSpec drift;
  std::optional<double> alpha0, alpha1, eta;
};

struct EnvironmentSpec {
  DiffusionSpec diffusion;
  HamiltonianSpec hamiltonian;
  std::uint64_t seed = 0;
  double macro_length = 10.0;
  double validation_tol = 1e-9;
};

EnvironmentSpec parse_environment_spec(const KeyValueConfig& cfg);

// Builds the environment and validates A1, A2, H1..H3; throws HypothesisError on failure.
Environment sample_environment(const EnvironmentSpec& spec, std::uint64_t seed);

// Stateless hash of (seed, stream, index) to a uniform double in [0,1).
double hashed_uniform(std::uint64_t seed, std::uint64_t stream, std::int64_t index, std::uint64_t draw);

// ---------------------------------------------------------------- validation

struct ValidationGrid {
  double x_lo = 0.0;
  double x_hi = 1.0;
  std::size_t nx = 2001;
  double p_max = 4.0;  // raised to 2*R_hat when smaller
  std::size_t np = 201;
};

struct HypothesisCheck {
  std::string name;
  bool passed = true;
  bool applicable = true;
  double worst = 0.0;  // worst normalised violation
  double witness_x = 0.0;
  double witness_p = 0.0;
  std::string detail;
};

struct ValidationReport {
  ValidationGrid grid;
  double tol = 0.0;
  std::vector<HypothesisCheck> checks;

  bool all_passed() const;
  const HypothesisCheck& get(const std::string& name) const;
  std::string to_text() const;
};

ValidationReport validate_environment(const Environment& env, const ValidationGrid& grid,
                                      double tol = 1e-9);

struct HamiltonianConstants {
  double alpha0, alpha1;
};

// Constants satisfying H1..H3 on the sampled box, inflated by `margin`.
HamiltonianConstants estimate_constants(const HamiltonianModel& model, double gamma, double x_lo,
                                        double x_hi, std::size_t nx, double p_max, std::size_t np,
                                        double margin = 1.1);

// ---------------------------------------------------------------- components

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

enum class EndpointKind { zero, window_cut };

struct Component {
  double lo = 0.0;
  double hi = 0.0;
  EndpointKind lo_kind = EndpointKind::zero;
  EndpointKind hi_kind = EndpointKind::zero;
  bool full() const { return lo_kind == EndpointKind::zero && hi_kind == EndpointKind::zero; }
  double length() const { return hi - lo; }
};

struct ComponentDecomposition {
  Interval window;
  double a_tol = 1e-10;
  std::vector<Component> components;  // maximal intervals of {a > a_tol}
  std::vector<Interval> zero_set;     // maximal intervals of {a <= a_tol}

  bool has_zero() const { return !zero_set.empty(); }
  // From the first to the last zero in the window; only full components lie inside.
  Interval trimmed() const;
};

ComponentDecomposition decompose_components(const Environment& env, Interval window,
                                             double a_tol = 1e-10, double resolution = 1e-2);

}  // namespace hjhom
