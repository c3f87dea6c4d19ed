#include "hjhom/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hjhom/errors.hpp"
#include "hjhom/kvconfig.hpp"

namespace hjhom {

double HamiltonianModel::dp(double x, double p) const {
  double h = 1e-6 * std::max(1.0, std::abs(p));
  return (value(x, p + h) - value(x, p - h)) / (2.0 * h);
}

namespace {

class FunctionDiffusion final : public DiffusionModel {
 public:
  explicit FunctionDiffusion(std::function<double(double)> f) : f_(std::move(f)) {}
  double sqrt_a(double x) const override { return f_(x); }

 private:
  std::function<double(double)> f_;
};

class FunctionHamiltonian final : public HamiltonianModel {
 public:
  FunctionHamiltonian(std::function<double(double, double)> v, std::function<double(double, double)> d)
      : v_(std::move(v)), d_(std::move(d)) {}
  double value(double x, double p) const override { return v_(x, p); }
  double dp(double x, double p) const override {
    return d_ ? d_(x, p) : HamiltonianModel::dp(x, p);
  }

 private:
  std::function<double(double, double)> v_, d_;
};

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double wrap(double x, double lo, double period) {
  double r = std::fmod(x - lo, period);
  if (r < 0) r += period;
  return lo + r;
}

// Poisson points of unit mean per block of length 1/intensity, generated on demand.
class PoissonPoints {
 public:
  PoissonPoints(std::uint64_t seed, std::uint64_t stream, double intensity)
      : seed_(seed), stream_(stream), block_(1.0 / intensity) {}

  template <class F>
  void for_each_in_block(std::int64_t k, F&& f) const {
    // Knuth's product method with mean 1.
    double limit = std::exp(-1.0);
    double prod = hashed_uniform(seed_, stream_, k, 0);
    std::uint64_t draw = 1;
    while (prod > limit) {
      double u = hashed_uniform(seed_, stream_, k, draw++);
      f((static_cast<double>(k) + u) * block_);
      prod *= hashed_uniform(seed_, stream_, k, draw++);
    }
  }

  double nearest_distance(double x, double cap) const {
    auto k0 = static_cast<std::int64_t>(std::floor(x / block_));
    double best = cap;
    for (std::int64_t j = 0;; ++j) {
      auto visit = [&](double q) { best = std::min(best, std::abs(x - q)); };
      for_each_in_block(k0 - j, visit);
      if (j > 0) for_each_in_block(k0 + j, visit);
      if (best <= static_cast<double>(j) * block_) break;
    }
    return best;
  }

  double block() const { return block_; }

 private:
  std::uint64_t seed_, stream_;
  double block_;
};

double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  double t = 1.0 - s * s;
  return t * t;
}

// Scalar x-fields used for the potential V and the drift c of separable forms.
class ScalarField {
 public:
  ScalarField(const FieldSpec& spec, std::uint64_t seed, std::uint64_t stream)
      : spec_(spec), points_(seed, stream, spec.intensity > 0 ? spec.intensity : 1.0) {
    const std::string& f = spec.family;
    if (f == "zero") kind_ = Kind::zero;
    else if (f == "constant") kind_ = Kind::constant;
    else if (f == "cosine") kind_ = Kind::cosine;
    else if (f == "bumps") kind_ = Kind::bumps;
    else if (f == "shot-noise") kind_ = Kind::shot_noise;
    else throw ConfigError("field.family", "unknown field family '" + f + "'");
    if (kind_ != Kind::zero && kind_ != Kind::constant && !(spec.period > 0))
      throw ConfigError("field.period", "must be positive");
    if ((kind_ == Kind::bumps || kind_ == Kind::shot_noise) && !(spec.width > 0))
      throw ConfigError("field.width", "must be positive");
    if (kind_ == Kind::shot_noise && !(spec.intensity > 0))
      throw ConfigError("field.intensity", "must be positive");
  }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::zero:
        return 0.0;
      case Kind::constant:
        return spec_.level;
      case Kind::cosine:
        return spec_.level +
               spec_.amplitude * std::cos(2.0 * std::numbers::pi * (x - spec_.phase) / spec_.period);
      case Kind::bumps: {
        double y = wrap(x - spec_.center, -0.5 * spec_.period, spec_.period);
        return spec_.level + spec_.amplitude * bump(y / spec_.width);
      }
      case Kind::shot_noise: {
        double w = spec_.width, b = points_.block();
        auto k_lo = static_cast<std::int64_t>(std::floor((x - w) / b));
        auto k_hi = static_cast<std::int64_t>(std::floor((x + w) / b));
        double sum = 0.0;
        for (auto k = k_lo; k <= k_hi; ++k)
          points_.for_each_in_block(k, [&](double q) { sum += bump((x - q) / w); });
        return spec_.level + spec_.amplitude * std::min(1.0, sum);
      }
    }
    return 0.0;
  }

  bool zero() const { return kind_ == Kind::zero || (kind_ == Kind::constant && spec_.level == 0.0); }
  bool random() const { return kind_ == Kind::shot_noise; }
  bool periodic() const { return kind_ == Kind::cosine || kind_ == Kind::bumps; }
  double period() const { return spec_.period; }

 private:
  enum class Kind { zero, constant, cosine, bumps, shot_noise };
  FieldSpec spec_;
  Kind kind_ = Kind::zero;
  PoissonPoints points_;
};

double sgn(double q) { return q > 0 ? 1.0 : (q < 0 ? -1.0 : 0.0); }

// b|p-c|^g + l|p-c| + V
class PowerModel final : public HamiltonianModel {
 public:
  PowerModel(double b, double g, double l, ScalarField V, ScalarField c)
      : b_(b), g_(g), l_(l), V_(std::move(V)), c_(std::move(c)) {}
  double value(double x, double p) const override {
    double q = std::abs(p - c_(x));
    return b_ * std::pow(q, g_) + l_ * q + V_(x);
  }
  double dp(double x, double p) const override {
    double q = p - c_(x);
    double aq = std::abs(q);
    return sgn(q) * (b_ * g_ * std::pow(aq, g_ - 1.0) + l_);
  }

 private:
  double b_, g_, l_;
  ScalarField V_, c_;
};

// b(p^2/2 - c|p|) + V, the pinned nonconvex form when c > 0.
class PinnedModel final : public HamiltonianModel {
 public:
  PinnedModel(double b, double c, ScalarField V) : b_(b), c_(c), V_(std::move(V)) {}
  double value(double x, double p) const override {
    return b_ * (0.5 * p * p - c_ * std::abs(p)) + V_(x);
  }
  double dp(double, double p) const override { return b_ * (p - c_ * sgn(p)); }

 private:
  double b_, c_;
  ScalarField V_;
};

class DoubleWellModel final : public HamiltonianModel {
 public:
  DoubleWellModel(double b, ScalarField V) : b_(b), V_(std::move(V)) {}
  double value(double x, double p) const override {
    double t = p * p - 1.0;
    return b_ * t * t + V_(x);
  }
  double dp(double, double p) const override { return 4.0 * b_ * p * (p * p - 1.0); }

 private:
  double b_;
  ScalarField V_;
};

// b max(|p-c|-w, 0)^g + V
class FlatBottomModel final : public HamiltonianModel {
 public:
  FlatBottomModel(double b, double g, double w, ScalarField V, ScalarField c)
      : b_(b), g_(g), w_(w), V_(std::move(V)), c_(std::move(c)) {}
  double value(double x, double p) const override {
    double q = std::max(std::abs(p - c_(x)) - w_, 0.0);
    return b_ * std::pow(q, g_) + V_(x);
  }
  double dp(double x, double p) const override {
    double d = p - c_(x);
    double q = std::max(std::abs(d) - w_, 0.0);
    return sgn(d) * b_ * g_ * std::pow(q, g_ - 1.0);
  }

 private:
  double b_, g_, w_;
  ScalarField V_, c_;
};

class Sin2Diffusion final : public DiffusionModel {
 public:
  Sin2Diffusion(double period, double floor, double center)
      : period_(period), floor_(floor), center_(center) {}
  double sqrt_a(double x) const override {
    double s = std::abs(std::sin(std::numbers::pi * (x - center_) / period_));
    return std::max(s - floor_, 0.0) / (1.0 - floor_);
  }

 private:
  double period_, floor_, center_;
};

class TentDiffusion final : public DiffusionModel {
 public:
  TentDiffusion(double period, double slope, double center)
      : period_(period), slope_(slope), center_(center) {}
  double sqrt_a(double x) const override {
    double d = std::abs(wrap(x - center_, -0.5 * period_, period_));
    return std::min(1.0, slope_ * d);
  }

 private:
  double period_, slope_, center_;
};

class PoissonDiffusion final : public DiffusionModel {
 public:
  PoissonDiffusion(std::uint64_t seed, double intensity, double slope)
      : points_(seed, 1, intensity), slope_(slope) {}
  double sqrt_a(double x) const override {
    return std::min(1.0, slope_ * points_.nearest_distance(x, 1.0 / slope_));
  }

 private:
  PoissonPoints points_;
  double slope_;
};

class GridDiffusion final : public DiffusionModel {
 public:
  GridDiffusion(std::vector<double> s, double x0, double dx) : s_(std::move(s)), x0_(x0), dx_(dx) {}
  double sqrt_a(double x) const override {
    double n = static_cast<double>(s_.size());
    double t = std::fmod((x - x0_) / dx_, n);
    if (t < 0) t += n;
    auto i = static_cast<std::size_t>(t);
    if (i >= s_.size()) i = s_.size() - 1;
    double w = t - static_cast<double>(i);
    double v0 = s_[i], v1 = s_[(i + 1) % s_.size()];
    return std::max(0.0, v0 + w * (v1 - v0));
  }

 private:
  std::vector<double> s_;
  double x0_, dx_;
};

class ConstantDiffusion final : public DiffusionModel {
 public:
  explicit ConstantDiffusion(double s) : s_(s) {}
  double sqrt_a(double) const override { return s_; }

 private:
  double s_;
};

class WrappedDiffusion final : public DiffusionModel {
 public:
  WrappedDiffusion(DiffusionField base, double lo, double period)
      : base_(std::move(base)), lo_(lo), period_(period) {}
  double sqrt_a(double x) const override { return base_.sqrt_a(wrap(x, lo_, period_)); }

 private:
  DiffusionField base_;
  double lo_, period_;
};

class WrappedHamiltonian final : public HamiltonianModel {
 public:
  WrappedHamiltonian(HamiltonianField base, double lo, double period)
      : base_(std::move(base)), lo_(lo), period_(period) {}
  double value(double x, double p) const override { return base_(wrap(x, lo_, period_), p); }
  double dp(double x, double p) const override { return base_.dp(wrap(x, lo_, period_), p); }

 private:
  HamiltonianField base_;
  double lo_, period_;
};

FieldSpec parse_field(const KeyValueConfig& cfg, const std::string& prefix, double default_period) {
  FieldSpec f;
  f.family = cfg.get_string(prefix + ".family", f.family);
  f.amplitude = cfg.get_double(prefix + ".amplitude", f.amplitude);
  f.level = cfg.get_double(prefix + ".level", f.level);
  f.period = cfg.get_double(prefix + ".period", default_period);
  f.phase = cfg.get_double(prefix + ".phase", f.phase);
  f.width = cfg.get_double(prefix + ".width", f.width);
  f.center = cfg.get_double(prefix + ".center", 0.5 * f.period);
  f.intensity = cfg.get_double(prefix + ".intensity", f.intensity);
  return f;
}

void check_commensurate(double env_period, const ScalarField& f, const char* name) {
  if (!f.periodic()) return;
  double r = env_period / f.period();
  if (std::abs(r - std::round(r)) > 1e-9 || std::round(r) < 1.0)
    throw ConfigError(std::string(name) + ".period",
                      "must divide the diffusion period for a periodic environment");
}

}  // namespace

std::shared_ptr<const DiffusionModel> make_diffusion_model(std::function<double(double)> sqrt_a) {
  return std::make_shared<FunctionDiffusion>(std::move(sqrt_a));
}

std::shared_ptr<const HamiltonianModel> make_hamiltonian_model(
    std::function<double(double, double)> value, std::function<double(double, double)> dp) {
  return std::make_shared<FunctionHamiltonian>(std::move(value), std::move(dp));
}

std::string to_string(HamiltonianForm f) {
  switch (f) {
    case HamiltonianForm::power: return "power";
    case HamiltonianForm::separable: return "separable";
    case HamiltonianForm::pinned: return "pinned";
    case HamiltonianForm::double_well: return "double-well";
    case HamiltonianForm::flat_bottom: return "flat-bottom";
    case HamiltonianForm::strictified: return "strictified";
    case HamiltonianForm::custom: return "custom";
  }
  return "custom";
}

double hashed_uniform(std::uint64_t seed, std::uint64_t stream, std::int64_t index, std::uint64_t draw) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ull));
  h = splitmix64(h ^ static_cast<std::uint64_t>(index));
  h = splitmix64(h ^ (draw * 0xd1b54a32d192ed03ull));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Environment::Environment(DiffusionField diffusion, HamiltonianField hamiltonian, std::uint64_t seed,
                         EnvironmentKind kind)
    : diffusion_(std::move(diffusion)), hamiltonian_(std::move(hamiltonian)), seed_(seed), kind_(kind) {
  if (!diffusion_.model || !hamiltonian_.model)
    throw ConfigError("environment", "diffusion and hamiltonian models are required");
  if (!(hamiltonian_.gamma > 1.0)) throw HypothesisError("H1", "gamma must exceed 1");
  if (!(hamiltonian_.alpha0 > 0.0) || !(hamiltonian_.alpha1 > 0.0))
    throw HypothesisError("H1", "alpha0 and alpha1 must be positive");
  if (hamiltonian_.eta < 0.0) throw HypothesisError("sqC", "eta must be non-negative");
  if (diffusion_.kappa < 0.0) throw HypothesisError("A2", "kappa must be non-negative");
}

Environment Environment::with_hamiltonian(HamiltonianField h) const {
  return Environment(diffusion_, std::move(h), seed_, kind_);
}

Environment shift(const Environment& env, double y) {
  DiffusionField d = env.diffusion();
  HamiltonianField h = env.hamiltonian();
  d.offset += y;
  h.offset += y;
  return Environment(std::move(d), std::move(h), env.seed(), env.kind());
}

Environment periodize(const Environment& env, double lo, double hi) {
  if (!(hi > lo)) throw ConfigError("periodize", "empty window");
  double L = hi - lo;
  DiffusionField d = env.diffusion();
  d.model = std::make_shared<WrappedDiffusion>(env.diffusion(), lo, L);
  d.offset = 0.0;
  d.period_or_window = L;
  HamiltonianField h = env.hamiltonian();
  h.model = std::make_shared<WrappedHamiltonian>(env.hamiltonian(), lo, L);
  h.offset = 0.0;
  return Environment(std::move(d), std::move(h), env.seed(), EnvironmentKind::periodic);
}

EnvironmentSpec parse_environment_spec(const KeyValueConfig& cfg) {
  EnvironmentSpec s;
  auto& d = s.diffusion;
  d.family = cfg.get_string("diffusion.family", d.family);
  d.period = cfg.get_double("diffusion.period", d.period);
  d.floor = cfg.get_double("diffusion.floor", d.floor);
  d.slope = cfg.get_double("diffusion.slope", d.slope);
  d.center = cfg.get_double("diffusion.center", d.center);
  d.intensity = cfg.get_double("diffusion.intensity", d.intensity);
  d.level = cfg.get_double("diffusion.level", d.level);
  d.samples = cfg.get_doubles("diffusion.samples", {});
  d.grid_x0 = cfg.get_double("diffusion.grid_x0", d.grid_x0);
  d.grid_dx = cfg.get_double("diffusion.grid_dx", d.grid_dx);
  d.kappa = cfg.get_optional_double("diffusion.kappa");

  auto& h = s.hamiltonian;
  h.family = cfg.get_string("hamiltonian.family", h.family);
  h.coefficient = cfg.get_double("hamiltonian.coefficient", h.coefficient);
  h.gamma = cfg.get_double("hamiltonian.gamma", h.gamma);
  h.linear = cfg.get_double("hamiltonian.linear", h.linear);
  h.flat_width = cfg.get_double("hamiltonian.flat_width", h.flat_width);
  h.alpha0 = cfg.get_optional_double("hamiltonian.alpha0");
  h.alpha1 = cfg.get_optional_double("hamiltonian.alpha1");
  h.eta = cfg.get_optional_double("hamiltonian.eta");
  h.potential = parse_field(cfg, "potential", d.period);
  h.drift = parse_field(cfg, "drift", d.period);

  s.seed = cfg.get_uint("seed", s.seed);
  s.macro_length = cfg.get_double("environment.macro_length", s.macro_length);
  s.validation_tol = cfg.get_double("environment.validation_tol", s.validation_tol);
  return s;
}

Environment sample_environment(const EnvironmentSpec& spec, std::uint64_t seed) {
  const auto& ds = spec.diffusion;
  const auto& hs = spec.hamiltonian;

  DiffusionField d;
  bool random = false;
  double period = ds.period;
  if (ds.family == "sin2") {
    if (!(ds.period > 0)) throw ConfigError("diffusion.period", "must be positive");
    if (!(ds.floor >= 0.0 && ds.floor < 1.0)) throw ConfigError("diffusion.floor", "must lie in [0,1)");
    d.model = std::make_shared<Sin2Diffusion>(ds.period, ds.floor, ds.center);
    d.kappa = std::numbers::pi / (ds.period * (1.0 - ds.floor));
  } else if (ds.family == "tent") {
    if (!(ds.period > 0)) throw ConfigError("diffusion.period", "must be positive");
    if (!(ds.slope > 0)) throw ConfigError("diffusion.slope", "must be positive");
    d.model = std::make_shared<TentDiffusion>(ds.period, ds.slope, ds.center);
    d.kappa = ds.slope;
  } else if (ds.family == "poisson") {
    if (!(ds.intensity > 0)) throw ConfigError("diffusion.intensity", "must be positive");
    if (!(ds.slope > 0)) throw ConfigError("diffusion.slope", "must be positive");
    d.model = std::make_shared<PoissonDiffusion>(seed, ds.intensity, ds.slope);
    d.kappa = ds.slope;
    random = true;
    period = spec.macro_length;
  } else if (ds.family == "grid") {
    if (ds.samples.size() < 2) throw ConfigError("diffusion.samples", "need at least two samples");
    if (!(ds.grid_dx > 0)) throw ConfigError("diffusion.grid_dx", "must be positive");
    if (!ds.kappa) throw ConfigError("diffusion.kappa", "required for the grid family");
    for (double v : ds.samples)
      if (v < 0) throw ConfigError("diffusion.samples", "sqrt(a) samples must be non-negative");
    d.model = std::make_shared<GridDiffusion>(ds.samples, ds.grid_x0, ds.grid_dx);
    d.representation = DiffusionRepresentation::grid;
    period = ds.grid_dx * static_cast<double>(ds.samples.size());
  } else if (ds.family == "constant") {
    if (!(ds.level >= 0)) throw ConfigError("diffusion.level", "must be non-negative");
    d.model = std::make_shared<ConstantDiffusion>(std::sqrt(ds.level));
    d.kappa = 0.0;
  } else {
    throw ConfigError("diffusion.family", "unknown family '" + ds.family + "'");
  }
  if (ds.kappa) d.kappa = *ds.kappa;
  d.period_or_window = period;

  ScalarField V(hs.potential, seed, 2), c(hs.drift, seed, 3);
  random = random || V.random() || c.random();
  if (random) d.period_or_window = spec.macro_length;
  if (!random && ds.family != "constant") {
    check_commensurate(period, V, "potential");
    check_commensurate(period, c, "drift");
  }

  HamiltonianField h;
  if (!(hs.coefficient > 0)) throw ConfigError("hamiltonian.coefficient", "must be positive");
  if (hs.family == "power") {
    if (!(hs.gamma > 1.0)) throw HypothesisError("H1", "hamiltonian.gamma must exceed 1");
    if (hs.linear < 0) throw ConfigError("hamiltonian.linear", "must be non-negative");
    h.form = c.zero() ? HamiltonianForm::power : HamiltonianForm::separable;
    h.gamma = hs.gamma;
    h.eta = hs.linear;
    h.model = std::make_shared<PowerModel>(hs.coefficient, hs.gamma, hs.linear, V, c);
  } else if (hs.family == "pinned") {
    h.form = HamiltonianForm::pinned;
    h.gamma = 2.0;
    h.eta = 0.0;
    h.model = std::make_shared<PinnedModel>(hs.coefficient, hs.linear, V);
  } else if (hs.family == "double-well") {
    h.form = HamiltonianForm::double_well;
    h.gamma = 4.0;
    h.eta = 0.0;
    h.model = std::make_shared<DoubleWellModel>(hs.coefficient, V);
  } else if (hs.family == "flat-bottom") {
    if (!(hs.gamma > 1.0)) throw HypothesisError("H1", "hamiltonian.gamma must exceed 1");
    if (!(hs.flat_width >= 0)) throw ConfigError("hamiltonian.flat_width", "must be non-negative");
    h.form = HamiltonianForm::flat_bottom;
    h.gamma = hs.gamma;
    h.eta = 0.0;
    h.model = std::make_shared<FlatBottomModel>(hs.coefficient, hs.gamma, hs.flat_width, V, c);
  } else {
    throw ConfigError("hamiltonian.family", "unknown family '" + hs.family + "'");
  }

  double span = random ? spec.macro_length : period;
  if (!(span > 0)) throw ConfigError("environment.macro_length", "must be positive");
  const auto nx = std::max<std::size_t>(2001, static_cast<std::size_t>(400.0 * span));
  if (!hs.alpha0 || !hs.alpha1) {
    auto k = estimate_constants(*h.model, h.gamma, 0.0, span, nx, 8.0, 401);
    h.alpha0 = k.alpha0;
    h.alpha1 = k.alpha1;
  }
  if (hs.alpha0) h.alpha0 = *hs.alpha0;
  if (hs.alpha1) h.alpha1 = *hs.alpha1;
  if (hs.eta) h.eta = *hs.eta;

  Environment env(std::move(d), std::move(h), seed,
                  random ? EnvironmentKind::random_stationary : EnvironmentKind::periodic);

  ValidationGrid grid;
  grid.x_lo = 0.0;
  grid.x_hi = span;
  grid.nx = nx;
  auto report = validate_environment(env, grid, spec.validation_tol);
  for (const char* name : {"A1", "A2", "H1", "H2", "H3"}) {
    const auto& c = report.get(name);
    if (!c.passed) {
      std::ostringstream os;
      os.precision(12);
      os << c.detail << " (witness x=" << c.witness_x << ", p=" << c.witness_p << ")";
      throw HypothesisError(name, os.str());
    }
  }
  return env;
}

}  // namespace hjhom
