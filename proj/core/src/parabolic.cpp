#include "hjhom/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "hjhom/errors.hpp"
#include "hjhom/hamlib.hpp"

namespace hjhom {

std::string to_string(NumericalHamiltonian f) {
  return f == NumericalHamiltonian::lax_friedrichs ? "lax-friedrichs" : "engquist-osher";
}

std::string to_string(BoundaryMode b) { return b == BoundaryMode::periodic ? "periodic" : "linear-far-field"; }

ParabolicSolver::ParabolicSolver(Environment env, double theta, SchemeConfig cfg)
    : env_(std::move(env)), theta_(theta), cfg_(cfg) {
  if (!(cfg_.dx > 0)) throw ConfigError("parabolic.dx", "must be positive");
  if (!(cfg_.x_hi > cfg_.x_lo)) throw ConfigError("parabolic.x_hi", "must exceed x_lo");
  if (!(cfg_.horizon > 0)) throw ConfigError("parabolic.horizon", "must be positive");
  if (!(cfg_.tail_fraction > 0 && cfg_.tail_fraction < 1))
    throw ConfigError("parabolic.tail_fraction", "must lie in (0, 1)");
  if (!(cfg_.cfl_safety > 0 && cfg_.cfl_safety <= 1)) throw ConfigError("parabolic.cfl_safety", "must lie in (0, 1]");
  if (cfg_.x_ref < cfg_.x_lo || cfg_.x_ref > cfg_.x_hi)
    throw ConfigError("parabolic.x_ref", "must lie in the domain");

  double L = cfg_.x_hi - cfg_.x_lo;
  std::size_t n;
  if (cfg_.boundary == BoundaryMode::periodic) {
    double P = env_.period();
    double cells = L / P;
    if (env_.kind() != EnvironmentKind::periodic || std::abs(cells - std::round(cells)) > 1e-9 * cells)
      throw ConfigError("parabolic.boundary", "periodic mode needs a periodic environment and a whole number of periods");
    n = static_cast<std::size_t>(std::ceil(L / cfg_.dx - 1e-9));
    cfg_.dx = L / static_cast<double>(n);
  } else {
    n = static_cast<std::size_t>(std::ceil(L / cfg_.dx - 1e-9));
    cfg_.dx = L / static_cast<double>(n);
    ++n;
  }
  if (n < 4) throw ConfigError("parabolic.dx", "fewer than four grid cells");

  const auto& H = env_.hamiltonian();
  x_.resize(n);
  a_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    x_[i] = cfg_.x_lo + cfg_.dx * static_cast<double>(i);
    a_[i] = env_.a(x_[i]);
  }

  if (!(cfg_.gradient_bound > 0)) {
    double Lam = -std::numeric_limits<double>::infinity();
    for (double xi : x_) Lam = std::max(Lam, env_.H(xi, theta_));
    cfg_.gradient_bound = 1.5 * std::max(sublevel_radius(H.alpha0, H.gamma, Lam), std::abs(theta_)) + 0.5;
  }

  // Local dissipation: max |H_p| over the admissible gradient range, sampled on 129 points.
  const int np = 129;
  alpha_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0;
    for (int k = 0; k < np; ++k) {
      double p = -cfg_.gradient_bound + 2 * cfg_.gradient_bound * k / (np - 1);
      m = std::max(m, std::abs(env_.H_p(x_[i], p)));
    }
    alpha_[i] = 1.05 * m;
  }
  alpha_max_ = *std::max_element(alpha_.begin(), alpha_.end());

  if (cfg_.flux == NumericalHamiltonian::engquist_osher) {
    p_hat_.resize(n);
    h_hat_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      MinPoint mp = min_profile(H, x_[i]);
      p_hat_[i] = mp.p_hat;
      h_hat_[i] = env_.H(x_[i], mp.p_hat);
    }
  }

  double amax = *std::max_element(a_.begin(), a_.end());
  double rate = 2 * amax / (cfg_.dx * cfg_.dx) + alpha_max_ / cfg_.dx;
  if (cfg_.dt > 0) {
    if (cfg_.dt * rate > 1.0) {
      std::ostringstream os;
      os << "dt=" << cfg_.dt << " violates the monotonicity bound dt <= " << 1.0 / rate;
      throw ConfigError("parabolic.dt", os.str());
    }
    dt_ = cfg_.dt;
  } else {
    dt_ = cfg_.cfl_safety / rate;
  }
  cfg_.dt = dt_;
  v_.assign(n, 0.0);
  next_.assign(n, 0.0);
}

void ParabolicSolver::set_u(const std::vector<double>& u) {
  if (u.size() != x_.size()) throw ConfigError("parabolic.initial", "size does not match the grid");
  for (std::size_t i = 0; i < x_.size(); ++i) v_[i] = u[i] - theta_ * x_[i];
}

std::vector<double> ParabolicSolver::u() const {
  std::vector<double> out(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) out[i] = v_[i] + theta_ * x_[i];
  return out;
}

double ParabolicSolver::u_at(double x) const {
  double s = (x - cfg_.x_lo) / cfg_.dx;
  auto i = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0, static_cast<double>(x_.size() - 1)));
  double w = s - static_cast<double>(i);
  double v0 = v_[i];
  double v1 = i + 1 < x_.size() ? v_[i + 1] : (cfg_.boundary == BoundaryMode::periodic ? v_[0] : v_[i]);
  return (1 - w) * v0 + w * v1 + theta_ * x;
}

double ParabolicSolver::max_gradient() const {
  double g = 0;
  std::size_t n = x_.size();
  std::size_t m = cfg_.boundary == BoundaryMode::periodic ? n : n - 1;
  for (std::size_t i = 0; i < m; ++i) g = std::max(g, std::abs(theta_ + (v_[(i + 1) % n] - v_[i]) / cfg_.dx));
  return g;
}

double ParabolicSolver::flux(std::size_t i, double vm, double v0, double vp) const {
  double pm = theta_ + (v0 - vm) / cfg_.dx;
  double pp = theta_ + (vp - v0) / cfg_.dx;
  double diff = a_[i] * (vp - 2 * v0 + vm) / (cfg_.dx * cfg_.dx);
  if (cfg_.flux == NumericalHamiltonian::lax_friedrichs)
    return diff + env_.H(x_[i], 0.5 * (pm + pp)) + 0.5 * alpha_[i] * (pp - pm);
  double ph = p_hat_[i];
  return diff + env_.H(x_[i], std::min(pm, ph)) + env_.H(x_[i], std::max(pp, ph)) - h_hat_[i];
}

void ParabolicSolver::step() {
  std::size_t n = x_.size();
  if (cfg_.boundary == BoundaryMode::periodic) {
    next_[0] = v_[0] + dt_ * flux(0, v_[n - 1], v_[0], v_[1]);
    for (std::size_t i = 1; i + 1 < n; ++i) next_[i] = v_[i] + dt_ * flux(i, v_[i - 1], v_[i], v_[i + 1]);
    next_[n - 1] = v_[n - 1] + dt_ * flux(n - 1, v_[n - 2], v_[n - 1], v_[0]);
  } else {
    next_[0] = v_[0] + dt_ * flux(0, 2 * v_[0] - v_[1], v_[0], v_[1]);
    for (std::size_t i = 1; i + 1 < n; ++i) next_[i] = v_[i] + dt_ * flux(i, v_[i - 1], v_[i], v_[i + 1]);
    next_[n - 1] = v_[n - 1] + dt_ * flux(n - 1, v_[n - 2], v_[n - 1], 2 * v_[n - 1] - v_[n - 2]);
  }
  ++steps_;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(next_[i])) {
      std::ostringstream os;
      os << "non-finite value at step " << steps_;
      throw NumericalFailure(os.str(), x_[i]);
    }
  }
  v_.swap(next_);
  t_ += dt_;
}

ParabolicRun solve_parabolic(const Environment& env, double theta, const SchemeConfig& cfg) {
  if (cfg.boundary == BoundaryMode::linear_far_field) {
    // Worst-case gradient speed from the boundary must not reach x_ref before T.
    ParabolicSolver probe(env, theta, cfg);
    double reach = probe.alpha_max() * cfg.horizon;
    if (reach > std::min(cfg.x_ref - cfg.x_lo, cfg.x_hi - cfg.x_ref)) {
      std::ostringstream os;
      os << "domain too small: boundary influence travels " << reach << " by T";
      throw ConfigError("parabolic.x_lo", os.str());
    }
  }
  ParabolicSolver s(env, theta, cfg);
  ParabolicRun run;
  run.theta = theta;
  run.config = s.config();
  run.config.dt = s.dt();
  auto total = static_cast<std::size_t>(std::ceil(cfg.horizon / s.dt() - 1e-9));
  std::size_t every = std::max<std::size_t>(1, (total + cfg.max_records - 1) / std::max<std::size_t>(1, cfg.max_records));
  double t_tail = (1 - cfg.tail_fraction) * cfg.horizon;
  double u_tail = NAN, t_tail_hit = NAN;
  run.h_L = std::numeric_limits<double>::infinity();
  run.h_U = -std::numeric_limits<double>::infinity();
  double Kp = s.config().gradient_bound;
  for (std::size_t k = 1; k <= total; ++k) {
    s.step();
    double t = s.time();
    double ur = s.u_at(cfg.x_ref);
    if (t >= t_tail) {
      if (std::isnan(u_tail)) {
        u_tail = ur;
        t_tail_hit = t;
      }
      run.h_L = std::min(run.h_L, ur / t);
      run.h_U = std::max(run.h_U, ur / t);
    }
    if (k % every == 0 || k == total) {
      run.t.push_back(t);
      run.u_ref.push_back(ur);
      double g = s.max_gradient();
      run.max_gradient = std::max(run.max_gradient, g);
    }
  }
  run.steps = s.steps();
  run.x = s.x();
  run.u = s.u();
  double T = s.time();
  run.h_final = run.u_ref.back() / T;
  run.tail_slope = T > t_tail_hit ? (run.u_ref.back() - u_tail) / (T - t_tail_hit) : run.h_final;
  run.max_gradient = std::max(run.max_gradient, s.max_gradient());
  run.gradient_exceeded = run.max_gradient > Kp;
  return run;
}

void ParabolicRun::write_csv(std::ostream& os) const {
  char buf[128];
  os << "t,u,u_over_t\n";
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t[k], u_ref[k], u_ref[k] / t[k]);
    os << buf;
  }
}

EffectiveEstimate estimate_effective(const ParabolicRun& run, double tail_fraction, double gap_tol) {
  if (run.t.empty()) throw ConfigError("parabolic.trace", "run has no recorded trace");
  if (!(tail_fraction > 0 && tail_fraction < 1)) throw ConfigError("parabolic.tail_fraction", "must lie in (0, 1)");
  EffectiveEstimate e;
  double T = run.t.back();
  double t0 = (1 - tail_fraction) * T;
  e.h_L = std::numeric_limits<double>::infinity();
  e.h_U = -std::numeric_limits<double>::infinity();
  std::size_t first = run.t.size() - 1;
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    if (run.t[k] < t0) continue;
    first = std::min(first, k);
    double q = run.u_ref[k] / run.t[k];
    e.h_L = std::min(e.h_L, q);
    e.h_U = std::max(e.h_U, q);
  }
  e.h = run.u_ref.back() / T;
  e.tail_slope = T > run.t[first] ? (run.u_ref.back() - run.u_ref[first]) / (T - run.t[first]) : e.h;
  e.gap = (e.h_U - e.h_L) / std::max(1.0, std::abs(e.h));
  e.conclusive = e.gap <= gap_tol;
  return e;
}

bool ComparisonReport::all_passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.passed; });
}

std::string ComparisonReport::to_text() const {
  std::ostringstream os;
  os.precision(8);
  os << "tol=" << tol << " gap_tol=" << gap_tol << "\n";
  os << "theta hbar h h_L h_U slope rel_error gap verdict\n";
  for (const auto& r : rows) {
    os << r.theta << " " << r.hbar << " " << r.estimate.h << " " << r.estimate.h_L << " " << r.estimate.h_U << " "
       << r.estimate.tail_slope << " " << r.error << " " << r.estimate.gap << " "
       << (r.passed ? "pass" : (r.estimate.conclusive ? "FAIL" : "inconclusive"))
       << (r.gradient_exceeded ? " (gradient bound exceeded)" : "") << "\n";
  }
  return os.str();
}

ComparisonReport homogenization_test(const Environment& env, const EffectiveCurve& curve,
                                     const std::vector<double>& thetas, const SchemeConfig& cfg, double tol,
                                     double gap_tol) {
  ComparisonReport rep;
  rep.tol = tol;
  rep.gap_tol = gap_tol;
  rep.rows.resize(thetas.size());
  rep.runs.resize(thetas.size());
  parallel_for(thetas.size(), cfg.threads, [&](std::size_t i) {
    ComparisonRow& r = rep.rows[i];
    r.theta = thetas[i];
    r.hbar = evaluate_Hbar(curve, thetas[i]);
    rep.runs[i] = solve_parabolic(env, thetas[i], cfg);
    const ParabolicRun& run = rep.runs[i];
    r.estimate = estimate_effective(run, cfg.tail_fraction, gap_tol);
    r.error = std::abs(r.estimate.h - r.hbar) / std::max(1.0, std::abs(r.hbar));
    r.gradient_exceeded = run.gradient_exceeded;
    r.passed = r.error <= tol && r.estimate.conclusive;
  });
  return rep;
}

}  // namespace hjhom
