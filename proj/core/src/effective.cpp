#include "hjhom/effective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "hjhom/errors.hpp"

namespace hjhom {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw ConfigError("interpolant", "need at least two knots");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(x_[i + 1] > x_[i])) throw ConfigError("interpolant", "knots must be strictly increasing");
  std::vector<double> h(n - 1), del(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    del[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = del[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (del[k - 1] * del[k] <= 0) continue;
    double w1 = 2 * h[k] + h[k - 1], w2 = h[k] + 2 * h[k - 1];
    d_[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
  }
  auto edge = [](double h0, double h1, double m0, double m1) {
    double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (d * m0 <= 0) return 0.0;
    if (m0 * m1 <= 0 && std::abs(d) > 3 * std::abs(m0)) return 3 * m0;
    return d;
  };
  d_[0] = edge(h[0], h[1], del[0], del[1]);
  d_[n - 1] = edge(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
}

double MonotoneCubic::operator()(double t) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i >= x_.size() - 1) i = x_.size() - 2;
  double h = x_[i + 1] - x_[i];
  double s = (t - x_[i]) / h;
  double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

ThetaPair theta_pair(const CellProblem& cell, double lambda) {
  return {lambda, branch_average(cell, lambda, Branch::minus), branch_average(cell, lambda, Branch::plus)};
}

EnsembleTheta theta_pair_ensemble(const EnvironmentSpec& spec, const std::vector<std::uint64_t>& seeds,
                                  Interval window, double lambda, const CellOptions& opts) {
  if (seeds.empty()) throw ConfigError("seeds", "ensemble needs at least one seed");
  EnsembleTheta e;
  e.lambda = lambda;
  e.seeds = seeds;
  for (auto s : seeds) {
    CellProblem cell(sample_environment(spec, s), window, opts);
    e.per_seed.push_back(theta_pair(cell, lambda));
  }
  double n = static_cast<double>(seeds.size());
  for (const auto& t : e.per_seed) {
    e.mean_minus += t.theta_minus / n;
    e.mean_plus += t.theta_plus / n;
  }
  if (seeds.size() > 1) {
    double vm = 0, vp = 0;
    for (const auto& t : e.per_seed) {
      vm += (t.theta_minus - e.mean_minus) * (t.theta_minus - e.mean_minus);
      vp += (t.theta_plus - e.mean_plus) * (t.theta_plus - e.mean_plus);
    }
    e.spread_minus = std::sqrt(vm / (n - 1));
    e.spread_plus = std::sqrt(vp / (n - 1));
  }
  return e;
}

namespace {

// Limit of a geometrically converging triple (t1 nearest the limit).
double aitken(double t1, double t2, double t3) {
  double d1 = t1 - t2, d2 = t2 - t3;
  double den = d1 - d2;
  if (!(std::abs(den) > 1e-300)) return NAN;
  return t1 - d1 * d1 / den;
}

bool strictly_monotone(const std::vector<double>& v, double sign) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (!(sign * (v[i + 1] - v[i]) > 0)) return false;
  return true;
}

}  // namespace

EffectiveCurve assemble_curve(double lambda0, std::vector<double> lambdas, std::vector<double> theta_minus,
                              std::vector<double> theta_plus) {
  if (lambdas.size() < 3) throw ConfigError("lambda_grid", "need at least three levels above lambda0");
  if (!strictly_monotone(theta_plus, 1.0) || !strictly_monotone(theta_minus, -1.0))
    throw NumericalFailure("theta curves are not strictly monotone in lambda", lambdas.front());
  EffectiveCurve c;
  c.lambda0 = lambda0;
  c.lambdas = std::move(lambdas);
  c.theta_minus = std::move(theta_minus);
  c.theta_plus = std::move(theta_plus);

  double tp = aitken(c.theta_plus[0], c.theta_plus[1], c.theta_plus[2]);
  double tm = aitken(c.theta_minus[0], c.theta_minus[1], c.theta_minus[2]);
  if (!std::isfinite(tp) || tp > c.theta_plus[0]) tp = c.theta_plus[0];
  if (!std::isfinite(tm) || tm < c.theta_minus[0]) tm = c.theta_minus[0];
  if (tp < tm) tp = tm = 0.5 * (tp + tm);
  c.theta_plus_0 = tp;
  c.theta_minus_0 = tm;

  std::vector<double> rx, ry, lx, ly;
  if (tp < c.theta_plus[0]) {
    rx.push_back(tp);
    ry.push_back(lambda0);
  }
  for (std::size_t k = 0; k < c.lambdas.size(); ++k) {
    rx.push_back(c.theta_plus[k]);
    ry.push_back(c.lambdas[k]);
  }
  for (std::size_t k = c.lambdas.size(); k-- > 0;) {
    lx.push_back(c.theta_minus[k]);
    ly.push_back(c.lambdas[k]);
  }
  if (tm > c.theta_minus[0]) {
    lx.push_back(tm);
    ly.push_back(lambda0);
  }
  c.right = MonotoneCubic(std::move(rx), std::move(ry));
  c.left = MonotoneCubic(std::move(lx), std::move(ly));
  return c;
}

EffectiveCurve build_effective_curve(const CellProblem& cell, const CurveOptions& opts) {
  if (!(opts.first_offset > 0)) throw ConfigError("curve.first_offset", "must be positive");
  if (opts.levels_per_octave < 1) throw ConfigError("curve.levels_per_octave", "must be at least 1");
  double lambda0 = opts.lambda0 ? *opts.lambda0 : critical_value(cell, opts.tol_lambda).lambda0;
  const auto& H = cell.env().hamiltonian();
  double lambda_max =
      opts.lambda_max > 0 ? opts.lambda_max : H.alpha1 * (std::pow(opts.theta_max, H.gamma) + 1.0);
  if (!(lambda_max > lambda0 + opts.first_offset))
    throw ConfigError("curve.lambda_max", "must exceed lambda0 + first_offset");
  std::vector<double> lambdas;
  for (int k = 0;; ++k) {
    double l = lambda0 + opts.first_offset * std::exp2(static_cast<double>(k) / opts.levels_per_octave);
    lambdas.push_back(l);
    if (l >= lambda_max) break;
  }

  auto attempt = [&](const CellProblem& c) {
    std::vector<double> tm(lambdas.size()), tp(lambdas.size());
    parallel_for(lambdas.size(), opts.threads, [&](std::size_t i) {
      ThetaPair t = theta_pair(c, lambdas[i]);
      tm[i] = t.theta_minus;
      tp[i] = t.theta_plus;
    });
    return assemble_curve(lambda0, lambdas, tm, tp);
  };

  EffectiveCurve curve;
  try {
    curve = attempt(cell);
  } catch (const NumericalFailure&) {
    CellOptions tight = cell.options();
    tight.ode.rtol *= 0.01;
    tight.ode.atol *= 0.01;
    curve = attempt(cell.with_options(tight));
  }
  curve.window = cell.trimmed();
  curve.seed = cell.env().seed();
  return curve;
}

double evaluate_Hbar(const EffectiveCurve& c, double theta) {
  if (theta >= c.theta_minus_0 && theta <= c.theta_plus_0) return c.lambda0;
  if (theta > c.theta_plus_0) {
    if (theta > c.right.hi()) {
      std::ostringstream os;
      os << "theta=" << theta << " beyond tabulated range (max " << c.right.hi() << "); raise lambda_max";
      throw RangeError(os.str());
    }
    if (theta < c.right.lo()) return c.lambda0;
    return std::max(c.lambda0, c.right(theta));
  }
  if (theta < c.left.lo()) {
    std::ostringstream os;
    os << "theta=" << theta << " beyond tabulated range (min " << c.left.lo() << "); raise lambda_max";
    throw RangeError(os.str());
  }
  if (theta > c.left.hi()) return c.lambda0;
  return std::max(c.lambda0, c.left(theta));
}

void EffectiveCurve::write_lambda_csv(std::ostream& os) const {
  char buf[160];
  os << "lambda,theta_minus,theta_plus\n";
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", lambda0, theta_minus_0, theta_plus_0);
  os << buf;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", lambdas[k], theta_minus[k], theta_plus[k]);
    os << buf;
  }
}

void EffectiveCurve::write_hbar_csv(std::ostream& os, double lo, double hi, std::size_t n) const {
  lo = std::max(lo, theta_lo());
  hi = std::min(hi, theta_hi());
  char buf[96];
  os << "theta,hbar\n";
  for (std::size_t i = 0; i < n; ++i) {
    double t = n == 1 ? lo : (i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, evaluate_Hbar(*this, t));
    os << buf;
  }
}

bool AuditReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed; });
}

const AuditCheck& AuditReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw RangeError("no audit check named " + name);
}

std::string AuditReport::to_text() const {
  std::ostringstream os;
  os.precision(10);
  for (const auto& c : checks)
    os << c.name << ": " << (c.passed ? "pass" : "FAIL") << "  worst=" << c.worst << " at theta=" << c.at << "\n";
  os << "lipschitz estimate = " << lipschitz_estimate << "\n";
  return os.str();
}

AuditReport audit_curve(const EffectiveCurve& c, double alpha0, double alpha1, double gamma, std::size_t n,
                        double tol) {
  AuditReport rep;
  double lo = c.theta_lo(), hi = c.theta_hi();
  std::vector<double> th(n), hb(n);
  for (std::size_t i = 0; i < n; ++i) {
    th[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    hb[i] = evaluate_Hbar(c, th[i]);
  }
  auto worst_of = [&](const std::string& name, auto&& violation) {
    AuditCheck a;
    a.name = name;
    a.worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double v = violation(i);
      if (v > a.worst) {
        a.worst = v;
        a.at = th[i];
      }
    }
    a.passed = !(a.worst > tol);
    rep.checks.push_back(a);
  };
  worst_of("H1", [&](std::size_t i) {
    double g = std::pow(std::abs(th[i]), gamma);
    double up = alpha1 * (g + 1), low = alpha0 * g - 1 / alpha0;
    return std::max(hb[i] - up, low - hb[i]) / (1 + std::abs(hb[i]));
  });
  std::vector<double> left(n), right(n);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    left[i] = m;
    m = std::min(m, hb[i]);
  }
  m = std::numeric_limits<double>::infinity();
  for (std::size_t i = n; i-- > 0;) {
    right[i] = m;
    m = std::min(m, hb[i]);
  }
  worst_of("quasiconvex", [&](std::size_t i) {
    if (i == 0 || i + 1 == n) return -1.0;
    return hb[i] - std::max(left[i], right[i]);
  });
  worst_of("monotone", [&](std::size_t i) {
    if (i + 1 == n) return -1.0;
    if (th[i + 1] <= c.theta_minus_0) return hb[i + 1] - hb[i];
    if (th[i] >= c.theta_plus_0) return hb[i] - hb[i + 1];
    return -1.0;
  });
  worst_of("min_is_lambda0", [&](std::size_t i) { return c.lambda0 - hb[i]; });
  double lip = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) lip = std::max(lip, std::abs(hb[i + 1] - hb[i]) / (th[i + 1] - th[i]));
  rep.lipschitz_estimate = lip;
  AuditCheck L;
  L.name = "lipschitz_finite";
  L.passed = std::isfinite(lip);
  L.worst = lip;
  rep.checks.push_back(L);
  return rep;
}

}  // namespace hjhom
