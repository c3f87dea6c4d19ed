#include "hjhom/cell.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <sstream>

#include "hjhom/errors.hpp"

namespace hjhom {

std::string to_string(Branch b) { return b == Branch::plus ? "plus" : "minus"; }

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::integrated: return "integrated";
    case Provenance::algebraic: return "algebraic";
    case Provenance::zero_set: return "zero_set";
  }
  return "integrated";
}

namespace {

struct CellOde {
  const Environment& env;
  double lambda;
  double mass(double x) const { return env.a(x); }
  double rhs(double x, double y) const { return lambda - env.H(x, y); }
  double rhs_y(double x, double y) const { return -env.H_p(x, y); }
};

// Three-point Gauss-Legendre on [lo, hi].
template <class F>
double gauss3(F&& f, double lo, double hi) {
  static constexpr double node = 0.7745966692414834;
  double m = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
  return r * (5.0 / 9.0 * f(m - r * node) + 8.0 / 9.0 * f(m) + 5.0 / 9.0 * f(m + r * node));
}

// Integral of p_lambda over [lo, hi], on pieces no longer than `piece`.
double integrate_p_lambda(const CellProblem& cell, double lambda, Branch b, double lo, double hi,
                          double piece) {
  if (!(hi > lo)) return 0.0;
  auto n = static_cast<std::size_t>(std::ceil((hi - lo) / piece));
  n = std::max<std::size_t>(n, 1);
  double s = 0.0;
  auto f = [&](double x) { return cell.p_lambda(x, lambda, b); };
  for (std::size_t k = 0; k < n; ++k) {
    double a = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n);
    double c = k + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(k + 1) / static_cast<double>(n);
    s += gauss3(f, a, c);
  }
  return s;
}

enum class Record { none, steps, grid };

BranchResult run_branch(const CellProblem& cell, const Component& J, double lambda, Branch b,
                        std::span<const double> grid, Record record) {
  const Environment& env = cell.env();
  const CellOptions& o = cell.options();
  BranchResult res;
  res.branch = b;
  res.component = J;
  res.lambda = lambda;

  const bool plus = b == Branch::plus;
  const double start = plus ? J.lo : J.hi;
  const double end = plus ? J.hi : J.lo;
  const EndpointKind start_kind = plus ? J.lo_kind : J.hi_kind;
  const EndpointKind end_kind = plus ? J.hi_kind : J.lo_kind;

  auto check_endpoint = [&](double e) {
    MinPoint m = cell.min_point(e);
    if (lambda < m.lambda_hat - o.endpoint_tol) throw EndpointObstructedError(e, lambda, m.lambda_hat);
  };
  double f0;
  if (start_kind == EndpointKind::zero) {
    check_endpoint(start);
    f0 = cell.p_lambda(start, std::max(lambda, cell.min_point(start).lambda_hat), b);
  } else {
    MinPoint m = cell.min_point(start);
    f0 = lambda >= m.lambda_hat ? cell.p_lambda(start, lambda, b) : m.p_hat;
  }
  if (end_kind == EndpointKind::zero) check_endpoint(end);

  const double M = cell.escape_bound(lambda);
  const double dir = plus ? 1.0 : -1.0;

  std::vector<double> landings;
  if (record == Record::grid) {
    landings.assign(grid.begin(), grid.end());
    if (!plus) std::reverse(landings.begin(), landings.end());
  }

  std::vector<double> y{f0}, integral;
  std::vector<BranchSample> samples;
  double x_prev = start, f_prev = f0;
  bool escaped = false, switched = false, left_start = false;
  double switch_x = end, switch_u = 0.0;
  std::size_t next_grid = 0;
  CellOde ode{env, lambda};

  auto on_accept = [&](double x, const std::vector<double>& yy, const std::vector<double>& in,
                       bool landed) {
    double f = yy[0];
    x_prev = x;
    f_prev = f;
    if (!(std::abs(f) <= M)) {
      escaped = true;
      return false;
    }
    bool at_end = x == end;
    if (record == Record::steps && !at_end) samples.push_back({x, f, in[0], Provenance::integrated});
    if (record == Record::grid && landed && !at_end) {
      samples.push_back({x, f, in[0], Provenance::integrated});
      ++next_grid;
    }
    if (end_kind == EndpointKind::zero && !at_end) {
      double a = env.a(x);
      if (a > o.switch_a) left_start = true;
      // Only on the attracting side of p_hat; near the other endpoint of the sublevel the residual is
      // small too but the solution is falling through it.
      if (left_start && a <= o.switch_a && std::abs(lambda - env.H(x, f)) <= a * M &&
          (plus ? f >= cell.min_point(x).p_hat : f <= cell.min_point(x).p_hat)) {
        switched = true;
        switch_x = x;
        switch_u = in[0];
        return false;
      }
    }
    return true;
  };

  StepOutcome out = integrate_mass_ode(ode, start, end, y, integral, landings, o.ode, on_accept);
  res.steps = out.accepted;
  res.rejected = out.rejected;

  if (escaped) {
    res.tracked = false;
    res.escape_x = x_prev;
    return res;
  }
  if (out.status == StepStatus::underflow || out.status == StepStatus::step_limit) {
    MinPoint m = cell.min_point(x_prev);
    double h = env.H(x_prev, f_prev);
    bool down = plus ? f_prev < m.p_hat : f_prev > m.p_hat;
    if (down && h > lambda) {
      res.tracked = false;
      res.escape_x = x_prev;
      return res;
    }
    std::ostringstream os;
    os.precision(12);
    os << "step-size " << (out.status == StepStatus::underflow ? "underflow" : "limit") << " at x=" << x_prev
       << " (lambda=" << lambda << ", f=" << f_prev << ")";
    throw NumericalFailure(os.str(), x_prev);
  }

  double total;
  if (switched) {
    // Remaining stretch follows the algebraic branch p_lambda.
    double lo = std::min(switch_x, end), hi = std::max(switch_x, end);
    double piece = std::max(1e-3, (hi - lo) / 8);
    if (record == Record::grid) {
      for (std::size_t k = next_grid; k < landings.size(); ++k) {
        double xg = landings[k];
        double seg = integrate_p_lambda(cell, lambda, b, std::min(switch_x, xg), std::max(switch_x, xg), piece);
        samples.push_back({xg, cell.p_lambda(xg, lambda, b), switch_u + dir * seg, Provenance::algebraic});
      }
    }
    total = switch_u + dir * integrate_p_lambda(cell, lambda, b, lo, hi, piece);
    res.end_value = cell.p_lambda(end, lambda, b);
  } else {
    total = integral[0];
    res.end_value = y[0];
  }

  res.tracked = true;
  // Convert to the integral from J.lo.
  if (plus) {
    res.integral = total;
  } else {
    res.integral = -total;
    for (auto& s : samples) s.u = res.integral + s.u;
    std::reverse(samples.begin(), samples.end());
  }
  res.samples = std::move(samples);
  return res;
}

}  // namespace

CellProblem::CellProblem(Environment env, Interval window, CellOptions opts)
    : env_(std::move(env)), opts_(opts) {
  dec_ = decompose_components(env_, window, opts_.a_tol, opts_.resolution);
  if (!dec_.has_zero())
    throw RangeError("window contains no zero of a; choose a longer window");
  trimmed_ = dec_.trimmed();
  zero_sup_ = -std::numeric_limits<double>::infinity();
  min_hat_ = std::numeric_limits<double>::infinity();
  double step = opts_.resolution * 0.25;
  for (const auto& z : dec_.zero_set) {
    auto n = static_cast<std::size_t>(std::ceil(z.length() / step));
    for (std::size_t k = 0; k <= n; ++k) {
      double x = n == 0 ? z.lo : z.lo + z.length() * static_cast<double>(k) / static_cast<double>(n);
      double v = min_point(x).lambda_hat;
      zero_sup_ = std::max(zero_sup_, v);
      min_hat_ = std::min(min_hat_, v);
    }
  }
  auto n = static_cast<std::size_t>(std::ceil(trimmed_.length() / opts_.resolution));
  for (std::size_t k = 0; k <= n; ++k) {
    double x = trimmed_.lo + trimmed_.length() * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(n, 1));
    min_hat_ = std::min(min_hat_, min_point(x).lambda_hat);
  }
}

std::vector<Component> CellProblem::full_components() const {
  std::vector<Component> out;
  for (const auto& c : dec_.components)
    if (c.full()) out.push_back(c);
  return out;
}

double CellProblem::p_lambda(double x, double lambda, Branch b) const {
  const auto& H = env_.hamiltonian();
  MinPoint m = min_profile(H, x);
  SublevelEndpoints e = sublevel_endpoints(H, x, lambda, m, opts_.root_tol);
  return b == Branch::plus ? e.p_plus : e.p_minus;
}

double CellProblem::escape_bound(double lambda) const {
  const auto& H = env_.hamiltonian();
  return 2.0 * lipschitz_bound(H.alpha0, H.alpha1, H.gamma, env_.kappa(), lambda, opts_.c_gamma) + 1.0;
}

BranchResult integrate_branch(const CellProblem& cell, const Component& J, double lambda, Branch b,
                              std::span<const double> grid) {
  return run_branch(cell, J, lambda, b, grid, grid.empty() ? Record::steps : Record::grid);
}

std::string FeasibilityReport::to_text() const {
  std::ostringstream os;
  os.precision(15);
  os << "lambda = " << lambda << "\n";
  os << "zero-set sup lambda_hat = " << zero_set_sup << " -> " << (zero_set_ok ? "ok" : "violated") << "\n";
  for (const auto& c : components) {
    os << "component (" << c.component.lo << ", " << c.component.hi << "): ";
    switch (c.verdict) {
      case ComponentVerdict::tracked: os << "tracked"; break;
      case ComponentVerdict::blew_down: os << "blew down at x=" << c.x; break;
      case ComponentVerdict::obstructed: os << "endpoint obstructed at x=" << c.x; break;
      case ComponentVerdict::inconclusive: os << "inconclusive at x=" << c.x << " (" << c.message << ")"; break;
    }
    os << "\n";
  }
  os << "feasible = " << (feasible ? "true" : "false") << (inconclusive ? " (inconclusive)" : "") << "\n";
  return os.str();
}

FeasibilityReport feasibility(const CellProblem& cell, double lambda) {
  FeasibilityReport rep;
  rep.lambda = lambda;
  rep.zero_set_sup = cell.zero_set_sup();
  rep.zero_set_ok = lambda >= cell.zero_set_sup() - cell.options().endpoint_tol;
  if (!rep.zero_set_ok) return rep;
  bool all = true;
  for (const auto& J : cell.full_components()) {
    ComponentReport cr;
    cr.component = J;
    try {
      BranchResult r = run_branch(cell, J, lambda, Branch::plus, {}, Record::none);
      if (r.tracked) {
        cr.verdict = ComponentVerdict::tracked;
      } else {
        cr.verdict = ComponentVerdict::blew_down;
        cr.x = r.escape_x;
      }
    } catch (const EndpointObstructedError& e) {
      cr.verdict = ComponentVerdict::obstructed;
      cr.x = e.endpoint;
    } catch (const NumericalFailure& e) {
      cr.verdict = ComponentVerdict::inconclusive;
      cr.x = e.x;
      cr.message = e.what();
      rep.inconclusive = true;
    }
    rep.components.push_back(cr);
    if (cr.verdict != ComponentVerdict::tracked) {
      all = false;
      break;
    }
  }
  rep.feasible = all;
  return rep;
}

std::string CriticalValue::to_text() const {
  std::ostringstream os;
  os.precision(15);
  os << "lambda0 = " << lambda0 << "\nbracket = [" << lo << ", " << hi << "]\n";
  os << "zero-set sup lambda_hat = " << zero_set_sup << "\nmin lambda_hat = " << min_lambda_hat << "\n";
  os << "iterations = " << iterations << "\n";
  for (const auto& [l, f] : spot_checks) os << "spot check lambda=" << l << " feasible=" << f << "\n";
  return os.str();
}

CriticalValue critical_value(const CellProblem& cell, double tol_lambda) {
  if (!(tol_lambda > 0)) throw ConfigError("tol_lambda", "must be positive");
  CriticalValue cv;
  cv.zero_set_sup = cell.zero_set_sup();
  cv.min_lambda_hat = cell.min_lambda_hat();
  auto feasible = [&](double l) {
    FeasibilityReport r = feasibility(cell, l);
    if (r.inconclusive) {
      for (const auto& c : r.components)
        if (c.verdict == ComponentVerdict::inconclusive)
          throw NumericalFailure("feasibility inconclusive: " + c.message, c.x);
    }
    return r.feasible;
  };
  double lo = std::max(cv.zero_set_sup, cv.min_lambda_hat);
  const double lo0 = lo;
  double hi = std::max(cell.env().hamiltonian().alpha1, lo + tol_lambda);
  int tries = 0;
  while (!feasible(hi)) {
    lo = hi;
    hi = hi + std::max(1.0, hi - lo0);
    if (++tries > 40) throw NumericalFailure("no feasible level found above alpha1", cell.trimmed().lo);
  }
  while (0.5 * (hi - lo) > tol_lambda) {
    double mid = 0.5 * (lo + hi);
    if (feasible(mid)) hi = mid;
    else lo = mid;
    ++cv.iterations;
  }
  cv.lo = lo;
  cv.hi = hi;
  cv.lambda0 = 0.5 * (lo + hi);

  std::vector<std::pair<double, bool>> expect = {{hi + 4 * tol_lambda, true}, {hi + 64 * tol_lambda, true}};
  if (lo - 4 * tol_lambda > lo0) expect.push_back({lo - 4 * tol_lambda, false});
  else expect.push_back({hi + 1024 * tol_lambda, true});
  for (const auto& [l, want] : expect) {
    bool got = feasible(l);
    cv.spot_checks.push_back({l, got});
    if (got != want) {
      std::ostringstream os;
      os.precision(15);
      os << "feasibility predicate is not monotone near lambda=" << l
         << "; tighten integration tolerances";
      throw NumericalFailure(os.str(), cell.trimmed().lo);
    }
  }
  return cv;
}

void CorrectorProfile::write_csv(std::ostream& os) const {
  os << "x,f,u,provenance\n";
  char buf[128];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,", x[i], f[i], u[i]);
    os << buf << to_string(provenance[i]) << "\n";
  }
}

namespace {

// Walks zero intervals and full components of the trimmed window in order.
template <class OnZero, class OnComponent>
void walk_window(const CellProblem& cell, OnZero&& on_zero, OnComponent&& on_component) {
  const auto& dec = cell.decomposition();
  Interval W = cell.trimmed();
  std::size_t zi = 0, ci = 0;
  const auto& Z = dec.zero_set;
  const auto& C = dec.components;
  while (zi < Z.size() || ci < C.size()) {
    bool take_zero = ci >= C.size() || (zi < Z.size() && Z[zi].lo <= C[ci].lo);
    if (take_zero) {
      on_zero(Z[zi++]);
    } else {
      const Component& c = C[ci++];
      if (c.full() && c.lo >= W.lo && c.hi <= W.hi) on_component(c);
    }
  }
}

}  // namespace

CorrectorProfile build_corrector(const CellProblem& cell, double lambda, Branch b, double dx) {
  if (!(dx > 0)) throw ConfigError("dx", "must be positive");
  const CellOptions& o = cell.options();
  Interval W = cell.trimmed();
  auto N = static_cast<std::size_t>(std::ceil(W.length() / dx));
  N = std::max<std::size_t>(N, 2);
  CorrectorProfile prof;
  prof.lambda = lambda;
  prof.branch = b;
  prof.window = W;
  prof.dx = W.length() / static_cast<double>(N);
  prof.x.resize(N + 1);
  for (std::size_t i = 0; i <= N; ++i) prof.x[i] = i == N ? W.hi : W.lo + prof.dx * static_cast<double>(i);
  prof.f.assign(N + 1, NAN);
  prof.u.assign(N + 1, NAN);
  prof.provenance.assign(N + 1, Provenance::zero_set);

  double cursor = W.lo, u_cursor = 0.0;
  std::size_t i = 0;
  double piece = o.resolution;
  walk_window(
      cell,
      [&](const Interval& z) {
        while (i <= N && prof.x[i] < z.lo) ++i;
        while (i <= N && prof.x[i] <= z.hi) {
          double xi = prof.x[i];
          u_cursor += integrate_p_lambda(cell, lambda, b, cursor, xi, piece);
          cursor = xi;
          prof.f[i] = cell.p_lambda(xi, lambda, b);
          prof.u[i] = u_cursor;
          prof.provenance[i] = Provenance::zero_set;
          ++i;
        }
        u_cursor += integrate_p_lambda(cell, lambda, b, cursor, z.hi, piece);
        cursor = z.hi;
      },
      [&](const Component& J) {
        std::size_t first = i;
        while (i <= N && prof.x[i] < J.hi) ++i;
        std::vector<double> grid(prof.x.begin() + static_cast<std::ptrdiff_t>(first),
                                 prof.x.begin() + static_cast<std::ptrdiff_t>(i));
        BranchResult r = run_branch(cell, J, lambda, b, grid, grid.empty() ? Record::none : Record::grid);
        if (!r.tracked) {
          std::ostringstream os;
          os.precision(12);
          os << "branch " << to_string(b) << " escaped at x=" << r.escape_x << " in component (" << J.lo << ", "
             << J.hi << ") at lambda=" << lambda << "; lambda is below or too close to lambda0";
          throw AssemblyError(os.str(), J.lo, J.hi);
        }
        double zero_end = b == Branch::plus ? J.hi : J.lo;
        double expect = cell.p_lambda(zero_end, lambda, b);
        if (std::abs(r.end_value - expect) > o.junction_tol * std::max(1.0, std::abs(expect))) {
          std::ostringstream os;
          os.precision(12);
          os << "junction mismatch " << std::abs(r.end_value - expect) << " at x=" << zero_end << " in component ("
             << J.lo << ", " << J.hi << ")";
          throw AssemblyError(os.str(), J.lo, J.hi);
        }
        for (std::size_t k = 0; k < r.samples.size(); ++k) {
          const auto& s = r.samples[k];
          std::size_t idx = first + k;
          prof.f[idx] = s.f;
          prof.u[idx] = u_cursor + s.u;
          prof.provenance[idx] = s.provenance;
        }
        u_cursor += r.integral;
        cursor = J.hi;
      });
  for (std::size_t k = 0; k <= N; ++k)
    if (!std::isfinite(prof.f[k]))
      throw AssemblyError("grid point left unassigned at x=" + std::to_string(prof.x[k]), W.lo, W.hi);
  return prof;
}

double branch_average(const CellProblem& cell, double lambda, Branch b) {
  Interval W = cell.trimmed();
  double total = 0.0;
  double piece = cell.options().resolution;
  walk_window(
      cell, [&](const Interval& z) { total += integrate_p_lambda(cell, lambda, b, z.lo, z.hi, piece); },
      [&](const Component& J) {
        BranchResult r = run_branch(cell, J, lambda, b, {}, Record::none);
        if (!r.tracked) {
          std::ostringstream os;
          os.precision(12);
          os << "branch " << to_string(b) << " escaped at x=" << r.escape_x << " at lambda=" << lambda;
          throw AssemblyError(os.str(), J.lo, J.hi);
        }
        total += r.integral;
      });
  return total / W.length();
}

double residual(const Environment& env, const CorrectorProfile& prof, double lambda_override) {
  double lambda = std::isnan(lambda_override) ? prof.lambda : lambda_override;
  double worst = 0.0;
  const auto& P = prof.provenance;
  double dx = prof.dx;
  for (std::size_t i = 1; i + 1 < prof.x.size(); ++i) {
    if (P[i - 1] == Provenance::zero_set || P[i] == Provenance::zero_set || P[i + 1] == Provenance::zero_set)
      continue;
    double up = (prof.u[i + 1] - prof.u[i - 1]) / (2.0 * dx);
    double upp = (prof.u[i + 1] - 2.0 * prof.u[i] + prof.u[i - 1]) / (dx * dx);
    double r = std::abs(env.a(prof.x[i]) * upp + env.H(prof.x[i], up) - lambda);
    worst = std::max(worst, r);
  }
  return worst;
}

MergeReport gronwall_merge_check(const CellProblem& cell, const Component& J, double lambda, double y,
                                 double f_a, double f_b, double merge_threshold, std::optional<double> eta) {
  const Environment& env = cell.env();
  MergeReport rep;
  rep.eta = eta.value_or(env.hamiltonian().eta);
  if (!(y > J.lo && y < J.hi)) throw RangeError("merge start must lie inside the component");
  CellOde ode{env, lambda};
  std::vector<double> st{f_a, f_b}, integral;
  double gap0 = std::abs(f_a - f_b);
  double I = 0.0, x_prev = y;
  double kappa = env.kappa();
  double s_tol = std::sqrt(cell.options().a_tol);
  auto inv_a = [&](double x) { return 1.0 / std::max(env.a(x), 1e-300); };
  const double M = cell.escape_bound(lambda);
  rep.samples.push_back({y, gap0, gap0, 0.0});
  if (gap0 <= merge_threshold) rep.merge_x = y;
  auto on_accept = [&](double x, const std::vector<double>& yy, const std::vector<double>&, bool) {
    I += (x - x_prev) / 6.0 * (inv_a(x_prev) + 4.0 * inv_a(0.5 * (x + x_prev)) + inv_a(x));
    x_prev = x;
    double gap = std::abs(yy[0] - yy[1]);
    double bound = gap0 * std::exp(-rep.eta * I) * (1.0 + 1e-6) + 1e-13;
    rep.samples.push_back({x, gap, bound, I});
    if (gap > bound) rep.bound_respected = false;
    if (std::isnan(rep.merge_x) && gap <= merge_threshold) rep.merge_x = x;
    if (kappa > 0 && x < J.hi) {
      double lower = (1.0 / (s_tol + kappa * (J.hi - x)) - 1.0 / (s_tol + kappa * (J.hi - y))) / kappa;
      if (I < lower * (1.0 - 1e-6) - 1e-12) rep.divergence_confirmed = false;
    }
    return std::abs(yy[0]) <= M && std::abs(yy[1]) <= M;
  };
  StepOutcome out = integrate_mass_ode(ode, y, J.hi, st, integral, {}, cell.options().ode, on_accept);
  if (out.status == StepStatus::underflow || out.status == StepStatus::step_limit)
    throw NumericalFailure("merge integration failed", out.x);
  rep.final_gap = rep.samples.back().gap;
  return rep;
}

BridgeReport bridge_supersolution(const Environment& env, const CorrectorProfile& minus,
                                  const CorrectorProfile& plus, double x0, double tol) {
  if (minus.x.size() != plus.x.size() || minus.dx != plus.dx || minus.lambda != plus.lambda)
    throw ConfigError("bridge", "profiles must share grid and level");
  BridgeReport rep;
  rep.tol = tol;
  const auto& X = plus.x;
  std::size_t n = X.size();
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(X[i] - x0) < std::abs(X[i0] - x0)) i0 = i;
  rep.x0 = X[i0];
  rep.x = X;
  rep.w_prime.resize(n);
  rep.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < i0) {
      rep.w_prime[i] = minus.f[i];
      rep.w[i] = minus.u[i] - minus.u[i0];
    } else {
      rep.w_prime[i] = plus.f[i];
      rep.w[i] = plus.u[i] - plus.u[i0];
    }
  }
  double lambda = plus.lambda, dx = plus.dx;
  rep.worst = -std::numeric_limits<double>::infinity();
  auto offer = [&](double v, double x) {
    if (v > rep.worst) {
      rep.worst = v;
      rep.worst_x = x;
    }
  };
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (i == i0) continue;
    double wp = (rep.w[i + 1] - rep.w[i - 1]) / (2.0 * dx);
    double wpp = (rep.w[i + 1] - 2.0 * rep.w[i] + rep.w[i - 1]) / (dx * dx);
    offer(env.a(X[i]) * wpp + env.H(X[i], wp) - lambda, X[i]);
  }
  double lo = minus.f[i0], hi = plus.f[i0];
  MinPoint m = min_profile(env.hamiltonian(), X[i0]);
  for (double p : {lo, hi, 0.5 * (lo + hi), std::clamp(m.p_hat, std::min(lo, hi), std::max(lo, hi))})
    offer(env.H(X[i0], p) - lambda, X[i0]);
  rep.passed = rep.worst <= tol;
  return rep;
}

}  // namespace hjhom
