#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hjhom/environment.hpp"
#include "hjhom/errors.hpp"
#include "hjhom/hamlib.hpp"

namespace hjhom {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

struct Worst {
  double value = -std::numeric_limits<double>::infinity();
  double x = 0.0, p = 0.0;
  void offer(double v, double xx, double pp) {
    if (v > value) {
      value = v;
      x = xx;
      p = pp;
    }
  }
};

HypothesisCheck make_check(const std::string& name, const Worst& w, double tol, const std::string& what) {
  HypothesisCheck c;
  c.name = name;
  c.worst = w.value;
  c.witness_x = w.x;
  c.witness_p = w.p;
  c.passed = !(w.value > tol);
  c.detail = c.passed ? what + " holds on the grid" : what + " violated";
  return c;
}

}  // namespace

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.passed; });
}

const HypothesisCheck& ValidationReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw RangeError("no hypothesis check named " + name);
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  os.precision(10);
  os << "validation grid: x in [" << grid.x_lo << ", " << grid.x_hi << "] nx=" << grid.nx
     << ", p in [-" << grid.p_max << ", " << grid.p_max << "] np=" << grid.np << ", tol=" << tol << "\n";
  for (const auto& c : checks) {
    os << c.name << ": " << (!c.applicable ? "n/a " : (c.passed ? "pass" : "FAIL"));
    os << "  worst=" << c.worst << " at x=" << c.witness_x << " p=" << c.witness_p << "  " << c.detail
       << "\n";
  }
  return os.str();
}

HamiltonianConstants estimate_constants(const HamiltonianModel& model, double gamma, double x_lo,
                                        double x_hi, std::size_t nx, double p_max, std::size_t np,
                                        double margin) {
  auto xs = linspace(x_lo, x_hi, nx);
  auto ps = linspace(-p_max, p_max, np);
  std::vector<double> P(np), G(np), D(np, 0.0);
  for (std::size_t j = 0; j < np; ++j) {
    P[j] = std::pow(std::abs(ps[j]), gamma);
    G[j] = P[j] + 1.0;
    if (j + 1 < np)
      D[j] = std::pow(std::abs(ps[j]) + std::abs(ps[j + 1]) + 1.0, gamma - 1.0) * (ps[j + 1] - ps[j]);
  }

  // a1: upper growth, p- and x-Lipschitz ratios.  lower: the largest al with al |p|^g - 1/al <= h at
  // every node, i.e. the positive root 2 / (sqrt(h^2 + 4P) - h) of P al^2 - h al - 1.
  double a1 = 0.0, lower = std::numeric_limits<double>::infinity();
  std::vector<double> prev(np), cur(np);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < np; ++j) cur[j] = model.value(xs[i], ps[j]);
    for (std::size_t j = 0; j < np; ++j) {
      double h = cur[j];
      a1 = std::max(a1, h / G[j]);
      if (j + 1 < np) a1 = std::max(a1, std::abs(cur[j + 1] - h) / D[j]);
      if (i > 0) a1 = std::max(a1, std::abs(h - prev[j]) / (G[j] * (xs[i] - xs[i - 1])));
      double den = std::sqrt(h * h + 4.0 * P[j]) - h;
      if (den > 0) lower = std::min(lower, 2.0 / den);
    }
    std::swap(prev, cur);
  }
  a1 = std::max(a1, 1e-12) * margin;
  double a0 = std::clamp(lower, 1e-12, a1);
  return {a0 / margin, a1};
}

ValidationReport validate_environment(const Environment& env, const ValidationGrid& g, double tol) {
  ValidationReport rep;
  const auto& H = env.hamiltonian();
  double gamma = H.gamma, al0 = H.alpha0, al1 = H.alpha1;
  rep.grid = g;
  rep.grid.p_max = std::max(g.p_max, 2.0 * hat_radius(al0, al1, gamma));
  rep.tol = tol;
  auto xs = linspace(g.x_lo, g.x_hi, g.nx);
  auto ps = linspace(-rep.grid.p_max, rep.grid.p_max, g.np);
  std::size_t nx = xs.size(), np = ps.size();

  // A1: a has a zero in the window and is not identically zero.
  {
    HypothesisCheck c;
    c.name = "A1";
    auto dec = decompose_components(env, {g.x_lo, g.x_hi});
    double amax = 0.0, xmax = g.x_lo;
    for (double x : xs)
      if (env.a(x) > amax) {
        amax = env.a(x);
        xmax = x;
      }
    c.passed = dec.has_zero() && amax > dec.a_tol;
    c.worst = dec.has_zero() ? 0.0 : 1.0;
    c.witness_x = dec.has_zero() ? dec.zero_set.front().lo : xmax;
    c.detail = !dec.has_zero() ? "min a = 0 not attained in the window"
                               : (amax > dec.a_tol ? "a vanishes somewhere and is not identically zero"
                                                   : "a vanishes identically on the window");
    rep.checks.push_back(c);
  }
  // A2: chord slopes of sqrt(a) bounded by kappa.
  {
    Worst w;
    double kappa = env.kappa();
    double prev = env.sqrt_a(xs[0]);
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      double next = env.sqrt_a(xs[i + 1]);
      double dx = xs[i + 1] - xs[i];
      double v = (std::abs(next - prev) - kappa * dx) / (kappa * dx + 1e-300);
      w.offer(v, xs[i], 0.0);
      double s = prev;
      if (s < -tol || s > 1.0 + tol) w.offer(1.0, xs[i], 0.0);
      prev = next;
    }
    rep.checks.push_back(make_check("A2", w, tol, "sqrt(a) is kappa-Lipschitz with values in [0,1]"));
  }

  std::vector<double> Hv(nx * np);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < np; ++j) Hv[i * np + j] = env.H(xs[i], ps[j]);

  {
    Worst w;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < np; ++j) {
        double pg = std::pow(std::abs(ps[j]), gamma);
        double h = Hv[i * np + j];
        double upper = al1 * (pg + 1.0);
        double lower = al0 * pg - 1.0 / al0;
        w.offer((h - upper) / (1.0 + std::abs(upper)), xs[i], ps[j]);
        w.offer((lower - h) / (1.0 + std::abs(lower)), xs[i], ps[j]);
      }
    rep.checks.push_back(make_check("H1", w, tol, "growth bounds"));
  }
  {
    Worst w;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j + 1 < np; ++j) {
        double p = ps[j], q = ps[j + 1];
        double bound = al1 * std::pow(std::abs(p) + std::abs(q) + 1.0, gamma - 1.0) * (q - p);
        double d = std::abs(Hv[i * np + j + 1] - Hv[i * np + j]);
        w.offer((d - bound) / (1.0 + bound), xs[i], p);
      }
    rep.checks.push_back(make_check("H2", w, tol, "local Lipschitz in p"));
  }
  {
    Worst w;
    for (std::size_t i = 0; i + 1 < nx; ++i)
      for (std::size_t j = 0; j < np; ++j) {
        double bound = al1 * (std::pow(std::abs(ps[j]), gamma) + 1.0) * (xs[i + 1] - xs[i]);
        double d = std::abs(Hv[(i + 1) * np + j] - Hv[i * np + j]);
        w.offer((d - bound) / (1.0 + bound), xs[i], ps[j]);
      }
    rep.checks.push_back(make_check("H3", w, tol, "Lipschitz in x"));
  }
  // qC: H(p_j) <= max(min_{i<j} H, min_{k>j} H).
  {
    Worst w;
    std::vector<double> left(np), right(np);
    for (std::size_t i = 0; i < nx; ++i) {
      const double* h = &Hv[i * np];
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < np; ++j) {
        left[j] = m;
        m = std::min(m, h[j]);
      }
      m = std::numeric_limits<double>::infinity();
      for (std::size_t j = np; j-- > 0;) {
        right[j] = m;
        m = std::min(m, h[j]);
      }
      for (std::size_t j = 1; j + 1 < np; ++j) {
        double cap = std::max(left[j], right[j]);
        w.offer((h[j] - cap) / (1.0 + std::abs(cap)), xs[i], ps[j]);
      }
    }
    rep.checks.push_back(make_check("qC", w, tol, "sublevel sets are intervals"));
  }
  // sqC: slopes at least eta on each side of the discrete minimiser.
  {
    HypothesisCheck c;
    c.name = "sqC";
    if (!(H.eta > 0)) {
      c.applicable = false;
      c.passed = true;
      c.detail = "eta = 0: strict quasiconvexity not certified";
    } else {
      Worst w;
      for (std::size_t i = 0; i < nx; ++i) {
        const double* h = &Hv[i * np];
        std::size_t m = static_cast<std::size_t>(std::min_element(h, h + np) - h);
        for (std::size_t j = 0; j + 1 < np; ++j) {
          if (j + 2 >= m && j <= m + 1) continue;
          double slope = (h[j + 1] - h[j]) / (ps[j + 1] - ps[j]);
          double signed_slope = j < m ? -slope : slope;
          w.offer((H.eta - signed_slope) / (1.0 + H.eta), xs[i], ps[j]);
        }
      }
      c = make_check("sqC", w, tol, "strict quasiconvexity slope bound");
    }
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace hjhom
