#include <cmath>
#include <vector>

#include "hjhom/environment.hpp"
#include "hjhom/errors.hpp"

namespace hjhom {

namespace {

struct Sample {
  double x, g;
};

// Samples g = sqrt(a) - sqrt(a_tol) so that every sign change is bracketed within x_res
// and no dip of g below zero is missed (Lipschitz lower bound on each cell).
class Scanner {
 public:
  Scanner(const Environment& env, double s_tol, double x_res)
      : env_(env), s_tol_(s_tol), x_res_(x_res), kappa_(env.kappa()) {}

  double g(double x) const { return env_.sqrt_a(x) - s_tol_; }

  void refine(double u, double v, double gu, double gv, std::vector<Sample>& out) const {
    if (v - u <= x_res_) return;
    bool pu = gu > 0, pv = gv > 0;
    if (pu && pv) {
      if (0.5 * (gu + gv - kappa_ * (v - u)) > 0) return;
    } else if (!pu && !pv) {
      return;
    }
    double m = 0.5 * (u + v);
    if (m <= u || m >= v) return;
    double gm = g(m);
    refine(u, m, gu, gm, out);
    out.push_back({m, gm});
    refine(m, v, gm, gv, out);
  }

 private:
  const Environment& env_;
  double s_tol_, x_res_, kappa_;
};

}  // namespace

Interval ComponentDecomposition::trimmed() const {
  if (zero_set.empty()) throw RangeError("window contains no zero of a");
  return {zero_set.front().lo, zero_set.back().hi};
}

ComponentDecomposition decompose_components(const Environment& env, Interval window, double a_tol,
                                             double resolution) {
  if (!(window.hi > window.lo)) throw ConfigError("window", "length must be positive");
  if (!(a_tol > 0)) throw ConfigError("a_tol", "must be positive");
  if (!(resolution > 0)) throw ConfigError("resolution", "must be positive");
  ComponentDecomposition dec;
  dec.window = window;
  dec.a_tol = a_tol;

  double scale = std::max({1.0, std::abs(window.lo), std::abs(window.hi)});
  Scanner scan(env, std::sqrt(a_tol), 1e-13 * scale);
  auto cells = static_cast<std::size_t>(std::ceil(window.length() / resolution));
  std::vector<Sample> s;
  s.reserve(cells * 2 + 2);
  double u = window.lo, gu = scan.g(u);
  s.push_back({u, gu});
  for (std::size_t k = 1; k <= cells; ++k) {
    double v = k == cells ? window.hi
                          : window.lo + window.length() * static_cast<double>(k) / static_cast<double>(cells);
    double gv = scan.g(v);
    scan.refine(u, v, gu, gv, s);
    s.push_back({v, gv});
    u = v;
    gu = gv;
  }

  std::size_t i = 0, n = s.size();
  while (i < n) {
    std::size_t j = i;
    bool positive = s[i].g > 0;
    while (j + 1 < n && (s[j + 1].g > 0) == positive) ++j;
    if (!positive) dec.zero_set.push_back({s[i].x, s[j].x});
    i = j + 1;
  }

  // Components are the gaps between zero intervals, plus cut pieces at the window ends.
  double cursor = window.lo;
  EndpointKind cursor_kind = EndpointKind::window_cut;
  for (const auto& z : dec.zero_set) {
    if (z.lo > cursor) dec.components.push_back({cursor, z.lo, cursor_kind, EndpointKind::zero});
    cursor = z.hi;
    cursor_kind = EndpointKind::zero;
  }
  if (cursor < window.hi)
    dec.components.push_back({cursor, window.hi, cursor_kind, EndpointKind::window_cut});
  return dec;
}

}  // namespace hjhom
