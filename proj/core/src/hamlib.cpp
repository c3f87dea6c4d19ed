#include "hjhom/hamlib.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjhom/errors.hpp"

namespace hjhom {

double hat_radius(double alpha0, double alpha1, double gamma) {
  return std::pow((1.0 + alpha1 * alpha0) / (alpha0 * alpha0), 1.0 / gamma);
}

double sublevel_radius(double alpha0, double gamma, double level) {
  double t = std::max(level + 1.0 / alpha0, 0.0) / alpha0;
  return std::pow(t, 1.0 / gamma);
}

namespace {

constexpr double kInvPhi = 0.6180339887498949;

double flat_threshold(double m) { return 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(m)); }

// Largest p in [inside, outside] (or smallest, when outside < inside) with pred(p) true.
template <class Pred>
double bisect_edge(Pred pred, double inside, double outside, double tol) {
  for (int it = 0; it < 200 && std::abs(outside - inside) > tol; ++it) {
    double mid = 0.5 * (inside + outside);
    if (mid == inside || mid == outside) break;
    if (pred(mid)) inside = mid;
    else outside = mid;
  }
  return 0.5 * (inside + outside);
}

}  // namespace

MinPoint min_profile(const HamiltonianField& H, double x, double tol) {
  double R = std::max(1.0, hat_radius(H.alpha0, H.alpha1, H.gamma)) * (1.0 + 1e-9) + tol;
  constexpr int N = 65;
  double step = 2.0 * R / (N - 1);
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < N; ++i) {
    double p = -R + step * i;
    double v = H(x, p);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = -R + step * std::max(best - 1, 0);
  double b = -R + step * std::min(best + 1, N - 1);
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = H(x, c), fd = H(x, d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = H(x, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = H(x, d);
    }
  }
  double p = 0.5 * (a + b);
  double m = H(x, p);
  if (best_v < m) {
    // Coarse node beat the refined point (grid node sits on a kink).
    p = -R + step * best;
    m = best_v;
  }
  double thr = flat_threshold(m);
  double delta = std::max(10.0 * tol, 1e-9);
  bool flat_left = H(x, p - delta) <= m + thr;
  bool flat_right = H(x, p + delta) <= m + thr;
  if (flat_left || flat_right) {
    auto in_argmin = [&](double q) { return H(x, q) <= m + thr; };
    double lo = flat_left ? bisect_edge(in_argmin, p, p - 2.0 * R - 1.0, tol) : p;
    double hi = flat_right ? bisect_edge(in_argmin, p, p + 2.0 * R + 1.0, tol) : p;
    p = 0.5 * (lo + hi);
    m = std::min(m, H(x, p));
  }
  return {m, p};
}

SublevelEndpoints sublevel_endpoints(const HamiltonianField& H, double x, double level, double tol) {
  return sublevel_endpoints(H, x, level, min_profile(H, x, std::min(tol, 1e-10)), tol);
}

SublevelEndpoints sublevel_endpoints(const HamiltonianField& H, double x, double level,
                                     const MinPoint& m, double tol) {
  if (level < m.lambda_hat - tol * std::max(1.0, std::abs(m.lambda_hat)))
    throw EmptySublevelError(x, level, m.lambda_hat);
  double lv = std::max(level, m.lambda_hat);
  auto inside = [&](double q) { return H(x, q) <= lv; };
  double r = sublevel_radius(H.alpha0, H.gamma, lv) + std::abs(m.p_hat) + 1.0;
  double hi = m.p_hat + r, lo = m.p_hat - r;
  for (int k = 0; k < 60 && inside(hi); ++k) hi = m.p_hat + (hi - m.p_hat) * 2.0;
  for (int k = 0; k < 60 && inside(lo); ++k) lo = m.p_hat + (lo - m.p_hat) * 2.0;
  double pp = bisect_edge(inside, m.p_hat, hi, tol);
  double pm = bisect_edge(inside, m.p_hat, lo, tol);
  return {std::min(pm, m.p_hat), std::max(pp, m.p_hat)};
}

double lipschitz_bound(double alpha0, double alpha1, double gamma, double kappa, double lambda,
                       double c_gamma) {
  double first = std::pow(kappa * std::sqrt(1.0 + alpha1 + std::abs(lambda)) / alpha0,
                          2.0 / (gamma - 1.0));
  double second = std::pow(std::max(0.0, 1.0 + lambda * alpha0) / (alpha0 * alpha0), 1.0 / gamma);
  return c_gamma * (first + second);
}

HolderBound holder_bound(double alpha0, double gamma, double lambda, double c_gamma) {
  if (!(gamma > 2.0)) throw UnsupportedError("holder_bound requires gamma > 2");
  double K = c_gamma * (std::pow(1.0 / alpha0, 1.0 / (gamma - 1.0)) +
                        std::pow(std::max(0.0, 1.0 + lambda * alpha0) / (alpha0 * alpha0), 1.0 / gamma));
  return {K, (gamma - 2.0) / (gamma - 1.0)};
}

}  // namespace hjhom
