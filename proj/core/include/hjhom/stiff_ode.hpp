#pragma once

// Five-stage, L-stable, stiffly accurate SDIRK of order 4 with an embedded order-3
// solution (Hairer & Wanner, Solving ODEs II, Table IV.6.5), written for scalar
// equations in mass form  m(x) y' = g(x, y)  where m may vanish.
//
// Stages solve  m(X)(Y - r) - gamma h g(X, Y) = 0, which stays well posed at m = 0;
// there the last stage reduces to the algebraic constraint g(x, y) = 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace hjhom {

struct StiffControl {
  double rtol = 1e-9;
  double atol = 1e-11;
  double h_init = 1e-3;
  double h_max = 0.05;
  double h_min_rel = 1e-14;
  std::size_t max_steps = 5'000'000;
  int newton_iters = 30;
};

enum class StepStatus { completed, stopped, underflow, step_limit };

struct StepOutcome {
  StepStatus status = StepStatus::completed;
  double x = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

namespace sdirk {

inline constexpr double gamma = 0.25;
inline constexpr std::array<double, 5> c = {0.25, 0.75, 11.0 / 20.0, 0.5, 1.0};
inline constexpr double A[5][5] = {
    {0.25, 0, 0, 0, 0},
    {0.5, 0.25, 0, 0, 0},
    {17.0 / 50.0, -1.0 / 25.0, 0.25, 0, 0},
    {371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0},
    {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25},
};
inline constexpr std::array<double, 5> b = {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25};
inline constexpr std::array<double, 5> bhat = {59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0};

}  // namespace sdirk

// Problem concept:
//   double mass(double x) const;             m(x) >= 0
//   double rhs(double x, double y) const;    g(x, y)
//   double rhs_y(double x, double y) const;  dg/dy
//
// Integrates every trajectory in `y` on one shared step sequence from x0 to x1 (either
// direction). `integral[k]` accumulates the integral of y[k] dx (signed with dx). Steps land
// exactly on each point of `landings` (ordered in the direction of integration).
// on_accept(x, y, integral, landed) returning false stops the run.
template <class Problem, class OnAccept>
StepOutcome integrate_mass_ode(const Problem& prob, double x0, double x1, std::vector<double>& y,
                               std::vector<double>& integral, std::span<const double> landings,
                               const StiffControl& ctl, OnAccept&& on_accept) {
  using namespace sdirk;
  const std::size_t n = y.size();
  integral.assign(n, 0.0);
  StepOutcome out;
  out.x = x0;
  if (x1 == x0) return out;
  const double dir = x1 > x0 ? 1.0 : -1.0;
  double x = x0;
  double h = dir * std::min(ctl.h_init, std::abs(x1 - x0));
  std::size_t next_landing = 0;
  while (next_landing < landings.size() && dir * (landings[next_landing] - x) <= 0) ++next_landing;

  std::vector<std::array<double, 5>> K(n), Y(n);
  std::vector<double> ynew(n), uinc(n);

  while (true) {
    if (out.accepted + out.rejected >= ctl.max_steps) {
      out.status = StepStatus::step_limit;
      out.x = x;
      return out;
    }
    double h_min = ctl.h_min_rel * std::max(1.0, std::abs(x));
    double target = x1;
    bool landing = false;
    if (next_landing < landings.size() && dir * (landings[next_landing] - x1) < 0) {
      target = landings[next_landing];
      landing = true;
    }
    double hs = h;
    bool hits_target = false;
    if (dir * (x + hs - target) >= -1e-12 * std::abs(hs)) {
      hs = target - x;
      hits_target = true;
    }
    if (std::abs(hs) < h_min && !hits_target) {
      out.status = StepStatus::underflow;
      out.x = x;
      return out;
    }

    bool ok = true;
    double err = 0.0;
    for (std::size_t k = 0; k < n && ok; ++k) {
      for (int i = 0; i < 5 && ok; ++i) {
        double X = x + c[i] * hs;
        double r = y[k];
        for (int j = 0; j < i; ++j) r += hs * A[i][j] * K[k][j];
        double m = prob.mass(X);
        double gh = gamma * hs;
        double Yi = i == 0 ? y[k] : Y[k][i - 1];
        bool conv = false;
        for (int it = 0; it < ctl.newton_iters; ++it) {
          double F = m * (Yi - r) - gh * prob.rhs(X, Yi);
          double dF = m - gh * prob.rhs_y(X, Yi);
          if (!(dF > 0.25 * m) || !(dF > 0)) break;
          double d = F / dF;
          Yi -= d;
          if (!std::isfinite(Yi)) break;
          if (std::abs(d) <= 1e-3 * (ctl.atol + ctl.rtol * std::abs(Yi))) {
            conv = true;
            break;
          }
        }
        if (!conv) {
          ok = false;
          break;
        }
        Y[k][i] = Yi;
        K[k][i] = (Yi - r) / gh;
      }
      if (!ok) break;
      double yb = Y[k][4];
      double yh = y[k];
      double q = 0.0;
      for (int i = 0; i < 5; ++i) {
        yh += hs * bhat[i] * K[k][i];
        q += b[i] * Y[k][i];
      }
      double m1 = prob.mass(x + hs);
      double stiff = -gamma * hs * prob.rhs_y(x + hs, yb);
      double filter = m1 > 0 ? m1 / (m1 + std::max(stiff, 0.0)) : 0.0;
      double sc = ctl.atol + ctl.rtol * std::max(std::abs(y[k]), std::abs(yb));
      err = std::max(err, std::abs(yb - yh) * filter / sc);
      ynew[k] = yb;
      uinc[k] = hs * q;
    }

    if (!ok) {
      ++out.rejected;
      h = hs * 0.25;
      if (std::abs(h) < h_min) {
        out.status = StepStatus::underflow;
        out.x = x;
        return out;
      }
      continue;
    }
    double fac = err > 0 ? 0.9 * std::pow(err, -0.25) : 5.0;
    fac = std::clamp(fac, 0.2, 5.0);
    if (err > 1.0) {
      ++out.rejected;
      h = hs * std::min(fac, 0.9);
      if (std::abs(h) < h_min) {
        out.status = StepStatus::underflow;
        out.x = x;
        return out;
      }
      continue;
    }
    ++out.accepted;
    x = hits_target ? target : x + hs;
    for (std::size_t k = 0; k < n; ++k) {
      y[k] = ynew[k];
      integral[k] += uinc[k];
    }
    double hnext = (hits_target ? std::max(std::abs(h), std::abs(hs)) : std::abs(hs)) * fac;
    h = dir * std::min(hnext, ctl.h_max);
    bool landed = hits_target && landing;
    if (landed) ++next_landing;
    bool done = hits_target && !landing;
    if (!on_accept(x, y, integral, landed || done)) {
      out.status = StepStatus::stopped;
      out.x = x;
      return out;
    }
    if (done) {
      out.status = StepStatus::completed;
      out.x = x;
      return out;
    }
  }
}

}  // namespace hjhom
