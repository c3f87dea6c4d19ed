#include <gtest/gtest.h>

#include <cmath>

#include "hjhom/errors.hpp"
#include "hjhom/hamlib.hpp"
#include "support.hpp"

using namespace hjhom;

namespace {

HamiltonianField custom(std::function<double(double, double)> f, double gamma, double a0 = 1.0,
                        double a1 = 1.0) {
  HamiltonianField h;
  h.model = make_hamiltonian_model(std::move(f));
  h.gamma = gamma;
  h.alpha0 = a0;
  h.alpha1 = a1;
  return h;
}

double pinned_V(double x) { return 0.3 + 0.2 * std::sin(2.0 * std::numbers::pi * x); }

HamiltonianField pinned() {
  return custom([](double x, double p) { return 0.5 * p * p - std::abs(p) + pinned_V(x); }, 2.0, 0.25, 1.5);
}

HamiltonianField flat_bottom() {
  return custom([](double, double p) { return std::pow(std::max(std::abs(p) - 1.0, 0.0), 3); }, 3.0, 0.05, 8.0);
}

}  // namespace

TEST(MinProfile, CubeIsCentred) {
  auto h = custom([](double, double p) { return std::pow(std::abs(p), 3); }, 3.0);
  for (double x : {-2.0, 0.0, 0.37}) {
    MinPoint m = min_profile(h, x);
    EXPECT_NEAR(m.lambda_hat, 0.0, 1e-12);
    EXPECT_NEAR(m.p_hat, 0.0, 1e-4);
  }
}

// Oracle: dense p-scan of the closed-form minimum V - 1/2 at p = +-1.
TEST(MinProfile, PinnedTieMatchesDenseScan) {
  HamiltonianField h = pinned();
  for (double x : {0.0, 0.2, 0.71}) {
    MinPoint m = min_profile(h, x);
    double scan = 1e300;
    for (int i = -40000; i <= 40000; ++i) scan = std::min(scan, h(x, 1e-4 * i));
    EXPECT_NEAR(m.lambda_hat, pinned_V(x) - 0.5, 1e-9);
    EXPECT_NEAR(m.lambda_hat, scan, 1e-8);
    EXPECT_NEAR(std::abs(m.p_hat), 1.0, 1e-4);
  }
}

TEST(MinProfile, ShiftedQuartic) {
  auto h = custom([](double, double p) { return std::pow(p - 1.0, 4) + 2.0; }, 4.0, 0.5, 4.0);
  MinPoint m = min_profile(h, 0.4);
  EXPECT_NEAR(m.lambda_hat, 2.0, 1e-12);
  EXPECT_NEAR(m.p_hat, 1.0, 1e-3);
}

TEST(MinProfile, FlatBottomReturnsMidpoint) {
  MinPoint m = min_profile(flat_bottom(), 0.0);
  EXPECT_NEAR(m.lambda_hat, 0.0, 1e-14);
  EXPECT_NEAR(m.p_hat, 0.0, 1e-6);
}

TEST(Sublevel, CubeEndpoints) {
  auto h = custom([](double, double p) { return std::pow(std::abs(p), 3); }, 3.0);
  auto e = sublevel_endpoints(h, 0.0, 8.0);
  EXPECT_NEAR(e.p_minus, -2.0, 1e-10);
  EXPECT_NEAR(e.p_plus, 2.0, 1e-10);
  auto z = sublevel_endpoints(h, 0.0, 0.0);
  EXPECT_NEAR(z.p_minus, 0.0, 1e-4);
  EXPECT_NEAR(z.p_plus, 0.0, 1e-4);
  EXPECT_THROW(sublevel_endpoints(h, 0.0, -0.1), EmptySublevelError);
}

TEST(Sublevel, PinnedZeroLevel) {
  auto h = custom([](double, double p) { return 0.5 * p * p - std::abs(p); }, 2.0, 0.25, 1.5);
  auto e = sublevel_endpoints(h, 0.0, 0.0);
  EXPECT_NEAR(e.p_minus, -2.0, 1e-10);
  EXPECT_NEAR(e.p_plus, 2.0, 1e-10);
  // dense scan: the sublevel set is [-2, 2]
  for (int i = -300; i <= 300; ++i) {
    double p = 0.01 * i;
    EXPECT_EQ(h(0.0, p) <= 1e-12, std::abs(p) <= 2.0 + 1e-12) << p;
  }
}

TEST(Sublevel, IntervalPropertyAndMonotoneInLevel) {
  auto spec = hjhom::testing::poisson_shot_noise();
  Environment env = sample_environment(spec, 4);
  const auto& H = env.hamiltonian();
  for (int i = 0; i < 25; ++i) {
    double x = 0.4 * i;
    MinPoint m = min_profile(H, x);
    double prev_minus = m.p_hat, prev_plus = m.p_hat;
    for (double d : {0.01, 0.1, 0.5, 2.0}) {
      double lv = m.lambda_hat + d;
      auto e = sublevel_endpoints(H, x, lv);
      EXPECT_NEAR(H(x, e.p_minus), lv, 1e-9);
      EXPECT_NEAR(H(x, e.p_plus), lv, 1e-9);
      EXPECT_LE(e.p_minus, m.p_hat);
      EXPECT_GE(e.p_plus, m.p_hat);
      EXPECT_LT(e.p_minus, prev_minus);
      EXPECT_GT(e.p_plus, prev_plus);
      prev_minus = e.p_minus;
      prev_plus = e.p_plus;
      for (int k = 0; k <= 40; ++k) {
        double p = e.p_minus - 1.0 + (e.p_plus - e.p_minus + 2.0) * k / 40.0;
        bool inside = p >= e.p_minus - 1e-9 && p <= e.p_plus + 1e-9;
        if (inside) EXPECT_LE(H(x, p), lv + 1e-9);
        else EXPECT_GT(H(x, p), lv);
      }
    }
  }
}

TEST(Radii, HatRadiusContainsMinimisers) {
  auto spec = hjhom::testing::poisson_shot_noise();
  Environment env = sample_environment(spec, 9);
  const auto& H = env.hamiltonian();
  double R = hat_radius(H.alpha0, H.alpha1, H.gamma);
  for (int i = 0; i < 50; ++i) {
    MinPoint m = min_profile(H, 0.2 * i);
    EXPECT_LE(std::abs(m.p_hat), R);
    EXPECT_GE(m.lambda_hat, -1.0 / H.alpha0);
    EXPECT_LE(m.lambda_hat, H.alpha1);
  }
  EXPECT_NEAR(sublevel_radius(1.0, 3.0, 7.0), 2.0, 1e-12);
}

TEST(Strictify, PowerDistanceBound) {
  Environment env = sample_environment(hjhom::testing::sin2_power(), 0);
  const auto& H = env.hamiltonian();
  HamiltonianField H10 = strictify(H, 10);
  EXPECT_EQ(H10.form, HamiltonianForm::strictified);
  EXPECT_EQ(H10.gamma, 4.0);
  double R_hat = hat_radius(H.alpha0, H.alpha1, H.gamma);
  double eta = strictify_eta(10, H.alpha0, H.alpha1, H.gamma);
  EXPECT_NEAR(H10.eta, eta, 1e-15);
  double bound = strictify_distance_bound(H, 10, 2.0);
  double D = 2.0 + R_hat;
  EXPECT_NEAR(bound, 0.2 + eta * (std::pow(D, 4) + D), 1e-14);
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 800; ++j) {
      double x = 0.01 * i, p = -2.0 + 0.005 * j;
      worst = std::max(worst, std::abs(H(x, p) - H10(x, p)));
    }
  EXPECT_LE(worst, bound);
  EXPECT_GT(worst, 0.0);
}

TEST(Strictify, FlatBottomGetsUniqueMinimiserAndSlopes) {
  HamiltonianField H = flat_bottom();
  for (int n : {5, 20}) {
    HamiltonianField Hn = strictify(H, n);
    for (double x : {0.0, 0.3, 0.8}) {
      double ph = strictify_selection(Hn, x);
      EXPECT_GE(ph, -1.0);
      EXPECT_LE(ph, 1.0);
      MinPoint m = min_profile(Hn, x, 1e-12);
      EXPECT_NEAR(m.p_hat, ph, 1e-5);
      // one-sided slopes at least eta_n away from the minimiser
      for (int k = 0; k < 200; ++k) {
        double d1 = 0.02 * k + 1e-3, d2 = d1 + 0.01;
        EXPECT_GE(Hn(x, ph + d2) - Hn(x, ph + d1), Hn.eta * 0.01 * (1 - 1e-9));
        EXPECT_GE(Hn(x, ph - d2) - Hn(x, ph - d1), Hn.eta * 0.01 * (1 - 1e-9));
      }
    }
  }
}

TEST(Strictify, DistanceShrinksWithN) {
  HamiltonianField H = flat_bottom();
  double prev = 1e300;
  for (int n : {5, 10, 20, 40, 80}) {
    HamiltonianField Hn = strictify(H, n);
    double worst = 0.0;
    for (int j = 0; j <= 600; ++j) {
      double p = -3.0 + 0.01 * j;
      worst = std::max(worst, std::abs(H(0.25, p) - Hn(0.25, p)));
    }
    EXPECT_LE(worst, strictify_distance_bound(H, n, 3.0));
    EXPECT_LT(worst, prev);
    prev = worst;
  }
  EXPECT_LT(prev, 0.03);
}

TEST(Strictify, PassesSqCValidator) {
  EnvironmentSpec s = hjhom::testing::sin2_power();
  s.hamiltonian.family = "flat-bottom";
  Environment env = sample_environment(s, 0);
  Environment en = env.with_hamiltonian(strictify(env.hamiltonian(), 10));
  ValidationReport r = validate_environment(en, {0.0, 1.0, 201, 4.0, 201});
  EXPECT_TRUE(r.get("sqC").applicable);
  EXPECT_TRUE(r.get("sqC").passed) << r.to_text();
  EXPECT_TRUE(r.get("qC").passed) << r.to_text();
}

TEST(Bounds, LipschitzPlugIn) {
  EXPECT_NEAR(lipschitz_bound(1, 1, 3, 1, 1, 1), std::sqrt(3.0) + std::cbrt(2.0), 1e-14);
  EXPECT_NEAR(lipschitz_bound(1, 1, 3, 1, 1, 1), 2.992, 1e-3);
  double prev = 0.0;
  for (double l = -0.5; l < 10; l += 0.5) {
    double k = lipschitz_bound(1, 1, 3, 1, l, 1);
    EXPECT_GE(k, prev);
    prev = k;
  }
  EXPECT_NEAR(lipschitz_bound(1, 1, 3, 0, 1, 1), std::cbrt(2.0), 1e-14);
  EXPECT_NEAR(lipschitz_bound(1, 1, 3, 1, 1), 10 * lipschitz_bound(1, 1, 3, 1, 1, 1), 1e-12);
}

TEST(Bounds, HolderPlugIn) {
  EXPECT_NEAR(holder_bound(1, 3, 0, 1).exponent, 0.5, 1e-15);
  EXPECT_GT(holder_bound(1, 1e6, 0, 1).exponent, 0.999);
  HolderBound b = holder_bound(1, 4, 0, 1);
  EXPECT_NEAR(b.K, 2.0, 1e-14);
  EXPECT_NEAR(b.exponent, 2.0 / 3.0, 1e-15);
  EXPECT_THROW(holder_bound(1, 2, 0, 1), UnsupportedError);
  EXPECT_THROW(holder_bound(1, 1.5, 0, 1), UnsupportedError);
}
