#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "hjhom/cell.hpp"
#include "hjhom/errors.hpp"
#include "support.hpp"

using namespace hjhom;
using hjhom::testing::sin2_bump;
using hjhom::testing::sin2_power;

namespace {

CellProblem cube_cell(double lo = 0.0, double hi = 1.0) {
  return CellProblem(sample_environment(sin2_power(), 0), {lo, hi});
}

// Reference: fixed-step trapezoidal rule on a(x) f' = lambda - H(x, f), Newton per step.
// Returns samples at every `record` steps; stops early if |f| > M.
struct Reference {
  std::vector<double> x, f;
  bool escaped = false;
  double escape_x = 0.0;
};

Reference trapezoid(const Environment& env, double lambda, double x0, double x1, double f0, double h,
                    int record, double M) {
  Reference r;
  double f = f0, x = x0;
  auto n = static_cast<long>(std::llround((x1 - x0) / h));
  r.x.push_back(x);
  r.f.push_back(f);
  for (long k = 1; k <= n; ++k) {
    double xn = x0 + h * static_cast<double>(k);
    double a0 = env.a(x), a1 = env.a(xn);
    double g0 = lambda - env.H(x, f);
    // 0.5 (a0 + a1) (y - f) = h/2 (g0 + lambda - H(xn, y))
    double y = f;
    for (int it = 0; it < 60; ++it) {
      double F = 0.5 * (a0 + a1) * (y - f) - 0.5 * h * (g0 + lambda - env.H(xn, y));
      double dF = 0.5 * (a0 + a1) + 0.5 * h * env.H_p(xn, y);
      double step = F / dF;
      y -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(y))) break;
    }
    f = y;
    x = xn;
    if (std::abs(f) > M) {
      r.escaped = true;
      r.escape_x = x;
      return r;
    }
    if (k % record == 0) {
      r.x.push_back(x);
      r.f.push_back(f);
    }
  }
  return r;
}

}  // namespace

TEST(Branch, ConstantSolutionForXIndependentH) {
  CellProblem cell = cube_cell();
  auto comps = cell.full_components();
  ASSERT_EQ(comps.size(), 1u);
  BranchResult r = integrate_branch(cell, comps[0], 8.0, Branch::plus);
  ASSERT_TRUE(r.tracked);
  for (const auto& s : r.samples) EXPECT_NEAR(s.f, 2.0, 1e-9) << s.x;
  EXPECT_NEAR(r.integral, 2.0 * comps[0].length(), 1e-9);
  BranchResult m = integrate_branch(cell, comps[0], 8.0, Branch::minus);
  for (const auto& s : m.samples) EXPECT_NEAR(s.f, -2.0, 1e-9) << s.x;
}

TEST(Branch, BumpMatchesFineReference) {
  CellProblem cell(sample_environment(sin2_bump(0.0, 7.0), 0), {0.0, 1.0});
  auto comps = cell.full_components();
  ASSERT_EQ(comps.size(), 1u);
  std::vector<double> grid;
  for (int k = 1; k < 100; ++k) grid.push_back(0.01 * k);
  BranchResult r = integrate_branch(cell, comps[0], 8.0, Branch::plus, grid);
  ASSERT_TRUE(r.tracked);
  ASSERT_EQ(r.samples.size(), grid.size());
  Reference ref = trapezoid(cell.env(), 8.0, 0.0, 1.0, 2.0, 1e-6, 10000, 1e6);
  ASSERT_FALSE(ref.escaped);
  ASSERT_EQ(ref.x.size(), 101u);
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_NEAR(r.samples[k].x, ref.x[k + 1], 1e-12);
    worst = std::max(worst, std::abs(r.samples[k].f - ref.f[k + 1]));
  }
  EXPECT_LE(worst, 1e-4);
  EXPECT_GT(std::abs(r.samples[49].f - 2.0), 0.1);
}

TEST(Branch, BlowsDownInsideBump) {
  CellProblem cell(sample_environment(sin2_bump(0.0, 20.0), 0), {0.0, 1.0});
  auto comps = cell.full_components();
  BranchResult r = integrate_branch(cell, comps[0], 2.0, Branch::plus);
  EXPECT_FALSE(r.tracked);
  EXPECT_GT(r.escape_x, 0.25);
  EXPECT_LT(r.escape_x, 0.75);
  Reference ref = trapezoid(cell.env(), 2.0, 0.0, 1.0, std::cbrt(2.0), 1e-6, 10000, cell.escape_bound(2.0));
  EXPECT_TRUE(ref.escaped);
  EXPECT_NEAR(ref.escape_x, r.escape_x, 0.02);
  FeasibilityReport f = feasibility(cell, 2.0);
  EXPECT_FALSE(f.feasible);
  ASSERT_FALSE(f.components.empty());
  EXPECT_EQ(f.components[0].verdict, ComponentVerdict::blew_down);
}

TEST(Branch, EndpointObstruction) {
  CellProblem cell = cube_cell();
  auto comps = cell.full_components();
  EXPECT_THROW(integrate_branch(cell, comps[0], -0.5, Branch::plus), EndpointObstructedError);
}

TEST(Feasibility, CubeSignOfLambda) {
  CellProblem cell = cube_cell(0.0, 3.0);
  EXPECT_TRUE(feasibility(cell, 0.5).feasible);
  EXPECT_TRUE(feasibility(cell, 1e-4).feasible);
  FeasibilityReport neg = feasibility(cell, -0.1);
  EXPECT_FALSE(neg.feasible);
  EXPECT_FALSE(neg.zero_set_ok);
}

TEST(Feasibility, GrowthConstantsBracketRandomEnvironments) {
  auto spec = hjhom::testing::poisson_shot_noise(10.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Environment env = sample_environment(spec, seed);
    CellProblem cell(env, {0.0, 10.0});
    const auto& H = env.hamiltonian();
    EXPECT_TRUE(feasibility(cell, H.alpha1 + 1.0).feasible) << seed;
    EXPECT_FALSE(feasibility(cell, -1.0 / H.alpha0 - 1.0).feasible) << seed;
  }
}

TEST(CriticalValue, CubeIsZero) {
  CriticalValue cv = critical_value(cube_cell(0.0, 2.0), 1e-8);
  EXPECT_NEAR(cv.lambda0, 0.0, 1e-7);
  EXPECT_LE(cv.hi - cv.lo, 2e-8);
}

// Oracle: the feasibility predicate on a dense lambda grid around max V.
TEST(CriticalValue, MaxPotentialOnZeroSet) {
  CellProblem cell(sample_environment(sin2_bump(1.0, -0.5), 0), {0.0, 2.0});
  CriticalValue cv = critical_value(cell, 1e-7);
  EXPECT_NEAR(cv.lambda0, 1.0, 1e-6);
  EXPECT_NEAR(cv.zero_set_sup, 1.0, 1e-12);
  for (int k = 1; k <= 10; ++k) {
    EXPECT_TRUE(feasibility(cell, 1.0 + 0.01 * k).feasible) << k;
    EXPECT_FALSE(feasibility(cell, 1.0 - 0.01 * k).feasible) << k;
  }
}

TEST(Corrector, ConstantProfilesForXIndependentH) {
  CellProblem cell = cube_cell(0.0, 2.0);
  CorrectorProfile p = build_corrector(cell, 1.0, Branch::plus, 1e-2);
  CorrectorProfile m = build_corrector(cell, 1.0, Branch::minus, 1e-2);
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    EXPECT_NEAR(p.f[i], 1.0, 1e-9);
    EXPECT_NEAR(m.f[i], -1.0, 1e-9);
  }
  EXPECT_NEAR(p.theta(), 1.0, 1e-9);
  EXPECT_NEAR(residual(cell.env(), p), 0.0, 1e-6);
  EXPECT_NEAR(residual(cell.env(), p, 1.3), 0.3, 1e-6);
}

TEST(Corrector, ResidualIsFirstOrderOrBetter) {
  CellProblem cell(sample_environment(sin2_bump(0.0, 1.0), 0), {0.0, 2.0});
  double lambda = critical_value(cell).lambda0 + 1.0;
  double prev = 0.0;
  for (double dx : {4e-3, 2e-3, 1e-3}) {
    CorrectorProfile p = build_corrector(cell, lambda, Branch::plus, dx);
    double r = residual(cell.env(), p);
    EXPECT_LE(r, 5.0 * dx) << dx;
    if (prev > 0) EXPECT_LT(r, prev);
    prev = r;
  }
  CorrectorProfile p = build_corrector(cell, lambda, Branch::plus, 1e-3);
  EXPECT_NEAR(residual(cell.env(), p, lambda + 0.25), 0.25, 5e-3);
}

TEST(Corrector, ZeroSetValuesOrderingAndCoercivity) {
  Environment env = sample_environment(sin2_bump(0.0, 1.0), 0);
  CellProblem cell(env, {0.0, 2.0});
  double l0 = critical_value(cell).lambda0;
  std::vector<double> levels = {l0 + 0.2, l0 + 1.0, l0 + 3.0};
  std::vector<CorrectorProfile> plus, minus;
  for (double l : levels) {
    plus.push_back(build_corrector(cell, l, Branch::plus, 2e-3));
    minus.push_back(build_corrector(cell, l, Branch::minus, 2e-3));
  }
  for (std::size_t k = 0; k < levels.size(); ++k)
    for (std::size_t i = 0; i < plus[k].x.size(); ++i) {
      if (plus[k].provenance[i] == Provenance::zero_set) {
        EXPECT_NEAR(plus[k].f[i], cell.p_lambda(plus[k].x[i], levels[k], Branch::plus), 1e-6);
        EXPECT_NEAR(minus[k].f[i], cell.p_lambda(minus[k].x[i], levels[k], Branch::minus), 1e-6);
      }
      EXPECT_LT(minus[k].f[i], plus[k].f[i]);
      if (k > 0) {
        EXPECT_GT(plus[k].f[i], plus[k - 1].f[i] - 1e-8);
        EXPECT_LT(minus[k].f[i], minus[k - 1].f[i] + 1e-8);
      }
    }
  // lambda_R = sup H(x, R) = R^3 + max V for R = 1.5
  double lambda_R = 1.5 * 1.5 * 1.5 + 1.0;
  CorrectorProfile big = build_corrector(cell, lambda_R + 0.5, Branch::plus, 5e-3);
  CorrectorProfile bigm = build_corrector(cell, lambda_R + 0.5, Branch::minus, 5e-3);
  for (std::size_t i = 0; i < big.x.size(); ++i) {
    EXPECT_GT(big.f[i], 1.5);
    EXPECT_LT(bigm.f[i], -1.5);
  }
}

TEST(Corrector, ContinuousInLambda) {
  CellProblem cell(sample_environment(sin2_bump(0.0, 1.0), 0), {0.0, 1.0});
  double l0 = critical_value(cell).lambda0;
  CorrectorProfile ref = build_corrector(cell, l0 + 1.0, Branch::plus, 5e-3);
  double prev = 1e300;
  for (double d : {1e-1, 1e-2, 1e-3, 1e-4}) {
    CorrectorProfile p = build_corrector(cell, l0 + 1.0 + d, Branch::plus, 5e-3);
    double gap = 0.0;
    for (std::size_t i = 0; i < p.x.size(); ++i) gap = std::max(gap, std::abs(p.f[i] - ref.f[i]));
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Corrector, CsvHeader) {
  CorrectorProfile p = build_corrector(cube_cell(), 1.0, Branch::plus, 0.1);
  std::ostringstream os;
  p.write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "x,f,u,provenance");
}

TEST(Merge, NearbyStartsMergeBeforeMidpoint) {
  EnvironmentSpec s = sin2_power();
  s.hamiltonian.linear = 0.5;
  CellProblem cell(sample_environment(s, 0), {0.0, 1.0});
  auto J = cell.full_components()[0];
  double lambda = 1.0, y = 0.005;
  double f0 = cell.p_lambda(y, lambda, Branch::plus);
  MergeReport r = gronwall_merge_check(cell, J, lambda, y, f0 + 1e-3, f0 + 2e-3, 1e-9);
  EXPECT_TRUE(r.bound_respected);
  EXPECT_TRUE(r.divergence_confirmed);
  ASSERT_FALSE(std::isnan(r.merge_x));
  EXPECT_LT(r.merge_x, 0.5);
  EXPECT_LT(r.final_gap, 1e-9);

  MergeReport same = gronwall_merge_check(cell, J, lambda, y, f0 + 1e-3, f0 + 1e-3, 1e-9);
  for (const auto& smp : same.samples) EXPECT_EQ(smp.gap, 0.0);
}

TEST(Merge, DoubledEtaBoundStillDominates) {
  EnvironmentSpec s = sin2_power();
  s.hamiltonian.linear = 0.5;
  CellProblem cell(sample_environment(s, 0), {0.0, 1.0});
  auto J = cell.full_components()[0];
  double y = 0.05, lambda = 1.0;
  MergeReport r1 = gronwall_merge_check(cell, J, lambda, y, 2.0, 2.001, 0.0);
  MergeReport r2 = gronwall_merge_check(cell, J, lambda, y, 2.0, 2.001, 0.0, 2.0 * r1.eta);
  EXPECT_DOUBLE_EQ(r1.eta, 0.5);
  EXPECT_TRUE(r1.bound_respected);
  EXPECT_TRUE(r2.bound_respected);
  ASSERT_EQ(r1.samples.size(), r2.samples.size());
  for (std::size_t k = 0; k < r1.samples.size(); ++k) {
    EXPECT_EQ(r1.samples[k].gap, r2.samples[k].gap);
    EXPECT_LE(r2.samples[k].bound, r1.samples[k].bound);
    if (k > 0 && r1.samples[k].bound > 1e-12) EXPECT_LT(r2.samples[k].bound, r1.samples[k].bound);
  }
}

TEST(Bridge, CubeJumpsAtZero) {
  CellProblem cell = cube_cell(0.0, 2.0);
  CorrectorProfile m = build_corrector(cell, 1.0, Branch::minus, 1e-2);
  CorrectorProfile p = build_corrector(cell, 1.0, Branch::plus, 1e-2);
  BridgeReport r = bridge_supersolution(cell.env(), m, p, 1.0, 1e-6);
  EXPECT_TRUE(r.passed) << r.worst << " at " << r.worst_x;
  EXPECT_NEAR(r.x0, 1.0, 1e-12);
  EXPECT_NEAR(r.w_prime.front(), -1.0, 1e-9);
  EXPECT_NEAR(r.w_prime.back(), 1.0, 1e-9);
  EXPECT_LE(cell.env().H(1.0, 0.0), 1.0);
}

TEST(Bridge, PeriodicEnvironmentPasses) {
  CellProblem cell(sample_environment(sin2_bump(0.0, 1.0), 0), {0.0, 2.0});
  double lambda = critical_value(cell).lambda0 + 0.5, dx = 1e-3;
  CorrectorProfile m = build_corrector(cell, lambda, Branch::minus, dx);
  CorrectorProfile p = build_corrector(cell, lambda, Branch::plus, dx);
  BridgeReport r = bridge_supersolution(cell.env(), m, p, 1.0, 2.0 * dx);
  EXPECT_TRUE(r.passed) << r.worst << " at " << r.worst_x;
}
