#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hjhom/environment.hpp"
#include "hjhom/errors.hpp"
#include "hjhom/kvconfig.hpp"
#include "support.hpp"

using namespace hjhom;
using hjhom::testing::sin2_power;

TEST(Environment, Sin2PowerIsPeriodicWithZerosAtIntegers) {
  Environment env = sample_environment(sin2_power(), 0);
  EXPECT_EQ(env.kind(), EnvironmentKind::periodic);
  EXPECT_NEAR(env.kappa(), std::numbers::pi, 1e-12);
  EXPECT_DOUBLE_EQ(env.period(), 1.0);
  for (int k = -3; k <= 3; ++k) EXPECT_LT(env.a(k), 1e-28) << k;
  EXPECT_NEAR(env.a(0.5), 1.0, 1e-14);
  EXPECT_NEAR(env.H(0.3, 2.0), 8.0, 1e-12);
  EXPECT_NEAR(env.H(0.3, -2.0), 8.0, 1e-12);
}

TEST(Environment, PoissonPinnedFamilyIsRandomWithUnitKappa) {
  EnvironmentSpec s;
  s.diffusion.family = "poisson";
  s.diffusion.intensity = 1.0;
  s.diffusion.slope = 1.0;
  s.hamiltonian.family = "pinned";
  s.hamiltonian.coefficient = 0.5;
  s.hamiltonian.linear = 1.0;
  s.hamiltonian.potential.family = "shot-noise";
  s.hamiltonian.potential.amplitude = 0.3;
  s.hamiltonian.potential.intensity = 1.0;
  s.hamiltonian.potential.width = 0.2;
  Environment env = sample_environment(s, 7);
  EXPECT_EQ(env.kind(), EnvironmentKind::random_stationary);
  EXPECT_DOUBLE_EQ(env.kappa(), 1.0);
  EXPECT_EQ(env.seed(), 7u);
  for (int i = 0; i < 2000; ++i) {
    double x = 0.05 * i;
    EXPECT_LE(env.sqrt_a(x), 1.0);
    EXPECT_GE(env.sqrt_a(x), 0.0);
  }
}

TEST(Environment, ConstantDiffusionViolatesA1) {
  EnvironmentSpec s = sin2_power();
  s.diffusion.family = "constant";
  s.diffusion.level = 0.25;
  try {
    sample_environment(s, 0);
    FAIL() << "constant diffusion accepted";
  } catch (const HypothesisError& e) {
    EXPECT_EQ(e.hypothesis(), "A1");
  }
}

TEST(Environment, InvalidConstantsNameTheHypothesis) {
  EnvironmentSpec s = sin2_power(0.8);
  EXPECT_THROW(sample_environment(s, 0), HypothesisError);
  s = sin2_power();
  s.hamiltonian.alpha0 = -1.0;
  EXPECT_THROW(sample_environment(s, 0), Error);
}

TEST(Environment, SameSeedIsBitIdentical) {
  auto spec = hjhom::testing::poisson_shot_noise();
  Environment e1 = sample_environment(spec, 11), e2 = sample_environment(spec, 11),
              e3 = sample_environment(spec, 12);
  bool differs = false;
  for (int i = 0; i < 3000; ++i) {
    double x = -50.0 + 0.0371 * i;
    EXPECT_EQ(e1.a(x), e2.a(x));
    EXPECT_EQ(e1.H(x, 0.7), e2.H(x, 0.7));
    differs = differs || e1.a(x) != e3.a(x);
  }
  EXPECT_TRUE(differs);
}

TEST(Environment, HashedUniformIsStatelessAndInUnitInterval) {
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = hashed_uniform(3, 1, i, 0);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    EXPECT_EQ(u, hashed_uniform(3, 1, i, 0));
    sum += u;
  }
  EXPECT_NEAR(sum / 10000, 0.5, 0.02);
  EXPECT_NE(hashed_uniform(3, 1, 5, 0), hashed_uniform(3, 2, 5, 0));
}

TEST(Validation, PowerSin2AllPass) {
  Environment env = sample_environment(sin2_power(), 0);
  ValidationReport r = validate_environment(env, {});
  EXPECT_TRUE(r.all_passed()) << r.to_text();
  for (const char* name : {"A1", "A2", "H1", "H2", "H3", "qC"}) EXPECT_TRUE(r.get(name).passed) << name;
}

TEST(Validation, DoubleWellFailsQuasiconvexityNearZero) {
  EnvironmentSpec s = sin2_power();
  s.hamiltonian.family = "double-well";
  Environment env = sample_environment(s, 0);
  ValidationReport r = validate_environment(env, {});
  const HypothesisCheck& qc = r.get("qC");
  EXPECT_FALSE(qc.passed);
  EXPECT_LT(std::abs(qc.witness_p), 0.5) << r.to_text();
}

TEST(Validation, JumpInSqrtAFailsA2AtTheJump) {
  DiffusionField d;
  d.model = make_diffusion_model([](double x) {
    double y = x - std::floor(x);
    return y < 0.6 ? std::min(y, 0.3) : 1.0 - y;
  });
  d.kappa = 1.0;
  HamiltonianField h;
  h.model = make_hamiltonian_model([](double, double p) { return std::pow(std::abs(p), 3); });
  h.gamma = 3.0;
  Environment env(d, h, 0, EnvironmentKind::periodic);
  ValidationReport r = validate_environment(env, {});
  const HypothesisCheck& a2 = r.get("A2");
  EXPECT_FALSE(a2.passed);
  EXPECT_NEAR(a2.witness_x, 0.6, 2e-3);
  EXPECT_TRUE(r.get("A1").passed);
}

TEST(Validation, EstimatedConstantsSatisfyGrowthBounds) {
  auto spec = hjhom::testing::poisson_shot_noise();
  Environment env = sample_environment(spec, 2);
  const auto& H = env.hamiltonian();
  for (int i = 0; i <= 200; ++i) {
    double x = 0.05 * i;
    for (int j = -40; j <= 40; ++j) {
      double p = 0.1 * j, g = std::pow(std::abs(p), H.gamma);
      EXPECT_GE(H(x, p), H.alpha0 * g - 1.0 / H.alpha0 - 1e-9);
      EXPECT_LE(H(x, p), H.alpha1 * (g + 1.0) + 1e-9);
    }
  }
}

TEST(Shift, Identities) {
  auto spec = hjhom::testing::poisson_shot_noise();
  Environment env = sample_environment(spec, 5);
  Environment s0 = shift(env, 0.0), s15 = shift(env, 1.5);
  Environment comp = shift(shift(env, 0.75), 0.75);
  EXPECT_EQ(s15.a(0.0), env.a(1.5));
  EXPECT_EQ(s15.H(0.0, 0.3), env.H(1.5, 0.3));
  for (int i = 0; i < 500; ++i) {
    double x = -5.0 + 0.021 * i;
    EXPECT_EQ(s0.a(x), env.a(x));
    EXPECT_EQ(s0.H(x, -1.1), env.H(x, -1.1));
    EXPECT_EQ(comp.a(x), s15.a(x));
    EXPECT_EQ(comp.H(x, 0.4), s15.H(x, 0.4));
  }
  Environment per = sample_environment(sin2_power(), 0);
  Environment sp = shift(per, per.period());
  for (int i = 0; i < 500; ++i) {
    double x = -2.0 + 0.0093 * i;
    EXPECT_NEAR(sp.a(x), per.a(x), 1e-13);
    EXPECT_NEAR(sp.H(x, 1.3), per.H(x, 1.3), 1e-13);
  }
}

TEST(Shift, PeriodizeRepeatsTheWindow) {
  auto spec = hjhom::testing::poisson_shot_noise();
  Environment env = sample_environment(spec, 3);
  Environment p = periodize(env, 2.0, 9.0);
  for (int i = 0; i < 100; ++i) {
    double x = 2.0 + 0.07 * i;
    EXPECT_NEAR(p.a(x + 7.0), env.a(x), 1e-12);
    EXPECT_NEAR(p.H(x - 14.0, 0.5), env.H(x, 0.5), 1e-12);
  }
}

TEST(Decompose, Sin2ThreePeriods) {
  Environment env = sample_environment(sin2_power(), 0);
  ComponentDecomposition d = decompose_components(env, {0.0, 3.0}, 1e-12);
  ASSERT_EQ(d.components.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(d.components[k].lo, k, 1e-5);
    EXPECT_NEAR(d.components[k].hi, k + 1, 1e-5);
    EXPECT_TRUE(d.components[k].full());
  }
  EXPECT_EQ(d.zero_set.size(), 4u);
  EXPECT_NEAR(d.trimmed().lo, 0.0, 1e-5);
  EXPECT_NEAR(d.trimmed().hi, 3.0, 1e-5);
}

TEST(Decompose, ParabolaSingleZero) {
  EnvironmentSpec s = sin2_power();
  s.diffusion.family = "tent";
  s.diffusion.period = 2.0;
  s.diffusion.slope = 1.0;
  s.diffusion.center = 0.0;
  Environment env = sample_environment(s, 0);
  EXPECT_NEAR(env.a(0.5), 0.25, 1e-14);
  EXPECT_NEAR(env.a(-0.7), 0.49, 1e-14);
  ComponentDecomposition d = decompose_components(env, {-1.0, 1.0});
  ASSERT_EQ(d.components.size(), 2u);
  EXPECT_NEAR(d.components[0].lo, -1.0, 1e-12);
  EXPECT_NEAR(d.components[0].hi, 0.0, 1e-4);
  EXPECT_NEAR(d.components[1].lo, 0.0, 1e-4);
  EXPECT_NEAR(d.components[1].hi, 1.0, 1e-12);
  EXPECT_EQ(d.components[0].lo_kind, EndpointKind::window_cut);
  EXPECT_EQ(d.components[0].hi_kind, EndpointKind::zero);
  EXPECT_EQ(d.components[1].hi_kind, EndpointKind::window_cut);
  ASSERT_EQ(d.zero_set.size(), 1u);
}

TEST(Decompose, NoZeroIsFlagged) {
  Environment env = sample_environment(sin2_power(), 0);
  ComponentDecomposition d = decompose_components(env, {0.2, 0.8});
  EXPECT_FALSE(d.has_zero());
  ASSERT_EQ(d.components.size(), 1u);
  EXPECT_FALSE(d.components[0].full());
}

// Oracle: dense scan at ten times the decomposition resolution; isolated zeros of
// sqrt(a) = slope * dist show up as grid-local minima of sqrt(a) below slope * step.
TEST(Decompose, RandomFieldMatchesDenseScan) {
  EnvironmentSpec s;
  s.diffusion.family = "poisson";
  s.diffusion.intensity = 1.0;
  s.diffusion.slope = 1.0;
  s.hamiltonian.family = "power";
  Environment env = sample_environment(s, 7);
  const double lo = 0.0, hi = 100.0, h = 1e-3;
  ComponentDecomposition d = decompose_components(env, {lo, hi}, 1e-10, 1e-2);

  std::vector<double> zeros;
  auto n = static_cast<std::size_t>((hi - lo) / h);
  for (std::size_t i = 1; i < n; ++i) {
    double x = lo + h * static_cast<double>(i);
    double s0 = env.sqrt_a(x);
    if (s0 <= env.sqrt_a(x - h) && s0 < env.sqrt_a(x + h) && s0 < h) zeros.push_back(x);
  }
  ASSERT_GT(zeros.size(), 50u);
  ASSERT_EQ(d.zero_set.size(), zeros.size());
  for (std::size_t k = 0; k < zeros.size(); ++k)
    EXPECT_NEAR(0.5 * (d.zero_set[k].lo + d.zero_set[k].hi), zeros[k], h);
  ASSERT_EQ(d.components.size(), zeros.size() + 1);
  for (std::size_t k = 0; k + 1 < d.components.size(); ++k) {
    EXPECT_LT(d.components[k].hi, d.components[k + 1].lo);
    EXPECT_NEAR(d.components[k].hi, zeros[k], h);
  }
}

TEST(Config, ParsesSchemaAndRejectsMalformedInput) {
  auto c = KeyValueConfig::parse("schema = hjhom-config/1\n# note\nb = 2\na = 1, 2.5\n");
  EXPECT_EQ(c.get_double("b", 0), 2.0);
  EXPECT_EQ(c.get_doubles("a", {}), (std::vector<double>{1.0, 2.5}));
  EXPECT_EQ(c.get_double("missing", 4.0), 4.0);
  EXPECT_THROW(KeyValueConfig::parse("a = 1\n"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse("schema = hjhom-config/1\na = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(c.get_double("a", 0), ConfigError);
  auto d = KeyValueConfig::parse("schema = hjhom-config/1\na = 1, 2.5\nb = 2\n");
  EXPECT_EQ(c.canonical(), d.canonical());
  EXPECT_EQ(c.hash(), d.hash());
}

TEST(Config, EnvironmentSpecFromText) {
  auto c = KeyValueConfig::parse(
      "schema = hjhom-config/1\ndiffusion.family = tent\ndiffusion.period = 2\nhamiltonian.gamma = 4\n"
      "potential.family = cosine\npotential.amplitude = 0.5\n");
  EnvironmentSpec s = parse_environment_spec(c);
  EXPECT_EQ(s.diffusion.family, "tent");
  EXPECT_EQ(s.diffusion.period, 2.0);
  EXPECT_EQ(s.hamiltonian.gamma, 4.0);
  EXPECT_EQ(s.hamiltonian.potential.family, "cosine");
  EXPECT_EQ(s.hamiltonian.potential.period, 2.0);
}
