#include "support.hpp"

#include "kato/error.hpp"
#include "kato/propagator.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <gtest/gtest.h>

#include <cmath>

namespace kato {
namespace {

Scenario mortality(std::vector<double> mu, int n_age, int order = 2) {
  ScenarioConfig c = test::scalar_config(n_age, 1.0, 1);
  c.op.type = "mortality";
  c.op.mu = std::move(mu);
  c.integrator_order = order;
  return build_scenario(c);
}

TEST(Propagator, ConstantMortalityIsExact) {
  const Scenario sc = test::preset("MORT1");
  const Propagator prop(sc, 0.0);
  const double h = sc.age_grid().step();
  for (int j = 0; j <= sc.age_grid().n_age(); j += 7)
    for (int i = 0; i <= j; i += 5)
      EXPECT_NEAR(prop.matrix(i, j)(0, 0), std::exp(-(j - i) * h), 1e-14);
}

TEST(Propagator, LinearMortalityIsExactUnderMidpoint) {
  const Scenario sc = mortality({0.0, 1.0}, 64);
  const Propagator prop(sc, 0.3);
  for (int j = 0; j <= 64; j += 8) {
    const double a = sc.age_grid().node(j);
    EXPECT_NEAR(prop.from_origin(j)(0, 0), std::exp(-0.5 * a * a), 1e-13);
  }
}

double quadratic_mortality_error(int n_age, int order) {
  const Scenario sc = mortality({0.0, 0.0, 3.0}, n_age, order);
  const Propagator prop(sc, 0.0);
  return std::abs(prop.from_origin(n_age)(0, 0) - std::exp(-1.0));
}

TEST(Propagator, ObservedOrders) {
  const double e2 = quadratic_mortality_error(50, 2), e2f = quadratic_mortality_error(100, 2);
  EXPECT_NEAR(std::log2(e2 / e2f), 2.0, 0.1);
  const double e1 = quadratic_mortality_error(50, 1), e1f = quadratic_mortality_error(100, 1);
  EXPECT_NEAR(std::log2(e1 / e1f), 1.0, 0.1);
}

TEST(Propagator, ConstantMatrixMatchesExponential) {
  ScenarioConfig c = test::scalar_config(40, 1.0, 1);
  c.dim = 2;
  c.op.type = "matrix";
  c.op.matrix = {{-1.0, 0.5}, {0.25, -2.0}};
  const Scenario sc = build_scenario(c);
  const Propagator prop(sc, 0.0);
  Matrix a(2, 2);
  a << -1.0, 0.5, 0.25, -2.0;
  for (int j : {1, 13, 40}) {
    const Matrix exact = (sc.age_grid().node(j) * a).exp();
    EXPECT_LT((prop.from_origin(j) - exact).norm(), 1e-12) << j;
  }
}

TEST(Propagator, CocycleAndIdentity) {
  const Scenario sc = test::preset("DIFF1");
  const Vector v0 = Vector::LinSpaced(sc.dim(), 1.0, 2.0);
  EXPECT_LT(cocycle_residual(sc, 0.25, 0.125, 0.5, 0.875, v0), 1e-12);
  const Vector same = propagate(sc, {0.25, 0.5, 0.5, v0});
  EXPECT_EQ((same - v0).norm(), 0.0);
  EXPECT_THROW(propagate(sc, {0.25, 0.75, 0.5, v0}), ContractViolation);
  EXPECT_THROW(propagate(sc, {0.25, 0.1, 0.5, v0}), AlignmentError);
}

TEST(Propagator, CacheReturnsSharedEntries) {
  const Scenario sc = test::preset("SCAL1");
  const auto a = propagator_at(sc, 0.25);
  const auto b = propagator_at(sc, 0.25);
  EXPECT_EQ(a.get(), b.get());
  const auto c = propagator_at(sc, 0.5);
  EXPECT_NE(a.get(), c.get());
  EXPECT_NE(a->from_origin(64)(0, 0), c->from_origin(64)(0, 0));
}

TEST(Propagator, CopiesShareTheCache) {
  const Scenario sc = test::preset("SCAL1");
  const Scenario copy = sc;
  EXPECT_EQ(propagator_at(sc, 0.125).get(), propagator_at(copy, 0.125).get());
}

TEST(EstimateBounds, DecayingScalar) {
  const StabilityConstants c = estimate_bounds(test::preset("MORT1"), 0.0, 8, 1);
  EXPECT_NEAR(c.M, 1.0, 1e-12);
  EXPECT_NEAR(c.varpi, -1.0, 1e-12);
  EXPECT_EQ(c.source, ConstantsSource::estimated);
}

TEST(EstimateBounds, CoversEverySampledPair) {
  const Scenario sc = test::preset("DIFF1");
  const StabilityConstants c = estimate_bounds(sc, 0.5, 16, 2);
  const auto prop = propagator_at(sc, 0.5);
  for (int i = 0; i < 64; i += 9)
    for (int j = i; j <= 64; j += 5)
      EXPECT_LE(operator_norm(prop->matrix(i, j), sc.spatial_norm()),
                c.M * std::exp(c.varpi * (j - i) * sc.age_grid().step()) * (1 + 1e-12));
}

TEST(FitExponentialBound, RateFromLongSpansOnly) {
  const auto [m, rate] = fit_exponential_bound({0.1, 0.5, 1.0}, {3.0, std::exp(0.5), std::exp(1.0)}, 0.5);
  EXPECT_NEAR(rate, 1.0, 1e-14);
  EXPECT_NEAR(m, 3.0 * std::exp(-0.1), 1e-14);
}

}  // namespace
}  // namespace kato
