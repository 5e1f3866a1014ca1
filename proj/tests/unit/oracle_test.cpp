#include "support.hpp"

#include "kato/error.hpp"
#include "kato/oracle.hpp"
#include "kato/products.hpp"
#include "kato/profiles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace kato {
namespace {

TEST(Oracle, PureTransportIsAnExactShift) {
  const Scenario sc = test::preset("TRANSPORT0");
  const auto f = [](double a) { return std::cos(a); };
  const Trajectory tr = solve_direct(sc, test::sampled(sc, f), 0.4);
  ASSERT_EQ(tr.states.size(), 2u);
  EXPECT_DOUBLE_EQ(tr.times.back(), 0.4);
  for (int i = 0; i <= 100; ++i) {
    const double a = sc.age_grid().node(i);
    EXPECT_NEAR(tr.states.back().samples()(0, i), i > 40 ? f(a - 0.4) : 0.0, 1e-14);
  }
}

TEST(Oracle, ImplicitEulerDamping) {
  const Scenario sc = test::preset("MORT1");
  const StateVector phi = make_profile(sc, "ones");
  const Trajectory tr = solve_direct(sc, phi, 0.5, 16);
  const double h = sc.age_grid().step();
  ASSERT_EQ(tr.states.size(), 5u);
  for (std::size_t m = 0; m < tr.states.size(); ++m)
    EXPECT_NEAR(tr.states[m].samples()(0, 128), std::pow(1.0 + h, -16.0 * m), 1e-13);
}

TEST(Oracle, LogGrowthRateOfAnExponential) {
  const Scenario sc = test::preset("SCAL0");
  const StateVector one = make_profile(sc, "ones");
  Trajectory tr;
  for (int k = 0; k <= 10; ++k) {
    tr.times.push_back(0.5 * k);
    tr.states.push_back(std::exp(0.7 * 0.5 * k) * one);
  }
  EXPECT_NEAR(log_growth_rate(tr, 1.0, 4.0), 0.7, 1e-12);
}

TEST(Oracle, EulerLotkaGrowthRate) {
  const Scenario sc = test::preset("SCAL0");
  const Trajectory tr = solve_direct(sc, make_profile(sc, "smooth"), 10.0, 10);
  const double r_star = test::euler_lotka_root(2.0);
  EXPECT_NEAR(log_growth_rate(tr, 8.0, 10.0), r_star, 0.01 * r_star);
  for (const auto& u : tr.states) EXPECT_GE(u.samples().minCoeff(), 0.0);
}

TEST(Oracle, AgreesWithTheEvolutionSystemUnderRefinement) {
  const auto rows = compare(preset_config("SCAL0"), "smooth", 0, 0.5, 3, 1e-6);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].n_age, 2 * rows[0].n_age);
  EXPECT_TRUE(std::isnan(rows[0].order));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(rows[i].discrepancy, rows[i - 1].discrepancy);
    EXPECT_GE(rows[i].order, 0.8);
  }
  EXPECT_THROW(compare(preset_config("SCAL0"), "smooth", 0, 0.5, 1, 1e-6), ContractViolation);
}

TEST(Oracle, ZeroDynamicsAgreeExactly) {
  for (const char* profile : {"smooth", "random"})
    for (const auto& row : compare(preset_config("TRANSPORT0"), profile, 3, 0.5, 3, 1e-6))
      EXPECT_LE(row.discrepancy, 1e-12) << profile << " n_age=" << row.n_age;
}

class OracleMass : public ::testing::TestWithParam<const char*> {};

TEST_P(OracleMass, StaysWithinTheExponentialBound) {
  const Scenario sc = test::preset(GetParam());
  const StabilityConstants c = estimate_constants(sc, 32, 0).inflated(1.05);
  const StateVector phi = make_profile(sc, "smooth");
  const Trajectory tr = solve_direct(sc, phi, sc.horizon() < 1.0 ? sc.horizon() : 1.0, 1);
  for (std::size_t m = 0; m < tr.states.size(); ++m)
    EXPECT_LE(norm_E0(tr.states[m]), c.M0 * std::exp((c.omega0 + c.M0 * c.b_norm0) * tr.times[m]) * norm_E0(phi))
        << "t=" << tr.times[m];
}

INSTANTIATE_TEST_SUITE_P(Presets, OracleMass, ::testing::Values("SCAL0", "SCAL1", "DIFF1", "MORT1"));

}  // namespace
}  // namespace kato
