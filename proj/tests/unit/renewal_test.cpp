#include "support.hpp"

#include "kato/error.hpp"
#include "kato/profiles.hpp"
#include "kato/renewal.hpp"
#include "kato/semigroup.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace kato {
namespace {

// b ≡ 2, A ≡ 0 on [0, 1] with the compatible datum φ(a) = 1 − a (φ(0) = 2∫φ):
// B' = 2B − 2s with B(0) = 1, so B(s) = s + (1 + e^{2s})/2 for s ≤ 1.
double exact_birth(double s) { return s + 0.5 * (1.0 + std::exp(2.0 * s)); }

BirthTrajectory compatible_birth(int n_age) {
  ScenarioConfig c = preset_config("SCAL0");
  c.n_age = n_age;
  const Scenario sc = build_scenario(c);
  return solve_birth(sc, 0.0, test::sampled(sc, [](double a) { return 1.0 - a; }), 1.0);
}

TEST(Renewal, ClosedFormForConstantKernel) {
  const BirthTrajectory b = compatible_birth(100);
  ASSERT_EQ(b.size(), 101);
  for (int k : {0, 25, 50, 100}) {
    const double exact = exact_birth(b.s(k));
    EXPECT_NEAR(b.at(k)(0), exact, 1e-4 * exact) << "s = " << b.s(k);
  }
}

TEST(Renewal, IncompatibleDataLoseAnOrder) {
  // φ ≡ 1 has φ(0) ≠ 2∫φ, so the profile jumps at a = s and the trapezoid
  // rule is first order; B(s) = 1 + e^{2s}.
  auto error = [](int n_age) {
    ScenarioConfig c = preset_config("SCAL0");
    c.n_age = n_age;
    const Scenario sc = build_scenario(c);
    const BirthTrajectory b = solve_birth(sc, 0.0, make_profile(sc, "ones"), 1.0);
    return std::abs(b.at(n_age)(0) - (1.0 + std::exp(2.0)));
  };
  EXPECT_NEAR(std::log2(error(50) / error(100)), 1.0, 0.1);
}

TEST(Renewal, TrapezoidErrorIsSecondOrder) {
  auto error = [](int n_age) { return std::abs(compatible_birth(n_age).values.back()(0) - exact_birth(1.0)); };
  EXPECT_NEAR(std::log2(error(50) / error(100)), 2.0, 0.1);
}

TEST(Renewal, VolterraIdentityHoldsOnTheGrid) {
  for (const char* name : {"SCAL0", "SCAL1", "DIFF1", "MORT1"}) {
    const Scenario sc = test::preset(name);
    const StateVector phi = make_profile(sc, "random", 4);
    for (double s : {0.0, 0.25, 0.5, 1.0, 1.5, 2.5})
      EXPECT_LE(birth_identity_residual(sc, 0.5, phi, s), 1e-8) << name << " s = " << s;
  }
}

TEST(Renewal, ZeroKernelGivesNoBirths) {
  const Scenario sc = test::preset("TRANSPORT0");
  const BirthTrajectory b = solve_birth(sc, 0.0, make_profile(sc, "smooth"), 2.0);
  for (const auto& v : b.values) EXPECT_EQ(v.norm(), 0.0);
}

TEST(Renewal, LimitsAreEnforced) {
  const Scenario sc = test::preset("SCAL0");
  const StateVector phi = make_profile(sc, "ones");
  EXPECT_THROW(solve_birth(sc, 0.0, phi, -0.1), ContractViolation);
  EXPECT_THROW(solve_birth(sc, 0.0, phi, sc.s_max() + 1.0), ContractViolation);
  EXPECT_THROW(solve_birth(sc, 0.0, phi, 0.255), AlignmentError);
}

TEST(Renewal, BirthDerivativeConvergesForCoreStates) {
  auto residual = [](int n_age) {
    ScenarioConfig c = preset_config("SCAL0");
    c.n_age = n_age;
    const Scenario sc = build_scenario(c);
    const StateVector psi = project_to_Y(sc, make_profile(sc, "smooth"), {n_age / 5});
    return birth_derivative_residual(sc, 0.0, psi, 0.5);
  };
  const double coarse = residual(50), fine = residual(100);
  EXPECT_LT(fine, 0.7 * coarse);
}

TEST(Renewal, StepSystemSingularity) {
  // (I − (h/2)b(0)) vanishes when h·β = 2.
  ScenarioConfig c = test::scalar_config(10, 1.0, 1);
  c.birth = {"constant", 20.0, {}};
  const Scenario sc = build_scenario(c);
  EXPECT_THROW(solve_birth(sc, 0.0, make_profile(sc, "ones"), 0.5), StepSizeError);
}

}  // namespace
}  // namespace kato
