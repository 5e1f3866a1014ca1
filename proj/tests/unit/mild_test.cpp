#include "support.hpp"

#include "kato/error.hpp"
#include "kato/kato.hpp"
#include "kato/mild.hpp"
#include "kato/profiles.hpp"
#include "kato/semigroup.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace kato {
namespace {

// With A = 0 and no births, a time-constant forcing g(a) is carried along
// characteristics: u(t, a) = ∫_{max(0, a−t)}^{a} g(x) dx.
TEST(Mild, CharacteristicClosedForm) {
  const Scenario sc = test::preset("TRANSPORT0");
  const Forcing f = make_forcing(sc, "constant", 1.0, "bump");
  const MildSolution sol = solve_nonhomogeneous(sc, sc.zero_state(), f, 1.0, 1e-6, {0, 10});
  EXPECT_DOUBLE_EQ(sol.tau, 0.01);
  const double pi = std::numbers::pi;
  for (std::size_t m : {std::size_t{30}, std::size_t{100}}) {
    const double t = sol.trajectory.times[m];
    const StateVector& u = sol.trajectory.states[m];
    for (int i = 0; i <= 100; i += 5) {
      const double a = sc.age_grid().node(i);
      const double exact = (std::cos(pi * std::max(0.0, a - t)) - std::cos(pi * a)) / pi;
      EXPECT_NEAR(u.samples()(0, i), exact, 1e-4) << "t = " << t << " a = " << a;
    }
  }
}

TEST(Mild, ZeroForcingIsTheEvolution) {
  const Scenario sc = test::preset("DIFF1");
  const StateVector phi = make_profile(sc, "smooth");
  const Forcing none = [&](double) { return sc.zero_state(); };
  const MildSolution sol = solve_nonhomogeneous(sc, phi, none, 1.0, 1e-5, {16, 1});
  EXPECT_LE(norm_E0(sol.trajectory.states.back() - apply_Un(sc, 16, 1.0, 0.0, phi)), 1e-12 * norm_E0(phi));
}

TEST(Mild, LinearInDataAndForcing) {
  const Scenario sc = test::preset("SCAL1");
  const StateVector phi = make_profile(sc, "smooth");
  const Forcing f = make_forcing(sc, "sinusoid", 0.5, "bump");
  const Forcing none = [&](double) { return sc.zero_state(); };
  const MildOptions opt{8, 1};
  const StateVector both = solve_nonhomogeneous(sc, phi, f, 1.0, 1e-5, opt).trajectory.states.back();
  const StateVector data = solve_nonhomogeneous(sc, phi, none, 1.0, 1e-5, opt).trajectory.states.back();
  const StateVector force = solve_nonhomogeneous(sc, sc.zero_state(), f, 1.0, 1e-5, opt).trajectory.states.back();
  EXPECT_LE(norm_E0(both - data - force), 1e-12 * norm_E0(both));
}

TEST(Mild, QuadratureIsSecondOrder) {
  // The forcing shape must satisfy the birth condition: otherwise S(s)f
  // carries a jump at a = s and the σ-integrand is not smooth.
  const Scenario sc = test::preset("DIFF1");
  const StateVector phi = make_profile(sc, "smooth");
  const StateVector shape = project_to_Y(sc, make_profile(sc, "bump"), {8});
  const Forcing f = [shape](double t) {
    const double z = (t - 0.5) / 0.1;
    return std::exp(-z * z) * shape;
  };
  const double r1 = duhamel_residual(sc, solve_nonhomogeneous(sc, phi, f, 1.0, 1e-5, {16, 1}), phi, f);
  const double r2 = duhamel_residual(sc, solve_nonhomogeneous(sc, phi, f, 1.0, 1e-5, {16, 2}), phi, f);
  EXPECT_NEAR(std::log2(r1 / r2), 2.0, 0.3);
}

TEST(Mild, InputChecks) {
  const Scenario sc = test::preset("DIFF1");
  const Forcing f = make_forcing(sc, "constant");
  EXPECT_THROW(solve_nonhomogeneous(sc, sc.zero_state(), f, 2.0, 1e-5), ContractViolation);
  EXPECT_THROW(solve_nonhomogeneous(sc, sc.zero_state(), f, 0.3, 1e-5, {16, 1}), AlignmentError);
  EXPECT_THROW(make_forcing(sc, "square"), ValidationError);
  const Forcing bad = [&](double) { return test::preset("SCAL0").zero_state(); };
  EXPECT_THROW(solve_nonhomogeneous(sc, sc.zero_state(), bad, 1.0, 1e-5, {16, 1}), ValidationError);
}

}  // namespace
}  // namespace kato
