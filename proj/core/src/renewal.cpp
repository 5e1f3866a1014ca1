#include "kato/renewal.hpp"

#include "kato/error.hpp"
#include "kato/semigroup.hpp"

#include <cmath>

namespace kato {

namespace detail {

RenewalMarch march_renewal(const Scenario& scenario, const Propagator& prop, const StateVector& phi,
                           int steps) {
  require_on_grid(phi, scenario, "renewal input");
  if (steps < 0) throw ContractViolation("renewal march needs a nonnegative number of steps");
  const AgeGrid& grid = scenario.age_grid();
  const int n = grid.n_age();
  const int d = scenario.dim();
  const double h = grid.step();
  const auto& b = scenario.birth_at_nodes();

  RenewalMarch out{BirthTrajectory{prop.time(), h, {}}, phi.samples()};
  auto& values = out.birth.values;
  values.reserve(steps + 1);
  values.push_back(birth_quadrature(scenario, phi));
  if (steps == 0) return out;

  const Matrix system = Matrix::Identity(d, d) - 0.5 * h * b[0];
  const Eigen::PartialPivLU<Matrix> lu(system);
  const double rcond = lu.rcond();
  if (!std::isfinite(rcond) || rcond < 1e-12)
    throw StepSizeError("renewal step system I - (h/2) b(0) is singular at step " + std::to_string(h) +
                        "; refine the age grid");

  // G_j = w_j b(a_j) U(a_j, 0), built lazily as the convolution reaches j.
  std::vector<Matrix> g;
  g.reserve(std::min(steps, n) + 1);
  g.push_back(Matrix());

  Matrix& transported = out.transported;
  Vector tmp(d);
  Vector rhs(d);
  for (int k = 1; k <= steps; ++k) {
    if (k <= n) {
      for (int j = n; j > k; --j) {
        tmp.noalias() = prop.step(j - 1) * transported.col(j - 1);
        transported.col(j) = tmp;
      }
      g.push_back(grid.weight(k) * b[k] * prop.from_origin(k));
    }
    rhs.setZero();
    const int conv = std::min(k, n);
    for (int j = 1; j <= conv; ++j) rhs.noalias() += g[j] * values[k - j];
    for (int j = k + 1; j <= n; ++j) rhs.noalias() += grid.weight(j) * (b[j] * transported.col(j));
    values.push_back(lu.solve(rhs));
  }
  return out;
}

}  // namespace detail

BirthTrajectory solve_birth(const Scenario& scenario, double t, const StateVector& phi, double s_max) {
  if (s_max < 0.0) throw ContractViolation("solve_birth requires s_max >= 0");
  if (s_max > scenario.s_max() * (1.0 + 1e-12))
    throw ContractViolation("solve_birth: s_max exceeds the configured limit " +
                            std::to_string(scenario.s_max()));
  const int steps = scenario.age_grid().steps_of(s_max, "s_max");
  const auto prop = propagator_at(scenario, t);
  return detail::march_renewal(scenario, *prop, phi, steps).birth;
}

double birth_identity_residual(const Scenario& scenario, double t, const StateVector& phi, double s) {
  const int m = scenario.age_grid().steps_of(s, "s");
  if (m < 0) throw ContractViolation("birth_identity_residual requires s >= 0");
  const SemigroupApplication app = apply_semigroup_detailed(scenario, t, s, phi);
  const Vector quad = birth_quadrature(scenario, app.value);
  return spatial_norm(app.birth.at(m) - quad, scenario.spatial_norm());
}

double birth_derivative_residual(const Scenario& scenario, double t, const StateVector& psi, double s) {
  require_in_Y(scenario, psi, "birth_derivative_residual input");
  const AgeGrid& grid = scenario.age_grid();
  const int m = grid.steps_of(s, "s");
  if (m < 1) throw ContractViolation("birth_derivative_residual requires an interior s node");
  const double h = grid.step();
  const BirthTrajectory b = solve_birth(scenario, t, psi, (m + 1) * h);
  const Vector central = (b.at(m + 1) - b.at(m - 1)) / (2.0 * h);
  const StateVector gen = generator_apply_unchecked(scenario, t, psi);
  const BirthTrajectory bg = solve_birth(scenario, t, gen, m * h);
  return spatial_norm(central - bg.at(m), scenario.spatial_norm());
}

}  // namespace kato
