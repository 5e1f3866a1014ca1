#include "kato/semigroup.hpp"

#include "kato/error.hpp"
#include "kato/propagator.hpp"

#include <sstream>

namespace kato {

void require_in_Y(const Scenario& scenario, const StateVector& psi, std::string_view what) {
  require_on_grid(psi, scenario, what);
  const Membership m = check_membership_Y(psi, scenario, scenario.tolerances().membership);
  if (!m.member) {
    std::ostringstream msg;
    msg.precision(6);
    msg << what << " is not in Y: birth-condition residual " << m.residual << " exceeds "
        << scenario.tolerances().membership;
    throw PreconditionError(msg.str());
  }
}

SemigroupApplication apply_semigroup_detailed(const Scenario& scenario, double t, double s,
                                              const StateVector& phi) {
  require_on_grid(phi, scenario, "semigroup input");
  const AgeGrid& grid = scenario.age_grid();
  const int m = grid.steps_of(s, "s");
  if (m < 0) throw ContractViolation("apply_semigroup requires s >= 0");
  const auto prop = propagator_at(scenario, t);
  detail::RenewalMarch march = detail::march_renewal(scenario, *prop, phi, m);
  if (m == 0) return {phi, std::move(march.birth)};

  StateVector value = scenario.zero_state();
  const int n = grid.n_age();
  for (int i = 0; i <= n; ++i) {
    if (m < i)
      value.sample(i) = march.transported.col(i);
    else
      value.sample(i).noalias() = prop->from_origin(i) * march.birth.values[m - i];
  }
  return {std::move(value), std::move(march.birth)};
}

StateVector apply_semigroup(const Scenario& scenario, double t, double s, const StateVector& phi) {
  return apply_semigroup_detailed(scenario, t, s, phi).value;
}

StateVector age_derivative_upwind(const StateVector& phi) {
  const int n = phi.grid().n_age();
  const double h = phi.grid().step();
  StateVector out = phi;
  out.sample(0) = (-3.0 * phi.sample(0) + 4.0 * phi.sample(1) - phi.sample(2)) / (2.0 * h);
  out.sample(1) = (phi.sample(1) - phi.sample(0)) / h;
  for (int i = 2; i <= n; ++i)
    out.sample(i) = (3.0 * phi.sample(i) - 4.0 * phi.sample(i - 1) + phi.sample(i - 2)) / (2.0 * h);
  return out;
}

StateVector generator_apply_unchecked(const Scenario& scenario, double t, const StateVector& psi) {
  require_on_grid(psi, scenario, "generator input");
  const AgeGrid& grid = scenario.age_grid();
  StateVector out = age_derivative_upwind(psi);
  out *= -1.0;
  for (int i = 0; i < grid.size(); ++i)
    out.sample(i).noalias() += scenario.op()(t, grid.node(i)) * psi.sample(i);
  return out;
}

StateVector generator_apply(const Scenario& scenario, double t, const StateVector& psi) {
  require_in_Y(scenario, psi, "generator_apply input");
  return generator_apply_unchecked(scenario, t, psi);
}

double semigroup_property_residual(const Scenario& scenario, double t, double s1, double s2,
                                   const StateVector& phi) {
  const StateVector joint = apply_semigroup(scenario, t, s1 + s2, phi);
  const StateVector split = apply_semigroup(scenario, t, s1, apply_semigroup(scenario, t, s2, phi));
  return norm_E0(joint - split);
}

double admissibility_residual(const Scenario& scenario, double t, double s, const StateVector& psi) {
  require_in_Y(scenario, psi, "admissibility_residual input");
  const AgeGrid& grid = scenario.age_grid();
  const StateVector moved = apply_semigroup(scenario, t, s, psi);
  StateVector residual = age_derivative_upwind(moved);
  for (int i = 0; i < grid.size(); ++i)
    residual.sample(i).noalias() -= scenario.op()(t, grid.node(i)) * moved.sample(i);
  residual += apply_semigroup(scenario, t, s, generator_apply_unchecked(scenario, t, psi));
  return norm_E0(residual);
}

StateVector project_to_Y(const Scenario& scenario, const StateVector& phi, ProjectionOptions options) {
  require_on_grid(phi, scenario, "project_to_Y input");
  const AgeGrid& grid = scenario.age_grid();
  const int layer = std::clamp(options.layer_cells, 1, grid.n_age());
  const int d = scenario.dim();

  std::vector<double> chi(grid.size(), 0.0);
  for (int i = 0; i <= layer; ++i) {
    const double x = static_cast<double>(i) / layer;
    chi[i] = layer == 1 ? 1.0 - x : (1.0 - x) * (1.0 - x) * (1.0 + 2.0 * x);
  }

  const auto& b = scenario.birth_at_nodes();
  Matrix q_chi = Matrix::Zero(d, d);
  for (int i = 0; i <= layer; ++i) q_chi += grid.weight(i) * chi[i] * b[i];
  const Vector mismatch = birth_quadrature(scenario, phi) - phi.sample(0);
  const Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(d, d) - q_chi);
  if (!std::isfinite(lu.rcond()) || lu.rcond() < 1e-12)
    throw StepSizeError("project_to_Y: boundary-layer system is singular; use a narrower layer");
  const Vector c = lu.solve(mismatch);

  StateVector psi = phi;
  for (int i = 0; i <= layer; ++i) psi.sample(i) += chi[i] * c;
  return psi;
}

}  // namespace kato
