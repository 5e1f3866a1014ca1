#pragma once

#include "kato/core_model.hpp"
#include "kato/renewal.hpp"

namespace kato {

struct SemigroupApplication {
  StateVector value;
  BirthTrajectory birth;
};

/// [S_t(s)φ](a_i) = U(a_i, a_i − s)φ(a_i − s) for s < a_i, U(a_i, 0)B_φ^t(s − a_i)
/// otherwise. s = 0 returns φ unchanged.
SemigroupApplication apply_semigroup_detailed(const Scenario& scenario, double t, double s,
                                              const StateVector& phi);
StateVector apply_semigroup(const Scenario& scenario, double t, double s, const StateVector& phi);

/// Upwind age derivative: second-order backward stencil in the interior, a
/// first-order backward difference at a_1 and a second-order forward stencil
/// at a_0.
StateVector age_derivative_upwind(const StateVector& phi);

/// 𝔸(t)ψ = −∂_aψ + A(t,·)ψ. Throws PreconditionError unless ψ ∈ Y.
StateVector generator_apply(const Scenario& scenario, double t, const StateVector& psi);

/// Same formula without the membership check (used on the right-hand side
/// of identities where the argument is not itself required to be in Y).
StateVector generator_apply_unchecked(const Scenario& scenario, double t, const StateVector& psi);

double semigroup_property_residual(const Scenario& scenario, double t, double s1, double s2,
                                   const StateVector& phi);

/// ‖∂_a[S_t(s)ψ] − A(t,·)S_t(s)ψ + S_t(s)(𝔸(t)ψ)‖_E0.
double admissibility_residual(const Scenario& scenario, double t, double s, const StateVector& psi);

struct ProjectionOptions {
  /// Width of the correction layer in age cells. One cell reproduces the
  /// affine blend on [a_0, a_1]; wider layers use a C¹ smoothstep profile so
  /// the result stays smooth in age.
  int layer_cells = 1;
};

/// ψ = φ + χ·c with χ(0) = 1 supported in the layer and c solving
/// ψ(0) = Σ w_i b(a_i) ψ(a_i) exactly.
StateVector project_to_Y(const Scenario& scenario, const StateVector& phi, ProjectionOptions options = {});

void require_in_Y(const Scenario& scenario, const StateVector& psi, std::string_view what);

}  // namespace kato
