#pragma once

#include "kato/core_model.hpp"
#include "kato/propagator.hpp"

namespace kato {

/// B_φ^t(s_k) on the aligned grid s_k = k·step, k = 0..K.
struct BirthTrajectory {
  double t = 0.0;
  double step = 0.0;
  std::vector<Vector> values;

  int size() const noexcept { return static_cast<int>(values.size()); }
  double s(int k) const noexcept { return k * step; }
  const Vector& at(int k) const { return values.at(k); }
};

/// Forward march of the renewal equation with trapezoid quadrature. The
/// unknown B(s_k) enters only through the a = 0 endpoint, so each step solves
/// (I − (h/2) b(0)) B(s_k) = rhs.
BirthTrajectory solve_birth(const Scenario& scenario, double t, const StateVector& phi, double s_max);

/// ‖B(s) − Σ_i w_i b(a_i) [S_t(s)φ](a_i)‖.
double birth_identity_residual(const Scenario& scenario, double t, const StateVector& phi, double s);

/// ‖(B_ψ(s+h) − B_ψ(s−h))/(2h) − B_{𝔸(t)ψ}(s)‖ for ψ in Y.
double birth_derivative_residual(const Scenario& scenario, double t, const StateVector& psi, double s);

namespace detail {

/// Birth values up to K steps plus the transported profile: column j of
/// `transported` holds U(a_j, a_{j−K}) φ(a_{j−K}) for j > K.
struct RenewalMarch {
  BirthTrajectory birth;
  Matrix transported;
};

RenewalMarch march_renewal(const Scenario& scenario, const Propagator& prop, const StateVector& phi,
                           int steps);

}  // namespace detail

}  // namespace kato
