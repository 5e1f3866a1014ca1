#pragma once

#include "kato/core_model.hpp"
#include "kato/kato.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace kato {

using Forcing = std::function<StateVector(double t)>;

/// Forcing presets f(t) = amplitude·g(t)·ψ with ψ a named profile:
///   constant  g ≡ 1
///   pulse     g = exp(−((t − T/2)/(0.1T))²)
///   sinusoid  g = sin(2πt/T)
Forcing make_forcing(const Scenario& scenario, const std::string& kind, double amplitude = 1.0,
                     const std::string& profile = "bump", std::uint64_t seed = 0);
std::vector<std::string> forcing_names();

struct MildOptions {
  /// Kato partition; 0 selects it by apply_UA at the requested tolerance.
  int n = 0;
  /// Quadrature steps per scenario time step.
  int substeps = 1;
};

struct MildSolution {
  Trajectory trajectory;
  int n = 0;
  double tau = 0.0;
};

/// u(t_m) = U(t_m, 0)φ + ∫₀^{t_m} U(t_m, σ)f(σ)dσ with trapezoid quadrature in
/// σ. The sum is carried by H_{m+1} = U_n(t_{m+1}, t_m)H_m + τf(t_{m+1}) and
/// u_m = H_m − (τ/2)f(t_m), so each step costs one evolution.
MildSolution solve_nonhomogeneous(const Scenario& scenario, const StateVector& phi, const Forcing& forcing,
                                  double t_end, double tol, const MildOptions& options = {});

/// max_m ‖u_τ(t_m) − u_{τ/2}(t_m)‖_E0 against a re-evaluation at half the
/// quadrature step and the same partition.
double duhamel_residual(const Scenario& scenario, const MildSolution& solution, const StateVector& phi,
                        const Forcing& forcing);

}  // namespace kato
