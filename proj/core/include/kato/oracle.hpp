#pragma once

#include "kato/config.hpp"
#include "kato/core_model.hpp"
#include "kato/kato.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kato {

/// Direct time stepper for ∂_t u + ∂_a u = A(t,a)u, u(t,0) = ∫ b u da, with
/// Δt equal to the age step. One step: shift every node one cell along its
/// characteristic, apply (I − Δ·A(t_{n+1}, a_i))^{-1} at each node i ≥ 1,
/// then set node 0 from the trapezoid birth quadrature of the profile whose
/// node-0 value is still the previous step's (lagged, explicit).
/// record_every = k keeps every k-th step (0 keeps the endpoints only).
Trajectory solve_direct(const Scenario& scenario, const StateVector& phi, double t_end, int record_every = 0);

/// Least-squares slope of ln‖u(t)‖_E0 over the trajectory times in [t0, t1].
double log_growth_rate(const Trajectory& trajectory, double t0, double t1);

struct CompareRow {
  int n_age = 0;
  double step = 0.0;
  double discrepancy = 0.0;
  /// log2 of the discrepancy ratio to the previous row; NaN on the first.
  double order = 0.0;
  int kato_n = 0;
  /// True when apply_UA missed the tolerance and the finest admissible
  /// dyadic approximant was used instead.
  bool kato_fallback = false;
};

/// E0 discrepancy between apply_UA(t_end, 0) and solve_direct on the grids
/// n_age·2^r, r = 0..refinements−1. The profile is resampled on each grid.
std::vector<CompareRow> compare(const ScenarioConfig& config, const std::string& profile, std::uint64_t seed,
                                double t_end, int refinements, double tol);

}  // namespace kato
