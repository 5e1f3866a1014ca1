#pragma once

#include "kato/core_model.hpp"
#include "kato/kato.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kato {

/// L_p-ball constraint: every iterate must satisfy
/// ‖v‖_{L_p} ≤ (N0 + r0)‖φ‖_{L_p}, with the L_p-in-age norm of the spatial norm.
struct LpMode {
  double p = 2.0;
  double N0 = 1.0;
};

struct QuasilinearProblem {
  using OperatorOfState = std::function<Matrix(const StateVector& v, double t, double a)>;
  OperatorOfState operator_of_state;
  double lipschitz_L = 0.0;
  double ball_radius = 1.0;
  StateVector ball_center;
  std::optional<LpMode> lp_mode;
};

/// A(v, t, a) = (1 + ε‖v‖_E0)·A(t, a) with A the scenario's operator, and
/// L = ε·sup_{t,a}‖A(t, a)‖ over a fine sample of times and ages.
QuasilinearProblem norm_coupled_diffusion(const Scenario& scenario, double epsilon, double r0,
                                          const StateVector& phi);

struct LipschitzCheck {
  double observed = 0.0;
  double declared = 0.0;
  bool within = true;
};

/// max over sampled pairs v1 ≠ v2 in the ball and sampled (t, a) of
/// ‖A(v1,t,a) − A(v2,t,a)‖ / ‖v1 − v2‖_E0.
LipschitzCheck check_lipschitz(const QuasilinearProblem& problem, const Scenario& scenario, int samples,
                               std::uint64_t seed = 0);

/// (t, a) ↦ A(v(t), t, a) with v linearly interpolated between trajectory nodes.
OperatorField frozen_state_operator(const QuasilinearProblem& problem, const Trajectory& v);

/// Stability constants over the ball: the elementwise maximum of
/// estimate_constants at the centre, at radial extremes and at random
/// states of the ball (sampled evidence, not a certificate).
StabilityConstants estimate_ball_constants(const Scenario& scenario, const QuasilinearProblem& problem,
                                           int samples, std::uint64_t seed = 0);

struct DependenceGap {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = ‖U_{A1,n}(t,s)φ − U_{A2,n}(t,s)φ‖_E0 and
/// rhs = M0·M1·e^{η(t−s)}‖φ‖_E1·Σ_cells |cell|·max_a‖A1 − A2‖ at the frozen
/// cell times, the discrete form of ∫ₛᵗ sup_a ‖A1 − A2‖.
DependenceGap continuous_dependence_gap(const Scenario& scenario, const OperatorField& a1, const OperatorField& a2,
                                        const StateVector& phi, double s, double t, int n,
                                        const StabilityConstants& constants);

enum class InitialIterate { constant, linear };

struct QuasilinearOptions {
  /// Kato partition for every evolution; 0 selects the finest admissible dyadic n.
  int n = 0;
  int max_iter = 60;
  InitialIterate initial = InitialIterate::constant;
  /// Declared constants; estimated over the ball when absent.
  std::optional<StabilityConstants> constants;
  int constant_samples = 32;
  std::uint64_t seed = 0;
  /// Starting horizon; 0 means T.
  double horizon = 0.0;
  bool keep_iterates = false;
};

struct IterateRecord {
  double sup_gap = 0.0;
  /// sup_gap over the previous one; NaN for the first.
  double ratio = 0.0;
  /// max_t ‖u(t) − φ‖_E0.
  double ball_excursion = 0.0;
  /// max_t ‖u(t)‖_{L_p}/‖φ‖_{L_p}, lp_mode only.
  double lp_ratio = 0.0;
  /// max_t of lhs/rhs in the consecutive-iterate dependence inequality.
  double dependence_ratio = 0.0;
};

struct HorizonEvent {
  double horizon;
  std::string reason;
};

struct QuasilinearResult {
  Trajectory trajectory;
  double T_phi = 0.0;
  int n = 0;
  int iterations = 0;
  std::vector<IterateRecord> iterates;
  std::vector<HorizonEvent> halvings;
  std::vector<Trajectory> accepted_iterates;
  /// sup_t ‖u − Φ(u)‖_E0 with Φ(u) re-evaluated from scratch.
  double fixed_point_residual = 0.0;
  /// L·M0M1·e^{ηT_φ}·‖φ‖_E1·T_φ.
  double predicted_contraction = 0.0;
  StabilityConstants constants;
  LipschitzCheck lipschitz;
};

/// Picard iteration u^{k+1}(t) = U_{𝔸(u^k)}(t, 0)φ on the scenario time
/// grid. The horizon is halved whenever an iterate leaves the ball (or the
/// L_p ball) or consecutive gaps contract by more than 0.9.
QuasilinearResult solve_quasilinear(const Scenario& scenario, const QuasilinearProblem& problem, double tol,
                                    const QuasilinearOptions& options = {});

/// One Picard map Φ(u)(t) = U_{𝔸(u)}(t, 0)φ at partition n.
Trajectory picard_map(const Scenario& scenario, const QuasilinearProblem& problem, const Trajectory& u, int n);

/// sup over trajectory nodes of ‖u(t) − v(t)‖_E0.
double sup_distance(const Trajectory& u, const Trajectory& v);

}  // namespace kato
