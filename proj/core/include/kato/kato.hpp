#pragma once

#include "kato/core_model.hpp"
#include "kato/products.hpp"

#include <optional>
#include <vector>

namespace kato {

/// Breakpoint t_k = k·T/n. Computed as (k·T)/n so that dyadic refinements
/// reproduce coarser breakpoints bit for bit.
double breakpoint(const Scenario& scenario, int n, int k);

/// True when T/n is a whole number of age steps.
bool partition_admissible(const Scenario& scenario, int n);

/// Largest admissible power-of-two partition count not exceeding n_cap.
int finest_dyadic_partition(const Scenario& scenario, int n_cap = 1 << 20);

/// U_n(t, s) as a time-ordered product plan: frozen time t_k on
/// [t_k, t_{k+1}), and T itself at t = T.
ProductPlan kato_plan(const Scenario& scenario, int n, double t, double s);

/// U_n(t, s)φ. Throws AlignmentError naming compatible n when a cell
/// offset falls between age nodes.
StateVector apply_Un(const Scenario& scenario, int n, double t, double s, const StateVector& phi);

struct KatoOptions {
  int n_start = 1;
  int n_max = 1 << 12;
  /// Return the Richardson combination 2U_{4n} − U_{2n}; the result is flagged.
  bool extrapolate = false;
  /// Source of η; when absent η is reported as NaN.
  std::optional<StabilityConstants> constants;
};

struct EvolutionResult {
  StateVector value;
  /// Coarsest n with ‖U_nφ − U_{2n}φ‖ and the next informative gap both
  /// within tolerance.
  int n_used = 0;
  /// Partition count of the returned value (4·n_used unless a doubling left
  /// the product unchanged).
  int n_value = 0;
  /// Larger of the two accepting gaps.
  double cauchy_gap = 0.0;
  double eta = 0.0;
  bool extrapolated = false;
  std::vector<int> ns;
  std::vector<double> gaps;
};

/// U_𝔸(t, s)φ by partition doubling until two consecutive Cauchy gaps
/// ‖U_nφ − U_{2n}φ‖_E0 are ≤ tol·‖φ‖_E0. Doublings that leave the product
/// plan on [s, t] unchanged are skipped; t = s returns φ, and an operator
/// declared time-independent (Lipschitz constant 0 in t) is exact at n_start.
/// Throws ConvergenceError carrying the gap history when no admissible
/// refinement is left or n_max is reached.
EvolutionResult apply_UA(const Scenario& scenario, double t, double s, const StateVector& phi, double tol,
                         const KatoOptions& options = {});

/// ‖U(t,s)φ − U(t,r)U(r,s)φ‖_E0, each factor by apply_UA at tol.
double cocycle_residual_UA(const Scenario& scenario, double s, double r, double t, const StateVector& phi,
                           double tol);

/// ‖(U_n(s+h, s)ψ − ψ)/h − 𝔸(s)ψ‖_E0 at fixed n (0 selects the finest
/// admissible dyadic n).
double right_derivative_residual(const Scenario& scenario, double s, const StateVector& psi, double h, int n = 0);

/// ‖(U_n(t, s+h)ψ − U_n(t, s)ψ)/h + U_n(t, s)𝔸(s)ψ‖_E0 at fixed n.
double s_derivative_residual(const Scenario& scenario, double t, double s, const StateVector& psi, double h,
                             int n = 0);

struct DerivativeStudy {
  std::vector<double> hs;
  std::vector<double> residuals;
  /// Richardson limit 2r(h_min) − r(2h_min) of a first-order trend.
  double extrapolated = 0.0;
  /// Residual at h = one age step, the smallest increment the grid resolves.
  double floor = 0.0;
  bool monotone = false;
};

enum class DerivativeKind { right, s };

/// Residuals over decreasing hs (each grid-aligned). For kind s, t must leave
/// room for s + h.
DerivativeStudy derivative_study(const Scenario& scenario, DerivativeKind kind, double t, double s,
                                 const StateVector& psi, const std::vector<double>& hs, int n = 0);

struct ConvergenceRow {
  int n;
  /// ‖U_nφ − U_{2n}φ‖_E0.
  double gap;
  /// gap(n/2)/gap(n); NaN on the first row.
  double ratio;
  /// log2 of the ratio.
  double order;
};

/// Gaps for n = n_min, 2n_min, ... while 2n stays admissible and ≤ n_max.
std::vector<ConvergenceRow> convergence_study(const Scenario& scenario, double t, double s, const StateVector& phi,
                                              int n_min = 1, int n_max = 1 << 12);

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
};

/// U_n(times[m], times[0])φ for a nondecreasing list of aligned times, built
/// by composing U_n(times[m+1], times[m]).
Trajectory evolve_trajectory(const Scenario& scenario, int n, const std::vector<double>& times,
                             const StateVector& phi);

}  // namespace kato
