#pragma once

#include "kato/core_model.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace kato {

/// ∏_{j=n}^{1} S_{t_j}(s_j) with t_1 ≤ … ≤ t_n; factor 1 acts first.
struct ProductPlan {
  std::vector<double> times;
  std::vector<double> durations;

  int size() const noexcept { return static_cast<int>(times.size()); }
  double total_duration() const;
};

/// Parses "t1:s1,t2:s2,...".
ProductPlan parse_plan(std::string_view text);

/// Checks ordering, ranges and alignment; returns durations in age steps.
std::vector<int> validate_plan(const Scenario& scenario, const ProductPlan& plan);

/// Closed-form casework: node a is in the transport case when Σ s_l < a and
/// otherwise in the birth branch of the k with Σ_{l>k} s_l < a ≤ Σ_{l≥k} s_l.
/// Birth trajectories of partial products are memoized per plan prefix.
StateVector apply_product_direct(const Scenario& scenario, const ProductPlan& plan, const StateVector& phi);

/// Right-to-left fold of apply_semigroup.
StateVector apply_product_sequential(const Scenario& scenario, const ProductPlan& plan, const StateVector& phi);

/// M_ℓ e^{(ω_ℓ + ‖b‖_ℓ M_ℓ)Σs}‖φ‖_ℓ − ‖∏Sφ‖_ℓ. Negative means the bound failed.
double stability_margin(const Scenario& scenario, const ProductPlan& plan, const StateVector& phi,
                        const StabilityConstants& constants, int ell);

/// ‖b‖_ℓ M_ℓ e^{(ω_ℓ + ‖b‖_ℓ M_ℓ)(s + Σ_{j<n} s_j)}‖φ‖_ℓ − ‖B^{t_n}_{∏_{j<n}Sφ}(s)‖_ℓ.
double birth_chain_margin(const Scenario& scenario, const ProductPlan& plan, const StateVector& phi,
                          const StabilityConstants& constants, int ell, double s);

struct LpConstants {
  double N;
  double xi;
};

/// N^p = M^p + ‖b‖^{p−1} M^{2p−1}/p and ξ = ω + ‖b‖M, read off the final
/// estimate of the L_p stability argument.
LpConstants lp_constants(const StabilityConstants& constants, int ell, double p);

/// N e^{ξΣs} max{‖φ‖_{L_p}, ‖φ‖_ℓ} − ‖∏Sφ‖_{L_p}.
double lp_stability_margin(const Scenario& scenario, const ProductPlan& plan, const StateVector& phi,
                           double p, const StabilityConstants& constants, int ell);

/// Estimates every stability constant: (M, ϖ) from single propagators at
/// sampled times, (M_ℓ, ω_ℓ) from random time-ordered propagator products
/// with up to four factors, and ‖b‖_ℓ exactly from the kernel.
StabilityConstants estimate_constants(const Scenario& scenario, int samples, std::uint64_t seed = 0);

/// Random valid plan: n factors, nondecreasing times on [0, T], durations
/// aligned and each at most max_duration.
ProductPlan random_plan(const Scenario& scenario, int n, double max_duration, std::uint64_t seed);

}  // namespace kato
