#include "kato/kato.hpp"

#include "kato/error.hpp"
#include "kato/semigroup.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace kato {

namespace {

int cell_of(const Scenario& scenario, int n, double x) {
  const double horizon = scenario.horizon();
  const int k = static_cast<int>(std::floor(x * n / horizon + 1e-9));
  return std::clamp(k, 0, n);
}

void require_ordered(const Scenario& scenario, double s, double t) {
  const double eps = 1e-12 * std::max(1.0, scenario.horizon());
  if (!(s >= -eps && s <= t + eps && t <= scenario.horizon() + eps))
    throw ContractViolation("evolution requires 0 <= s <= t <= T");
}

std::string admissible_hint(const Scenario& scenario) {
  std::ostringstream out;
  out << "choose n so that T/n is a multiple of the age step " << scenario.age_grid().step();
  const int finest = finest_dyadic_partition(scenario);
  if (finest > 0) out << " (powers of two up to " << finest << " qualify)";
  return out.str();
}

}  // namespace

double breakpoint(const Scenario& scenario, int n, int k) {
  if (k == n) return scenario.horizon();
  return (k * scenario.horizon()) / n;
}

bool partition_admissible(const Scenario& scenario, int n) {
  if (n < 1) return false;
  try {
    scenario.age_grid().steps_of(scenario.horizon() / n, "cell width");
    return true;
  } catch (const AlignmentError&) {
    return false;
  }
}

int finest_dyadic_partition(const Scenario& scenario, int n_cap) {
  int best = 0;
  for (int n = 1; n <= n_cap && n > 0; n *= 2) {
    if (partition_admissible(scenario, n)) best = n;
    else if (n > 1) break;
    if (n > (std::numeric_limits<int>::max() >> 1)) break;
  }
  return best;
}

ProductPlan kato_plan(const Scenario& scenario, int n, double t, double s) {
  if (n < 1) throw ContractViolation("partition count must be >= 1");
  require_ordered(scenario, s, t);
  const int l = cell_of(scenario, n, s);
  const int k = cell_of(scenario, n, t);
  ProductPlan plan;
  if (l == k) {
    plan.times.push_back(breakpoint(scenario, n, k));
    plan.durations.push_back(std::max(0.0, t - s));
    return plan;
  }
  plan.times.push_back(breakpoint(scenario, n, l));
  plan.durations.push_back(breakpoint(scenario, n, l + 1) - s);
  for (int j = l + 1; j < k; ++j) {
    plan.times.push_back(breakpoint(scenario, n, j));
    plan.durations.push_back(breakpoint(scenario, n, j + 1) - breakpoint(scenario, n, j));
  }
  // A t on a breakpoint would add the identity S(0); leave it out so that
  // equal products have equal plans.
  if (t > breakpoint(scenario, n, k)) {
    plan.times.push_back(breakpoint(scenario, n, k));
    plan.durations.push_back(t - breakpoint(scenario, n, k));
  }
  return plan;
}

StateVector apply_Un(const Scenario& scenario, int n, double t, double s, const StateVector& phi) {
  const ProductPlan plan = kato_plan(scenario, n, t, s);
  try {
    validate_plan(scenario, plan);
  } catch (const AlignmentError& e) {
    throw AlignmentError(std::string(e.what()) + "; partition n = " + std::to_string(n) +
                         " is incompatible with the age grid: " + admissible_hint(scenario));
  }
  return apply_product_sequential(scenario, plan, phi);
}

EvolutionResult apply_UA(const Scenario& scenario, double t, double s, const StateVector& phi, double tol,
                         const KatoOptions& options) {
  if (!(tol > 0.0)) throw ContractViolation("apply_UA requires tol > 0");
  if (!phi.is_finite()) throw ValidationError("apply_UA input is not finite");
  require_ordered(scenario, s, t);
  int n = options.n_start;
  if (!partition_admissible(scenario, n))
    throw AlignmentError("starting partition n = " + std::to_string(n) + " is not admissible: " +
                         admissible_hint(scenario));
  const double scale = norm_E0(phi);

  EvolutionResult out{phi, 0, 0, 0.0, 0.0, false, {}, {}};
  out.eta = options.constants ? options.constants->eta() : std::numeric_limits<double>::quiet_NaN();
  if (t == s) {
    out.n_used = out.n_value = n;
    return out;
  }
  // A declared time-independent: every U_n is the same semigroup.
  if (const auto lip = scenario.op().lipschitz_t(); lip && *lip == 0.0) {
    out.value = apply_Un(scenario, n, t, s, phi);
    out.n_used = out.n_value = n;
    return out;
  }
  StateVector coarse = apply_Un(scenario, n, t, s, phi);
  ProductPlan coarse_plan = kato_plan(scenario, n, t, s);
  for (;;) {
    const int fine_n = 2 * n;
    if (fine_n > options.n_max || !partition_admissible(scenario, fine_n)) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "Kato approximants did not reach tol " << tol << " before n = " << n
          << " (no admissible refinement left); gaps:";
      for (double g : out.gaps) msg << ' ' << g;
      throw ConvergenceError(msg.str(), out.gaps);
    }
    // While [s, t] sits inside one coarse cell the refined plan is the same
    // product; such doublings carry no information and are not counted.
    ProductPlan fine_plan = kato_plan(scenario, fine_n, t, s);
    if (fine_plan.times == coarse_plan.times && fine_plan.durations == coarse_plan.durations) {
      n = fine_n;
      continue;
    }
    StateVector fine = apply_Un(scenario, fine_n, t, s, phi);
    const double gap = norm_E0(fine - coarse);
    out.ns.push_back(n);
    out.gaps.push_back(gap);
    // Two consecutive gaps must pass: a single one can vanish by aliasing
    // when the coarse and fine frozen times hit the same phase of A(t).
    const std::size_t g = out.gaps.size();
    if (g >= 2 && out.gaps[g - 2] <= tol * scale && gap <= tol * scale) {
      out.n_used = out.ns[g - 2];
      out.n_value = fine_n;
      out.cauchy_gap = std::max(out.gaps[g - 2], gap);
      if (options.extrapolate) {
        out.value = 2.0 * fine - coarse;
        out.extrapolated = true;
      } else {
        out.value = std::move(fine);
      }
      return out;
    }
    coarse = std::move(fine);
    coarse_plan = std::move(fine_plan);
    n = fine_n;
  }
}

double cocycle_residual_UA(const Scenario& scenario, double s, double r, double t, const StateVector& phi,
                           double tol) {
  if (!(s <= r && r <= t)) throw ContractViolation("cocycle_residual_UA requires s <= r <= t");
  const StateVector direct = apply_UA(scenario, t, s, phi, tol).value;
  const StateVector mid = apply_UA(scenario, r, s, phi, tol).value;
  const StateVector split = apply_UA(scenario, t, r, mid, tol).value;
  return norm_E0(direct - split);
}

namespace {

int resolve_n(const Scenario& scenario, int n) {
  if (n == 0) n = finest_dyadic_partition(scenario);
  if (!partition_admissible(scenario, n))
    throw AlignmentError("partition n = " + std::to_string(n) + " is not admissible: " + admissible_hint(scenario));
  return n;
}

}  // namespace

double right_derivative_residual(const Scenario& scenario, double s, const StateVector& psi, double h, int n) {
  require_in_Y(scenario, psi, "right_derivative_residual input");
  if (!(h > 0.0)) throw ContractViolation("derivative step must be positive");
  n = resolve_n(scenario, n);
  StateVector q = apply_Un(scenario, n, s + h, s, psi);
  q -= psi;
  q *= 1.0 / h;
  q -= generator_apply_unchecked(scenario, s, psi);
  return norm_E0(q);
}

double s_derivative_residual(const Scenario& scenario, double t, double s, const StateVector& psi, double h,
                             int n) {
  require_in_Y(scenario, psi, "s_derivative_residual input");
  if (!(h > 0.0)) throw ContractViolation("derivative step must be positive");
  if (s + h > t + 1e-12) throw ContractViolation("s_derivative_residual requires s + h <= t");
  n = resolve_n(scenario, n);
  StateVector q = apply_Un(scenario, n, t, s + h, psi);
  q -= apply_Un(scenario, n, t, s, psi);
  q *= 1.0 / h;
  q += apply_Un(scenario, n, t, s, generator_apply_unchecked(scenario, s, psi));
  return norm_E0(q);
}

DerivativeStudy derivative_study(const Scenario& scenario, DerivativeKind kind, double t, double s,
                                 const StateVector& psi, const std::vector<double>& hs, int n) {
  if (hs.size() < 2) throw ContractViolation("derivative_study needs at least two step sizes");
  auto residual = [&](double h) {
    return kind == DerivativeKind::right ? right_derivative_residual(scenario, s, psi, h, n)
                                         : s_derivative_residual(scenario, t, s, psi, h, n);
  };
  DerivativeStudy out;
  out.hs = hs;
  for (double h : hs) out.residuals.push_back(residual(h));
  out.monotone = true;
  for (std::size_t i = 1; i < out.residuals.size(); ++i)
    if (!(out.residuals[i] < out.residuals[i - 1])) out.monotone = false;
  const std::size_t last = out.residuals.size() - 1;
  const double ratio = out.hs[last - 1] / out.hs[last];
  out.extrapolated = std::abs((ratio * out.residuals[last] - out.residuals[last - 1]) / (ratio - 1.0));
  out.floor = residual(scenario.age_grid().step());
  return out;
}

std::vector<ConvergenceRow> convergence_study(const Scenario& scenario, double t, double s, const StateVector& phi,
                                              int n_min, int n_max) {
  if (!partition_admissible(scenario, n_min))
    throw AlignmentError("partition n = " + std::to_string(n_min) + " is not admissible: " +
                         admissible_hint(scenario));
  std::vector<ConvergenceRow> rows;
  StateVector coarse = apply_Un(scenario, n_min, t, s, phi);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int n = n_min; 2 * n <= n_max && partition_admissible(scenario, 2 * n); n *= 2) {
    StateVector fine = apply_Un(scenario, 2 * n, t, s, phi);
    const double gap = norm_E0(fine - coarse);
    const double ratio = rows.empty() ? nan : rows.back().gap / gap;
    rows.push_back({n, gap, ratio, rows.empty() ? nan : std::log2(ratio)});
    coarse = std::move(fine);
  }
  return rows;
}

Trajectory evolve_trajectory(const Scenario& scenario, int n, const std::vector<double>& times,
                             const StateVector& phi) {
  if (times.empty()) throw ContractViolation("evolve_trajectory needs at least one time");
  Trajectory out;
  out.times = times;
  out.states.push_back(phi);
  for (std::size_t m = 1; m < times.size(); ++m) {
    if (times[m] < times[m - 1]) throw ContractViolation("trajectory times must be nondecreasing");
    out.states.push_back(apply_Un(scenario, n, times[m], times[m - 1], out.states.back()));
  }
  return out;
}

}  // namespace kato
