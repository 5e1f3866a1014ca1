#include "kato/mild.hpp"

#include "kato/error.hpp"
#include "kato/profiles.hpp"

#include <cmath>
#include <numbers>

namespace kato {

std::vector<std::string> forcing_names() { return {"constant", "pulse", "sinusoid"}; }

Forcing make_forcing(const Scenario& scenario, const std::string& kind, double amplitude,
                     const std::string& profile, std::uint64_t seed) {
  const StateVector shape = make_profile(scenario, profile, seed);
  const double horizon = scenario.horizon();
  std::function<double(double)> g;
  if (kind == "constant") {
    g = [](double) { return 1.0; };
  } else if (kind == "pulse") {
    g = [horizon](double t) {
      const double z = (t - 0.5 * horizon) / (0.1 * horizon);
      return std::exp(-z * z);
    };
  } else if (kind == "sinusoid") {
    g = [horizon](double t) { return std::sin(2.0 * std::numbers::pi * t / horizon); };
  } else {
    throw ValidationError("unknown forcing '" + kind + "' (known: constant, pulse, sinusoid)");
  }
  return [shape, g, amplitude](double t) { return (amplitude * g(t)) * shape; };
}

namespace {

StateVector evaluate_forcing(const Scenario& scenario, const Forcing& forcing, double sigma) {
  StateVector f = [&] {
    try {
      return forcing(sigma);
    } catch (const std::exception& e) {
      throw Error("forcing evaluation failed at sigma = " + std::to_string(sigma) + ": " + e.what());
    }
  }();
  require_on_grid(f, scenario, "forcing value");
  if (!f.is_finite()) throw ValidationError("forcing is not finite at sigma = " + std::to_string(sigma));
  return f;
}

Trajectory march(const Scenario& scenario, const StateVector& phi, const Forcing& forcing, int n, double tau,
                 int steps) {
  Trajectory out;
  out.times.reserve(steps + 1);
  out.states.reserve(steps + 1);
  StateVector f = evaluate_forcing(scenario, forcing, 0.0);
  StateVector h = phi + (0.5 * tau) * f;
  out.times.push_back(0.0);
  out.states.push_back(phi);
  for (int m = 1; m <= steps; ++m) {
    const double t_prev = (m - 1) * tau;
    const double t = m * tau;
    h = apply_Un(scenario, n, t, t_prev, h);
    f = evaluate_forcing(scenario, forcing, t);
    h += tau * f;
    out.times.push_back(t);
    out.states.push_back(h - (0.5 * tau) * f);
  }
  return out;
}

}  // namespace

MildSolution solve_nonhomogeneous(const Scenario& scenario, const StateVector& phi, const Forcing& forcing,
                                  double t_end, double tol, const MildOptions& options) {
  require_on_grid(phi, scenario, "mild solution input");
  if (!(t_end >= 0.0) || t_end > scenario.horizon() * (1.0 + 1e-12))
    throw ContractViolation("solve_nonhomogeneous requires 0 <= t_end <= T");
  if (options.substeps < 1) throw ContractViolation("substeps must be >= 1");
  const double tau = scenario.time_grid().step() / options.substeps;
  scenario.age_grid().steps_of(tau, "quadrature step");
  const double ratio = t_end / tau;
  const int steps = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio))
    throw AlignmentError("t_end must be a multiple of the quadrature step " + std::to_string(tau));

  int n = options.n;
  if (n == 0) {
    // Probe with φ plus the injected forcing so that a zero initial state
    // does not select the trivial partition.
    StateVector probe = phi;
    for (int m = 0; m <= steps; ++m) probe += tau * evaluate_forcing(scenario, forcing, m * tau);
    n = norm_E0(probe) == 0.0 || t_end == 0.0 ? 1 : apply_UA(scenario, t_end, 0.0, probe, tol).n_value;
  }
  return {march(scenario, phi, forcing, n, tau, steps), n, tau};
}

double duhamel_residual(const Scenario& scenario, const MildSolution& solution, const StateVector& phi,
                        const Forcing& forcing) {
  const Trajectory& coarse = solution.trajectory;
  const int steps = static_cast<int>(coarse.states.size()) - 1;
  const Trajectory fine = march(scenario, phi, forcing, solution.n, 0.5 * solution.tau, 2 * steps);
  double worst = 0.0;
  for (int m = 0; m <= steps; ++m) worst = std::max(worst, norm_E0(coarse.states[m] - fine.states[2 * m]));
  return worst;
}

}  // namespace kato
