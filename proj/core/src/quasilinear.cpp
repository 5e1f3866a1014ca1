#include "kato/quasilinear.hpp"

#include "kato/error.hpp"
#include "kato/products.hpp"
#include "kato/profiles.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

namespace kato {

namespace {

/// Ages at which propagators sample A: nodes and cell midpoints.
std::vector<double> operator_ages(const AgeGrid& grid) {
  std::vector<double> ages;
  for (int i = 0; i < grid.size(); ++i) {
    ages.push_back(grid.node(i));
    if (i < grid.n_age()) ages.push_back(grid.node(i) + 0.5 * grid.step());
  }
  return ages;
}

double sup_operator_gap(const Scenario& scenario, const OperatorField& a1, const OperatorField& a2, double t) {
  double worst = 0.0;
  for (double a : operator_ages(scenario.age_grid()))
    worst = std::max(worst, operator_norm(a1(t, a) - a2(t, a), scenario.spatial_norm()));
  return worst;
}

StateVector interpolate(const Trajectory& v, double t) {
  const auto& times = v.times;
  if (t <= times.front()) return v.states.front();
  if (t >= times.back()) return v.states.back();
  const auto hi = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t j = static_cast<std::size_t>(hi - times.begin());
  const double t0 = times[j - 1];
  const double t1 = times[j];
  const double w = (t - t0) / (t1 - t0);
  if (w == 0.0) return v.states[j - 1];
  return (1.0 - w) * v.states[j - 1] + w * v.states[j];
}

/// A state of the ball: φ + radius·ξ/‖ξ‖ for a seeded random direction ξ.
StateVector ball_sample(const Scenario& scenario, const StateVector& center, double radius, std::uint64_t seed) {
  StateVector xi = make_profile(scenario, "random", seed);
  xi -= make_profile(scenario, "ones");
  xi.samples().array() += 0.05 * ((seed % 2 == 0) ? 1.0 : -1.0);
  const double nx = norm_E0(xi);
  if (nx == 0.0) return center;
  return center + (radius / nx) * xi;
}

Trajectory constant_trajectory(const std::vector<double>& times, const StateVector& phi) {
  return {times, std::vector<StateVector>(times.size(), phi)};
}

double max_over(const Trajectory& u, const std::function<double(const StateVector&)>& f) {
  double worst = 0.0;
  for (const auto& s : u.states) worst = std::max(worst, f(s));
  return worst;
}

}  // namespace

QuasilinearProblem norm_coupled_diffusion(const Scenario& scenario, double epsilon, double r0,
                                          const StateVector& phi) {
  if (!(epsilon >= 0.0)) throw ValidationError("coupling epsilon must be nonnegative");
  if (!(r0 > 0.0)) throw ValidationError("ball radius must be positive");
  require_on_grid(phi, scenario, "ball centre");
  const OperatorField base = scenario.op();
  auto op = [base, epsilon](const StateVector& v, double t, double a) -> Matrix {
    const Matrix m = base(t, a);
    if (epsilon == 0.0) return m;
    return (1.0 + epsilon * norm_E0(v)) * m;
  };
  double sup = 0.0;
  const int t_samples = 8 * scenario.time_grid().n_time();
  const auto ages = operator_ages(scenario.age_grid());
  for (int k = 0; k <= t_samples; ++k) {
    const double t = scenario.horizon() * k / t_samples;
    for (double a : ages) sup = std::max(sup, operator_norm(base(t, a), scenario.spatial_norm()));
  }
  return QuasilinearProblem{op, epsilon * sup, r0, phi, std::nullopt};
}

LipschitzCheck check_lipschitz(const QuasilinearProblem& problem, const Scenario& scenario, int samples,
                               std::uint64_t seed) {
  if (samples < 1) throw ContractViolation("check_lipschitz requires samples >= 1");
  LipschitzCheck out{0.0, problem.lipschitz_L, true};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const TimeGrid& tg = scenario.time_grid();
  const AgeGrid& grid = scenario.age_grid();
  const int age_stride = std::max(1, grid.n_age() / 8);
  for (int k = 0; k < samples; ++k) {
    const StateVector v1 =
        ball_sample(scenario, problem.ball_center, unit(rng) * problem.ball_radius, rng());
    const StateVector v2 =
        ball_sample(scenario, problem.ball_center, unit(rng) * problem.ball_radius, rng());
    const double dv = norm_E0(v1 - v2);
    if (dv == 0.0) continue;
    const int m = std::uniform_int_distribution<int>(0, tg.n_time())(rng);
    const double t = tg.node(m);
    for (int i = 0; i < grid.size(); i += age_stride) {
      const double a = grid.node(i);
      const Matrix diff = problem.operator_of_state(v1, t, a) - problem.operator_of_state(v2, t, a);
      out.observed = std::max(out.observed, operator_norm(diff, scenario.spatial_norm()) / dv);
    }
  }
  out.within = out.observed <= out.declared * (1.0 + 1e-9) + 1e-14;
  return out;
}

OperatorField frozen_state_operator(const QuasilinearProblem& problem, const Trajectory& v) {
  auto path = std::make_shared<const Trajectory>(v);
  auto op = problem.operator_of_state;
  const int dim = v.states.front().dim();
  return OperatorField(dim, [path, op](double t, double a) { return op(interpolate(*path, t), t, a); });
}

StabilityConstants estimate_ball_constants(const Scenario& scenario, const QuasilinearProblem& problem,
                                           int samples, std::uint64_t seed) {
  const StateVector& c = problem.ball_center;
  const double r = problem.ball_radius;
  const double nc = norm_E0(c);
  std::vector<StateVector> states{c};
  if (nc > 0.0) {
    states.push_back((1.0 + r / nc) * c);
    states.push_back(std::max(0.0, 1.0 - r / nc) * c);
  }
  states.push_back(ball_sample(scenario, c, r, seed + 1));
  states.push_back(ball_sample(scenario, c, r, seed + 2));

  StabilityConstants out;
  bool first = true;
  for (const auto& v : states) {
    const Trajectory fixed{{0.0}, {v}};
    const Scenario frozen = scenario.with_operator(frozen_state_operator(problem, fixed), scenario.name());
    const StabilityConstants e = estimate_constants(frozen, samples, seed);
    if (first) {
      out = e;
      first = false;
      continue;
    }
    out.M = std::max(out.M, e.M);
    out.varpi = std::max(out.varpi, e.varpi);
    out.M0 = std::max(out.M0, e.M0);
    out.M1 = std::max(out.M1, e.M1);
    out.omega0 = std::max(out.omega0, e.omega0);
    out.omega1 = std::max(out.omega1, e.omega1);
  }
  return out;
}

DependenceGap continuous_dependence_gap(const Scenario& scenario, const OperatorField& a1, const OperatorField& a2,
                                        const StateVector& phi, double s, double t, int n,
                                        const StabilityConstants& constants) {
  if (!(s <= t)) throw ContractViolation("continuous_dependence_gap requires s <= t");
  const Scenario sc1 = scenario.with_operator(a1, scenario.name());
  const Scenario sc2 = scenario.with_operator(a2, scenario.name());
  DependenceGap out;
  out.lhs = norm_E0(apply_Un(sc1, n, t, s, phi) - apply_Un(sc2, n, t, s, phi));
  double integral = 0.0;
  for (int j = 0; j < n; ++j) {
    const double lo = std::max(breakpoint(scenario, n, j), s);
    const double hi = std::min(breakpoint(scenario, n, j + 1), t);
    if (hi <= lo) continue;
    integral += (hi - lo) * sup_operator_gap(scenario, a1, a2, breakpoint(scenario, n, j));
  }
  out.rhs = constants.M0 * constants.M1 * std::exp(constants.eta() * (t - s)) * norm_E1(phi, scenario) * integral;
  return out;
}

Trajectory picard_map(const Scenario& scenario, const QuasilinearProblem& problem, const Trajectory& u, int n) {
  const Scenario frozen = scenario.with_operator(frozen_state_operator(problem, u), scenario.name());
  return evolve_trajectory(frozen, n, u.times, problem.ball_center);
}

double sup_distance(const Trajectory& u, const Trajectory& v) {
  if (u.states.size() != v.states.size()) throw ContractViolation("trajectories differ in length");
  double worst = 0.0;
  for (std::size_t m = 0; m < u.states.size(); ++m) worst = std::max(worst, norm_E0(u.states[m] - v.states[m]));
  return worst;
}

QuasilinearResult solve_quasilinear(const Scenario& scenario, const QuasilinearProblem& problem, double tol,
                                    const QuasilinearOptions& options) {
  if (!(tol > 0.0)) throw ContractViolation("solve_quasilinear requires tol > 0");
  if (options.max_iter < 1) throw ContractViolation("max_iter must be >= 1");
  const StateVector& phi = problem.ball_center;
  require_on_grid(phi, scenario, "quasilinear initial state");
  if (problem.lp_mode && !(problem.lp_mode->p > 1.0)) throw ContractViolation("lp_mode requires p > 1");

  QuasilinearResult out;
  out.n = options.n == 0 ? finest_dyadic_partition(scenario) : options.n;
  if (!partition_admissible(scenario, out.n))
    throw AlignmentError("quasilinear partition n = " + std::to_string(out.n) + " is not admissible");
  out.constants = options.constants ? *options.constants
                                    : estimate_ball_constants(scenario, problem, options.constant_samples,
                                                              options.seed);
  out.lipschitz = check_lipschitz(problem, scenario, 16, options.seed);

  const double tau = scenario.time_grid().step();
  const double start = options.horizon > 0.0 ? options.horizon : scenario.horizon();
  int steps = static_cast<int>(std::lround(start / tau));
  if (steps < 1 || std::abs(steps * tau - start) > 1e-9 * std::max(1.0, start))
    throw AlignmentError("quasilinear horizon must be a positive multiple of the time step");

  const double r0 = problem.ball_radius;
  const double phi_e1 = norm_E1(phi, scenario);
  const double phi_lp = problem.lp_mode ? lp_norm(phi, scenario, problem.lp_mode->p) : 0.0;
  const double R = out.constants.M0 * out.constants.M1;
  const double eta = out.constants.eta();
  const Scenario linear = scenario;

  auto excursion = [&](const Trajectory& u) {
    return max_over(u, [&](const StateVector& v) { return norm_E0(v - phi); });
  };
  auto lp_ratio = [&](const Trajectory& u) {
    if (!problem.lp_mode) return 0.0;
    return max_over(u, [&](const StateVector& v) { return lp_norm(v, scenario, problem.lp_mode->p); }) /
           phi_lp;
  };
  auto lp_limit = [&]() { return problem.lp_mode ? problem.lp_mode->N0 + r0 : 0.0; };

  for (;;) {
    if (steps < 1) {
      std::ostringstream msg;
      msg << "quasilinear horizon fell below one time step (" << tau
          << "); reduce the Lipschitz constant or refine the grids";
      std::vector<double> gaps;
      for (const auto& r : out.iterates) gaps.push_back(r.sup_gap);
      throw ConvergenceError(msg.str(), gaps);
    }
    const double T_phi = steps * tau;
    std::vector<double> times(steps + 1);
    for (int m = 0; m <= steps; ++m) times[m] = m * tau;

    std::vector<IterateRecord> records;
    std::vector<Trajectory> kept;
    std::string halt;
    Trajectory prev = options.initial == InitialIterate::constant
                          ? constant_trajectory(times, phi)
                          : evolve_trajectory(linear, out.n, times, phi);
    if (excursion(prev) > r0) halt = "initial iterate leaves the ball";
    if (halt.empty() && problem.lp_mode && lp_ratio(prev) > lp_limit()) halt = "initial iterate leaves the L_p ball";
    std::optional<Trajectory> before;
    bool converged = false;
    for (int k = 1; halt.empty() && k <= options.max_iter; ++k) {
      Trajectory next = picard_map(scenario, problem, prev, out.n);
      IterateRecord rec;
      rec.sup_gap = sup_distance(next, prev);
      rec.ratio = records.empty() ? std::numeric_limits<double>::quiet_NaN() : rec.sup_gap / records.back().sup_gap;
      rec.ball_excursion = excursion(next);
      rec.lp_ratio = lp_ratio(next);
      if (before) {
        // ‖u^{k+1} − u^k‖(t) against L·R·e^{ηt}‖φ‖_E1·∫₀ᵗ‖u^k − u^{k−1}‖, the
        // integral taken over Kato cells at their frozen times.
        for (std::size_t m = 1; m < times.size(); ++m) {
          const double t = times[m];
          double integral = 0.0;
          for (int j = 0; j < out.n; ++j) {
            const double lo = breakpoint(scenario, out.n, j);
            const double hi = std::min(breakpoint(scenario, out.n, j + 1), t);
            if (hi <= lo) break;
            integral += (hi - lo) * norm_E0(interpolate(prev, lo) - interpolate(*before, lo));
          }
          const double rhs = problem.lipschitz_L * R * std::exp(eta * t) * phi_e1 * integral;
          const double lhs = norm_E0(next.states[m] - prev.states[m]);
          const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
          rec.dependence_ratio = std::max(rec.dependence_ratio, ratio);
        }
      }
      records.push_back(rec);
      if (rec.ball_excursion > r0) {
        halt = "iterate leaves the ball";
        break;
      }
      if (problem.lp_mode && rec.lp_ratio > lp_limit()) {
        halt = "iterate leaves the L_p ball";
        break;
      }
      if (options.keep_iterates) kept.push_back(next);
      if (rec.sup_gap <= tol) {
        prev = std::move(next);
        converged = true;
        break;
      }
      if (records.size() >= 2 && rec.ratio > 0.9) {
        halt = "contraction factor above 0.9";
        break;
      }
      before = std::move(prev);
      prev = std::move(next);
    }

    if (converged) {
      out.trajectory = std::move(prev);
      out.T_phi = T_phi;
      out.iterations = static_cast<int>(records.size());
      out.iterates = std::move(records);
      out.accepted_iterates = std::move(kept);
      out.fixed_point_residual = sup_distance(picard_map(scenario, problem, out.trajectory, out.n), out.trajectory);
      out.predicted_contraction = problem.lipschitz_L * R * std::exp(eta * T_phi) * phi_e1 * T_phi;
      return out;
    }
    if (halt.empty()) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "Picard iteration did not reach tol " << tol << " in " << options.max_iter << " iterations; gaps:";
      std::vector<double> gaps;
      for (const auto& r : records) {
        msg << ' ' << r.sup_gap;
        gaps.push_back(r.sup_gap);
      }
      throw ConvergenceError(msg.str(), gaps);
    }
    out.halvings.push_back({T_phi, halt});
    out.iterates = std::move(records);
    steps /= 2;
  }
}

}  // namespace kato
