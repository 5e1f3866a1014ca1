#include "kato/oracle.hpp"

#include "kato/error.hpp"
#include "kato/profiles.hpp"

#include <cmath>
#include <limits>

namespace kato {

Trajectory solve_direct(const Scenario& scenario, const StateVector& phi, double t_end, int record_every) {
  require_on_grid(phi, scenario, "oracle input");
  if (!(t_end >= 0.0) || t_end > scenario.horizon() * (1.0 + 1e-12))
    throw ContractViolation("solve_direct requires 0 <= t_end <= T");
  if (record_every < 0) throw ContractViolation("record_every must be >= 0");
  const AgeGrid& grid = scenario.age_grid();
  const int steps = grid.steps_of(t_end, "t_end");
  const int n = grid.n_age();
  const int d = scenario.dim();
  const double h = grid.step();
  const Matrix eye = Matrix::Identity(d, d);

  Trajectory out;
  out.times.push_back(0.0);
  out.states.push_back(phi);
  StateVector u = phi;
  Matrix& cur = u.samples();
  // The characteristic through (0, 0) carries the birth value, not phi(0).
  cur.col(0) = birth_quadrature(scenario, phi);
  for (int k = 1; k <= steps; ++k) {
    const double t = k * h;
    for (int i = n; i >= 1; --i) cur.col(i) = cur.col(i - 1);
    for (int i = 1; i <= n; ++i) {
      const Matrix a = scenario.op()(t, grid.node(i));
      if (d == 1)
        cur(0, i) /= 1.0 - h * a(0, 0);
      else
        cur.col(i) = (eye - h * a).partialPivLu().solve(cur.col(i));
    }
    // Node 0 still holds the previous boundary value: the lagged birth term.
    cur.col(0) = birth_quadrature(scenario, u);
    const bool keep = k == steps || (record_every > 0 && k % record_every == 0);
    if (keep) {
      out.times.push_back(t);
      out.states.push_back(u);
    }
  }
  return out;
}

double log_growth_rate(const Trajectory& trajectory, double t0, double t1) {
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int count = 0;
  for (std::size_t m = 0; m < trajectory.times.size(); ++m) {
    const double t = trajectory.times[m];
    if (t < t0 - 1e-12 || t > t1 + 1e-12) continue;
    const double y = std::log(norm_E0(trajectory.states[m]));
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++count;
  }
  if (count < 2) throw ContractViolation("log_growth_rate needs at least two samples in the window");
  return (count * sty - st * sy) / (count * stt - st * st);
}

std::vector<CompareRow> compare(const ScenarioConfig& config, const std::string& profile, std::uint64_t seed,
                                double t_end, int refinements, double tol) {
  if (refinements < 2) throw ContractViolation("compare requires refinements >= 2");
  std::vector<CompareRow> rows;
  for (int r = 0; r < refinements; ++r) {
    ScenarioConfig cfg = config;
    cfg.n_age = config.n_age << r;
    const Scenario scenario = build_scenario(cfg);
    const StateVector phi = make_profile(scenario, profile, seed);
    const StateVector direct = solve_direct(scenario, phi, t_end).states.back();
    CompareRow row;
    row.n_age = cfg.n_age;
    row.step = scenario.age_grid().step();
    StateVector evolved = phi;
    try {
      const EvolutionResult res = apply_UA(scenario, t_end, 0.0, phi, tol);
      evolved = res.value;
      row.kato_n = res.n_value;
    } catch (const ConvergenceError&) {
      row.kato_n = finest_dyadic_partition(scenario);
      row.kato_fallback = true;
      evolved = apply_Un(scenario, row.kato_n, t_end, 0.0, phi);
    }
    row.discrepancy = norm_E0(evolved - direct);
    row.order = rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                             : std::log2(rows.back().discrepancy / row.discrepancy);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace kato
