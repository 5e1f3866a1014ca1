#include "verify.hpp"

#include "kato/error.hpp"
#include "kato/kato.hpp"
#include "kato/oracle.hpp"
#include "kato/products.hpp"
#include "kato/profiles.hpp"
#include "kato/propagator.hpp"
#include "kato/renewal.hpp"
#include "kato/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace kato::cli {

namespace {

constexpr double kSlack = 1.05;

class Sampler {
 public:
  Sampler(const Scenario& scenario, std::uint64_t seed) : scenario_(scenario), rng_(seed) {}

  double aligned(double max) {
    const double h = scenario_.age_grid().step();
    const int k = static_cast<int>(std::floor(max / h + 1e-9));
    return std::uniform_int_distribution<int>(0, k)(rng_) * h;
  }
  double time_node() {
    const TimeGrid& tg = scenario_.time_grid();
    return tg.node(std::uniform_int_distribution<int>(0, tg.n_time())(rng_));
  }
  int age_node() { return std::uniform_int_distribution<int>(0, scenario_.age_grid().n_age())(rng_); }
  StateVector profile() { return make_profile(scenario_, "random", rng_()); }
  std::uint64_t next() { return rng_(); }

 private:
  const Scenario& scenario_;
  std::mt19937_64 rng_;
};

Check le(std::string name, double value, double threshold) {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.threshold = threshold;
  c.pass = value <= threshold;
  return c;
}

Check ge(std::string name, double value, double threshold) {
  Check c = le(std::move(name), value, threshold);
  c.relation = "ge";
  c.pass = value >= threshold;
  return c;
}

/// Implicit Euler steps of the oracle preserve positivity when every
/// I − hA(t, a) is a strictly diagonally dominant Z-matrix.
bool oracle_preserves_positivity(const Scenario& scenario) {
  const AgeGrid& grid = scenario.age_grid();
  const TimeGrid& tg = scenario.time_grid();
  const double h = grid.step();
  for (int m = 0; m <= tg.n_time(); ++m)
    for (int i = 0; i < grid.size(); ++i) {
      const Matrix a = scenario.op()(tg.node(m), grid.node(i));
      const Matrix z = Matrix::Identity(a.rows(), a.cols()) - h * a;
      for (int r = 0; r < z.rows(); ++r) {
        double off = 0.0;
        for (int c = 0; c < z.cols(); ++c) {
          if (c == r) continue;
          if (z(r, c) > 0.0) return false;
          off += -z(r, c);
        }
        if (!(z(r, r) > off)) return false;
      }
    }
  return true;
}

}  // namespace

std::vector<Check> run_verification(const Scenario& scenario, std::uint64_t seed, double tol) {
  Sampler pick(scenario, seed);
  const Tolerances& tols = scenario.tolerances();
  const double a_max = scenario.age_grid().a_max();
  const double horizon = scenario.horizon();
  std::vector<Check> checks;

  {
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const StateVector phi = pick.profile();
      const double s1 = pick.aligned(a_max), s2 = pick.aligned(a_max);
      worst = std::max(worst, semigroup_property_residual(scenario, pick.time_node(), s1, s2, phi) / norm_E0(phi));
    }
    checks.push_back(le("semigroup_law", worst, tols.semigroup));
  }
  {
    double worst = 0.0;
    const StateVector phi = pick.profile();
    for (int k = 0; k < 5; ++k)
      worst = std::max(worst, birth_identity_residual(scenario, pick.time_node(), phi, pick.aligned(2.0 * a_max)));
    checks.push_back(le("volterra_identity", worst, tols.volterra));
  }
  {
    const StateVector psi = project_to_Y(scenario, pick.profile());
    checks.push_back(le("projection_in_Y", check_membership_Y(psi, scenario, tols.membership).residual,
                        tols.membership));
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      int ids[3] = {pick.age_node(), pick.age_node(), pick.age_node()};
      std::sort(ids, ids + 3);
      const double h = scenario.age_grid().step();
      const Vector v0 = pick.profile().sample(0);
      worst = std::max(worst, cocycle_residual(scenario, pick.time_node(), ids[0] * h, ids[1] * h, ids[2] * h, v0) /
                                  spatial_norm(v0, scenario.spatial_norm()));
    }
    checks.push_back(le("propagator_cocycle", worst, tols.cocycle));
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const ProductPlan plan = random_plan(scenario, 1 + k, 0.5 * a_max, pick.next());
      const StateVector phi = pick.profile();
      worst = std::max(worst, norm_E0(apply_product_direct(scenario, plan, phi) -
                                      apply_product_sequential(scenario, plan, phi)) /
                                  norm_E0(phi));
    }
    checks.push_back(le("product_formula", worst, tols.composition));
  }

  const StabilityConstants constants = estimate_constants(scenario, 32, seed).inflated(kSlack);
  {
    double m0 = INFINITY, m1 = INFINITY, chain = INFINITY, lp = INFINITY;
    for (int k = 0; k < 10; ++k) {
      const ProductPlan plan = random_plan(scenario, 1 + k % 5, 0.5 * a_max, pick.next());
      const StateVector phi = pick.profile();
      m0 = std::min(m0, stability_margin(scenario, plan, phi, constants, 0));
      m1 = std::min(m1, stability_margin(scenario, plan, phi, constants, 1));
      chain = std::min(chain, birth_chain_margin(scenario, plan, phi, constants, 0, pick.aligned(a_max)));
      lp = std::min(lp, lp_stability_margin(scenario, plan, phi, 2.0, constants, 0));
    }
    checks.push_back(ge("stability_E0", m0, 0.0));
    checks.push_back(ge("stability_E1", m1, 0.0));
    checks.push_back(ge("birth_chain_bound", chain, 0.0));
    checks.push_back(ge("lp_stability", lp, 0.0));
  }

  const StateVector phi = pick.profile();
  const double phi_norm = norm_E0(phi);
  {
    Check c;
    c.name = "kato_convergence";
    c.threshold = tol;
    try {
      const EvolutionResult res = apply_UA(scenario, horizon, 0.0, phi, tol);
      c.value = res.cauchy_gap / phi_norm;
      c.pass = true;
      c.note = "n_used=" + std::to_string(res.n_used);
      checks.push_back(c);
      const double bound = constants.M0 * std::exp((constants.omega0 + constants.M0 * constants.b_norm0) * horizon) *
                           phi_norm;
      checks.push_back(ge("exponential_bound", bound - norm_E0(res.value), 0.0));
    } catch (const ConvergenceError& e) {
      c.value = e.gaps().empty() ? INFINITY : e.gaps().back() / phi_norm;
      c.pass = false;
      c.note = "no convergence";
      checks.push_back(c);
    }
  }
  {
    double t3[3] = {pick.time_node(), pick.time_node(), pick.time_node()};
    std::sort(t3, t3 + 3);
    Check c = le("evolution_cocycle", 0.0, 3.0 * tol);
    try {
      c.value = cocycle_residual_UA(scenario, t3[0], t3[1], t3[2], phi, tol) / phi_norm;
      c.pass = c.value <= c.threshold;
    } catch (const ConvergenceError&) {
      c.value = INFINITY;
      c.pass = false;
      c.note = "no convergence";
    }
    checks.push_back(c);
  }
  {
    Check c = ge("oracle_positivity", 0.0, 0.0);
    if (!oracle_preserves_positivity(scenario)) {
      c.skipped = true;
      c.note = "operator is not positivity preserving";
    } else {
      const StateVector start = make_profile(scenario, "smooth");
      double low = INFINITY;
      for (const auto& u : solve_direct(scenario, start, horizon, 1).states) low = std::min(low, u.samples().minCoeff());
      c.value = low;
      c.pass = low >= 0.0;
    }
    checks.push_back(c);
  }
  return checks;
}

}  // namespace kato::cli
