#include "kato/products.hpp"

#include "kato/error.hpp"
#include "kato/parallel.hpp"
#include "kato/propagator.hpp"
#include "kato/renewal.hpp"
#include "kato/semigroup.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <string>

namespace kato {

double ProductPlan::total_duration() const {
  double s = 0.0;
  for (double d : durations) s += d;
  return s;
}

ProductPlan parse_plan(std::string_view text) {
  ProductPlan plan;
  auto parse_number = [](std::string_view token) {
    try {
      std::size_t used = 0;
      const std::string s(token);
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ValidationError("plan: cannot parse number '" + std::string(token) + "'");
    }
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, comma - pos);
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos)
      throw ValidationError("plan: expected t:s pairs separated by commas, got '" + std::string(item) + "'");
    plan.times.push_back(parse_number(item.substr(0, colon)));
    plan.durations.push_back(parse_number(item.substr(colon + 1)));
    pos = comma + 1;
  }
  return plan;
}

std::vector<int> validate_plan(const Scenario& scenario, const ProductPlan& plan) {
  if (plan.times.empty()) throw ValidationError("plan must have at least one factor");
  if (plan.times.size() != plan.durations.size())
    throw ValidationError("plan times and durations differ in length");
  const double horizon = scenario.horizon();
  std::vector<int> steps;
  for (int j = 0; j < plan.size(); ++j) {
    const double t = plan.times[j];
    if (!(t >= 0.0 && t <= horizon * (1.0 + 1e-12)))
      throw ValidationError("plan time " + std::to_string(t) + " outside [0, T]");
    if (j > 0 && t < plan.times[j - 1]) throw ValidationError("plan times must be nondecreasing");
    if (!(plan.durations[j] >= 0.0)) throw ValidationError("plan durations must be nonnegative");
    steps.push_back(scenario.age_grid().steps_of(plan.durations[j], "plan duration"));
  }
  return steps;
}

namespace {

class DirectEvaluator {
 public:
  DirectEvaluator(const Scenario& scenario, const ProductPlan& plan, const StateVector& phi)
      : scenario_(scenario), plan_(plan), phi_(phi), m_(validate_plan(scenario, plan)) {
    const int n = plan.size();
    suffix_.assign(n + 2, 0);
    for (int k = n; k >= 1; --k) suffix_[k] = suffix_[k + 1] + m_[k - 1];
    for (int j = 0; j < n; ++j) props_.push_back(propagator_at(scenario, plan.times[j]));
  }

  /// ∏_{j=len}^{1} S φ, evaluated by the closed form with a memo per prefix length.
  const StateVector& prefix(int len) {
    auto it = prefixes_.find(len);
    if (it != prefixes_.end()) return it->second;
    if (len == 0) return prefixes_.emplace(0, phi_).first->second;

    // Suffix sums of the length-len prefix plan.
    std::vector<int> r(len + 2, 0);
    for (int k = len; k >= 1; --k) r[k] = r[k + 1] + m_[k - 1];

    // Birth trajectories needed by this prefix, computed before the node loop.
    for (int k = 1; k <= len; ++k)
      if (m_[k - 1] > 0) birth(k);

    const AgeGrid& grid = scenario_.age_grid();
    StateVector out = scenario_.zero_state();
    parallel_for(grid.size(), [&](int i) { out.sample(i) = node_value(len, r, i); });
    return prefixes_.emplace(len, std::move(out)).first->second;
  }

 private:
  /// B^{t_k} of the (k−1)-fold product, solved far enough for every prefix.
  const BirthTrajectory& birth(int k) {
    auto it = births_.find(k);
    if (it != births_.end()) return it->second;
    const StateVector& base = prefix(k - 1);
    auto march = detail::march_renewal(scenario_, *props_[k - 1], base, suffix_[k]);
    return births_.emplace(k, std::move(march.birth)).first->second;
  }

  Vector node_value(int len, const std::vector<int>& r, int i) const {
    if (i == 0) {
      int k = len;
      while (k >= 1 && m_[k - 1] == 0) --k;
      if (k == 0) return phi_.sample(0);
      return births_.at(k).values[m_[k - 1]];
    }
    if (r[1] < i) {
      Vector v = phi_.sample(i - r[1]);
      for (int j = 1; j <= len; ++j) props_[j - 1]->advance(i - r[j], i - r[j + 1], v);
      return v;
    }
    int k = len;
    while (!(r[k + 1] < i && i <= r[k])) --k;
    const Vector& b = births_.at(k).values[r[k] - i];
    Vector v = props_[k - 1]->from_origin(i - r[k + 1]) * b;
    for (int j = k + 1; j <= len; ++j) props_[j - 1]->advance(i - r[j], i - r[j + 1], v);
    return v;
  }

  const Scenario& scenario_;
  const ProductPlan& plan_;
  const StateVector& phi_;
  std::vector<int> m_;
  std::vector<int> suffix_;
  std::vector<std::shared_ptr<const Propagator>> props_;
  std::map<int, StateVector> prefixes_;
  std::map<int, BirthTrajectory> births_;
};

double exp_bound(const StabilityConstants& c, int ell, double span) {
  const double m = c.M_ell(ell);
  return m * std::exp((c.omega_ell(ell) + c.b_norm(ell) * m) * span);
}

}  // namespace

StateVector apply_product_direct(const Scenario& scenario, const ProductPlan& plan, const StateVector& phi) {
  require_on_grid(phi, scenario, "product input");
  DirectEvaluator eval(scenario, plan, phi);
  return eval.prefix(plan.size());
}

StateVector apply_product_sequential(const Scenario& scenario, const ProductPlan& plan, const StateVector& phi) {
  require_on_grid(phi, scenario, "product input");
  validate_plan(scenario, plan);
  StateVector v = phi;
  for (int j = 0; j < plan.size(); ++j) v = apply_semigroup(scenario, plan.times[j], plan.durations[j], v);
  return v;
}

double stability_margin(const Scenario& scenario, const ProductPlan& plan, const StateVector& phi,
                        const StabilityConstants& constants, int ell) {
  const StateVector out = apply_product_sequential(scenario, plan, phi);
  const double bound = exp_bound(constants, ell, plan.total_duration()) * norm_ell(phi, scenario, ell);
  return bound - norm_ell(out, scenario, ell);
}

double birth_chain_margin(const Scenario& scenario, const ProductPlan& plan, const StateVector& phi,
                          const StabilityConstants& constants, int ell, double s) {
  validate_plan(scenario, plan);
  const int n = plan.size();
  ProductPlan head{{plan.times.begin(), plan.times.end() - 1}, {plan.durations.begin(), plan.durations.end() - 1}};
  const StateVector base = n > 1 ? apply_product_sequential(scenario, head, phi) : phi;
  const BirthTrajectory b = solve_birth(scenario, plan.times.back(), base, s);
  const int k = scenario.age_grid().steps_of(s, "s");
  const double lhs = spatial_norm_ell(b.at(k), scenario, ell);
  const double m = constants.M_ell(ell);
  const double rhs = constants.b_norm(ell) * m *
                     std::exp((constants.omega_ell(ell) + constants.b_norm(ell) * m) * (s + head.total_duration())) *
                     norm_ell(phi, scenario, ell);
  return rhs - lhs;
}

LpConstants lp_constants(const StabilityConstants& c, int ell, double p) {
  if (!(p > 1.0)) throw ContractViolation("L_p stability requires p > 1");
  const double m = c.M_ell(ell);
  const double b = c.b_norm(ell);
  const double np = std::pow(m, p) + (b > 0.0 ? std::pow(b, p - 1.0) * std::pow(m, 2.0 * p - 1.0) / p : 0.0);
  return {std::pow(np, 1.0 / p), c.omega_ell(ell) + b * m};
}

double lp_stability_margin(const Scenario& scenario, const ProductPlan& plan, const StateVector& phi,
                           double p, const StabilityConstants& constants, int ell) {
  const LpConstants lc = lp_constants(constants, ell, p);
  const StateVector out = apply_product_sequential(scenario, plan, phi);
  const double base = std::max(lp_norm(phi, scenario, p, ell), norm_ell(phi, scenario, ell));
  return lc.N * std::exp(lc.xi * plan.total_duration()) * base - lp_norm(out, scenario, p, ell);
}

StabilityConstants estimate_constants(const Scenario& scenario, int samples, std::uint64_t seed) {
  if (samples < 1) throw ContractViolation("estimate_constants requires samples >= 1");
  const AgeGrid& grid = scenario.age_grid();
  const TimeGrid& tg = scenario.time_grid();
  const int n_age = grid.n_age();

  // (M, ϖ): frozen propagators at the start, middle and end of the horizon.
  StabilityConstants out;
  out.M = 1.0;
  out.varpi = -std::numeric_limits<double>::infinity();
  for (double t : {0.0, 0.5 * tg.horizon(), tg.horizon()}) {
    const StabilityConstants c = estimate_bounds(scenario, t, std::max(1, samples / 4), seed);
    out.M = std::max(out.M, c.M);
    out.varpi = std::max(out.varpi, c.varpi);
  }

  struct Sample {
    double span = 0.0;
    double norm0 = 0.0;
    double norm1 = 0.0;
  };
  std::vector<Sample> draws(samples);
  std::vector<std::uint64_t> seeds(samples);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto& s : seeds) s = rng();

  parallel_for(samples, [&](int idx) {
    std::mt19937_64 local(seeds[idx]);
    std::uniform_int_distribution<int> factors(1, 4);
    std::uniform_int_distribution<int> time_node(0, tg.n_time());
    std::uniform_int_distribution<int> age_node(0, n_age);
    const int n = idx == 0 ? 1 : factors(local);
    std::vector<int> times(n);
    for (int& t : times) t = time_node(local);
    std::sort(times.begin(), times.end());
    Matrix product = Matrix::Identity(scenario.dim(), scenario.dim());
    double span = 0.0;
    for (int j = 0; j < n; ++j) {
      int lo = age_node(local), hi = age_node(local);
      if (idx == 0) lo = 0, hi = n_age;
      if (lo > hi) std::swap(lo, hi);
      const auto prop = propagator_at(scenario, tg.node(times[j]));
      product = prop->matrix(lo, hi) * product;
      span += (hi - lo) * grid.step();
    }
    draws[idx] = {span, induced_norm(product, scenario, 0), induced_norm(product, scenario, 1)};
  });

  std::vector<double> spans, n0, n1;
  for (const auto& d : draws) {
    spans.push_back(d.span);
    n0.push_back(d.norm0);
    n1.push_back(d.norm1);
  }
  const auto [m0, w0] = fit_exponential_bound(spans, n0, 0.5 * grid.a_max());
  const auto [m1, w1] = fit_exponential_bound(spans, n1, 0.5 * grid.a_max());
  out.M0 = m0;
  out.omega0 = w0;
  out.M1 = m1;
  out.omega1 = w1;
  out.b_norm0 = birth_norm(scenario, 0);
  out.b_norm1 = birth_norm(scenario, 1);
  out.source = ConstantsSource::estimated;
  return out;
}

ProductPlan random_plan(const Scenario& scenario, int n, double max_duration, std::uint64_t seed) {
  if (n < 1) throw ContractViolation("random_plan requires n >= 1");
  const AgeGrid& grid = scenario.age_grid();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> when(0.0, scenario.horizon());
  const int max_steps = std::max(0, static_cast<int>(std::floor(max_duration / grid.step() + 1e-9)));
  std::uniform_int_distribution<int> steps(0, max_steps);
  ProductPlan plan;
  for (int j = 0; j < n; ++j) {
    plan.times.push_back(when(rng));
    plan.durations.push_back(steps(rng) * grid.step());
  }
  std::sort(plan.times.begin(), plan.times.end());
  return plan;
}

}  // namespace kato
