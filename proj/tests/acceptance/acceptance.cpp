// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 0 only
// when every criterion passes.
//
//   kato_acceptance --cli <path to kato-evolve> [--only N]

#include "support.hpp"

#include "kato/error.hpp"
#include "kato/kato.hpp"
#include "kato/oracle.hpp"
#include "kato/products.hpp"
#include "kato/profiles.hpp"
#include "kato/quasilinear.hpp"
#include "kato/renewal.hpp"
#include "kato/semigroup.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace kato;

struct Verdict {
  bool pass = true;
  std::string detail;
};

/// Collects failures and a short summary for one criterion.
class Recorder {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (failures_++ < 4) failed_ << (failed_.tellp() > 0 ? "; " : "") << what;
    }
  }
  void note(const std::string& text) { notes_ << (notes_.tellp() > 0 ? ", " : "") << text; }
  Verdict verdict() const {
    Verdict v{pass_, notes_.str()};
    if (!pass_) v.detail += " | failed: " + failed_.str() + (failures_ > 4 ? " ..." : "");
    return v;
  }

 private:
  bool pass_ = true;
  int failures_ = 0;
  std::ostringstream notes_, failed_;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double aligned(std::mt19937_64& rng, const Scenario& sc, double max) {
  const double h = sc.age_grid().step();
  return std::uniform_int_distribution<int>(0, static_cast<int>(std::floor(max / h + 1e-9)))(rng) * h;
}

double time_node(std::mt19937_64& rng, const Scenario& sc) {
  return sc.time_grid().node(std::uniform_int_distribution<int>(0, sc.time_grid().n_time())(rng));
}

Verdict semigroup_law() {
  Recorder r;
  for (const char* name : {"SCAL0", "DIFF1"}) {
    const auto start = std::chrono::steady_clock::now();
    const Scenario sc = test::preset(name);
    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const StateVector phi = make_profile(sc, "random", rng());
      const double s1 = aligned(rng, sc, 2.0), s2 = aligned(rng, sc, 2.0);
      const double rel = semigroup_property_residual(sc, time_node(rng, sc), s1, s2, phi) / norm_E0(phi);
      worst = std::max(worst, rel);
      r.require(rel <= 1e-6, std::string(name) + " residual " + fmt(rel));
    }
    const double elapsed = seconds_since(start);
    r.require(elapsed < 30.0, std::string(name) + " took " + fmt(elapsed) + " s");
    r.note(std::string(name) + " max " + fmt(worst) + " in " + fmt(elapsed) + " s");
  }
  return r.verdict();
}

Verdict volterra_consistency() {
  Recorder r;
  double worst = 0.0;
  for (const auto& name : preset_names()) {
    const Scenario sc = test::preset(name);
    std::mt19937_64 rng(2);
    const StateVector phi = make_profile(sc, "random", 5);
    for (int k = 0; k < 10; ++k) {
      const double s = aligned(rng, sc, 2.0 * sc.age_grid().a_max());
      const double res = birth_identity_residual(sc, time_node(rng, sc), phi, s);
      worst = std::max(worst, res);
      r.require(res <= 1e-8, name + " s=" + fmt(s) + " residual " + fmt(res));
    }
  }
  r.note("max residual " + fmt(worst) + " over " + std::to_string(preset_names().size()) + " presets");
  return r.verdict();
}

Verdict euler_lotka() {
  Recorder r;
  const double target = 1.5936;
  const double r_star = test::euler_lotka_root(2.0);
  r.require(std::abs(r_star - target) <= 1e-4, "bisection root " + fmt(r_star));
  const Scenario sc = test::preset("SCAL0");
  const StateVector phi = make_profile(sc, "smooth");
  const double semigroup_rate =
      (std::log(norm_E0(apply_semigroup(sc, 0.0, 10.0, phi))) - std::log(norm_E0(apply_semigroup(sc, 0.0, 8.0, phi)))) /
      2.0;
  const double oracle_rate = log_growth_rate(solve_direct(sc, phi, 10.0, 10), 8.0, 10.0);
  for (auto [label, rate] : {std::pair{"semigroup", semigroup_rate}, std::pair{"oracle", oracle_rate}})
    r.require(std::abs(rate - target) <= 0.01 * target, std::string(label) + " rate " + fmt(rate));
  r.note("r*=" + std::to_string(r_star) + ", semigroup " + std::to_string(semigroup_rate) + ", oracle " +
         std::to_string(oracle_rate));
  return r.verdict();
}

Verdict product_equivalence() {
  Recorder r;
  double worst = 0.0;
  for (const auto& name : preset_names()) {
    const Scenario sc = test::preset(name);
    std::mt19937_64 rng(4);
    for (int k = 0; k < 20; ++k) {
      const ProductPlan plan = random_plan(sc, 1 + k % 5, sc.age_grid().a_max(), rng());
      const StateVector phi = make_profile(sc, "random", rng());
      const double rel =
          norm_E0(apply_product_direct(sc, plan, phi) - apply_product_sequential(sc, plan, phi)) / norm_E0(phi);
      worst = std::max(worst, rel);
      r.require(rel <= 1e-8, name + " plan " + std::to_string(k) + " " + fmt(rel));
    }
  }
  r.note("max relative gap " + fmt(worst) + ", 20 plans per preset");
  return r.verdict();
}

Verdict stability_bounds() {
  Recorder r;
  for (const auto& name : preset_names()) {
    const Scenario sc = test::preset(name);
    const StabilityConstants c = estimate_constants(sc, 64, 0).inflated(1.05);
    std::mt19937_64 rng(5);
    double low = INFINITY;
    const double a_max = sc.age_grid().a_max();
    for (int k = 0; k < 50; ++k) {
      const ProductPlan plan = random_plan(sc, 1 + k % 5, a_max, rng());
      const StateVector phi = make_profile(sc, "random", rng());
      const double m[] = {stability_margin(sc, plan, phi, c, 0), stability_margin(sc, plan, phi, c, 1),
                          birth_chain_margin(sc, plan, phi, c, 0, 0.5 * a_max),
                          birth_chain_margin(sc, plan, phi, c, 1, 0.5 * a_max),
                          lp_stability_margin(sc, plan, phi, 2.0, c, 0)};
      for (double x : m) {
        low = std::min(low, x);
        r.require(x >= 0.0, name + " plan " + std::to_string(k) + " margin " + fmt(x));
      }
    }
    r.note(name + " min " + fmt(low));
  }
  return r.verdict();
}

Verdict kato_convergence() {
  Recorder r;
  const Scenario sc = test::preset("DIFF1");
  const StateVector phi = make_profile(sc, "smooth");
  const auto rows = convergence_study(sc, 1.0, 0.0, phi, 1, 64);
  std::string ratios;
  for (std::size_t i = rows.size() - 3; i < rows.size(); ++i) {
    r.require(rows[i].ratio >= 1.6 && rows[i].ratio <= 2.4,
              "ratio " + fmt(rows[i].ratio) + " at n=" + std::to_string(rows[i].n));
    ratios += (ratios.empty() ? "" : "/") + fmt(rows[i].ratio);
  }
  r.note("last three ratios " + ratios);
  try {
    const EvolutionResult res = apply_UA(sc, 1.0, 0.0, phi, 1e-5);
    r.require(res.n_value <= 64, "n=" + std::to_string(res.n_value));
    r.note("apply_UA accepted n_used=" + std::to_string(res.n_used) + " value n=" + std::to_string(res.n_value));
  } catch (const ConvergenceError& e) {
    r.require(false, e.what());
  }
  return r.verdict();
}

Verdict evolution_axioms() {
  Recorder r;
  const double tol = 1e-5;
  double worst = 0.0, bound_low = INFINITY;
  int runs = 0;
  for (const char* name : {"SCAL0", "DIFF1"}) {
    const Scenario sc = test::preset(name);
    const StabilityConstants c = estimate_constants(sc, 64, 0).inflated(1.05);
    const double rate = c.omega0 + c.M0 * c.b_norm0;
    auto evolve = [&](double t, double s, const StateVector& v) {
      const EvolutionResult res = apply_UA(sc, t, s, v, tol);
      const double margin = c.M0 * std::exp(rate * (t - s)) * norm_E0(v) - norm_E0(res.value);
      bound_low = std::min(bound_low, margin / norm_E0(v));
      r.require(margin >= 0.0, std::string(name) + " exponential bound " + fmt(margin));
      ++runs;
      return res.value;
    };
    std::mt19937_64 rng(7);
    for (int k = 0; k < 20; ++k) {
      double t3[3] = {time_node(rng, sc), time_node(rng, sc), time_node(rng, sc)};
      std::sort(t3, t3 + 3);
      const StateVector phi = make_profile(sc, "random", rng());
      try {
        const StateVector direct = evolve(t3[2], t3[0], phi);
        const StateVector split = evolve(t3[2], t3[1], evolve(t3[1], t3[0], phi));
        const double rel = norm_E0(direct - split) / norm_E0(phi);
        worst = std::max(worst, rel);
        r.require(rel <= 3.0 * tol, std::string(name) + " cocycle " + fmt(rel));
      } catch (const ConvergenceError& e) {
        r.require(false, std::string(name) + ": " + e.what());
      }
    }
  }
  r.note("max cocycle " + fmt(worst) + " (limit " + fmt(3.0 * tol) + "), min relative bound margin " +
         fmt(bound_low) + " over " + std::to_string(runs) + " runs");
  return r.verdict();
}

Verdict differentiability() {
  Recorder r;
  ScenarioConfig cfg = preset_config("DIFF1");
  cfg.n_age = 80;
  const Scenario sc = build_scenario(cfg);
  const StateVector psi = project_to_Y(sc, make_profile(sc, "smooth"), {20});
  r.require(check_membership_Y(psi, sc, 1e-8).member, "projected state is not in the core");
  const std::vector<double> hs{0.1, 0.05, 0.025};
  for (auto [label, kind, t, s] : {std::tuple{"right", DerivativeKind::right, 1.0, 0.0},
                                   std::tuple{"s", DerivativeKind::s, 1.0, 0.25}}) {
    const DerivativeStudy st = derivative_study(sc, kind, t, s, psi, hs);
    r.require(st.monotone, std::string(label) + " residuals not monotone");
    r.require(st.extrapolated <= 2.0 * st.floor,
              std::string(label) + " limit " + fmt(st.extrapolated) + " > 2x floor " + fmt(st.floor));
    r.note(std::string(label) + ": " + fmt(st.residuals[0]) + "/" + fmt(st.residuals[1]) + "/" +
           fmt(st.residuals[2]) + ", limit " + fmt(st.extrapolated) + ", floor " + fmt(st.floor));
  }
  return r.verdict();
}

Verdict oracle_equivalence() {
  Recorder r;
  for (const char* name : {"SCAL0", "DIFF1"}) {
    const auto rows = compare(preset_config(name), "smooth", 0, 1.0, 3, 1e-6);
    std::string orders;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      r.require(rows[i].order >= 0.8, std::string(name) + " order " + fmt(rows[i].order));
      orders += (orders.empty() ? "" : "/") + fmt(rows[i].order);
    }
    r.note(std::string(name) + " orders " + orders + " (last gap " + fmt(rows.back().discrepancy) + ")");
  }
  return r.verdict();
}

Verdict quasilinear() {
  Recorder r;
  const Scenario sc = test::preset("DIFF1");
  StateVector phi = make_profile(sc, "alternating");
  phi *= 1.0 / norm_E0(phi);
  const double tol = 1e-6, r0 = 1.0;
  const QuasilinearProblem p = norm_coupled_diffusion(sc, 0.05, r0, phi);
  QuasilinearOptions opt;
  opt.seed = 10;
  try {
    const QuasilinearResult a = solve_quasilinear(sc, p, tol, opt);
    opt.initial = InitialIterate::linear;
    opt.constants = a.constants;
    const QuasilinearResult b = solve_quasilinear(sc, p, tol, opt);
    r.require(a.lipschitz.within, "sampled Lipschitz ratio " + fmt(a.lipschitz.observed) + " above declared");
    r.require(a.fixed_point_residual <= 2.0 * tol, "fixed-point residual " + fmt(a.fixed_point_residual));
    r.require(b.fixed_point_residual <= 2.0 * tol, "second start residual " + fmt(b.fixed_point_residual));
    const double agree = sup_distance(a.trajectory, b.trajectory);
    r.require(a.T_phi == b.T_phi && agree <= 4.0 * tol, "initial iterates disagree by " + fmt(agree));
    double worst_ratio = 0.0, worst_dep = 0.0;
    for (const QuasilinearResult* res : {&a, &b}) {
      for (std::size_t k = 0; k < res->iterates.size(); ++k) {
        const IterateRecord& it = res->iterates[k];
        r.require(it.ball_excursion <= r0, "iterate leaves the ball: " + fmt(it.ball_excursion));
        if (k >= 1) {
          worst_ratio = std::max(worst_ratio, it.ratio);
          r.require(it.ratio <= 1.2 * res->predicted_contraction,
                    "gap ratio " + fmt(it.ratio) + " vs predicted " + fmt(res->predicted_contraction));
        }
        worst_dep = std::max(worst_dep, it.dependence_ratio);
        r.require(it.dependence_ratio <= 1.05, "dependence ratio " + fmt(it.dependence_ratio));
      }
    }
    r.note("T_phi " + fmt(a.T_phi) + ", iterations " + std::to_string(a.iterations) + "/" +
           std::to_string(b.iterations) + ", max gap ratio " + fmt(worst_ratio) + " (q " +
           fmt(a.predicted_contraction) + "), residual " + fmt(a.fixed_point_residual) + ", agreement " +
           fmt(agree) + ", dependence " + fmt(worst_dep));
  } catch (const Error& e) {
    r.require(false, e.what());
  }
  return r.verdict();
}

std::string capture(const std::string& command, int& status) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  status = pclose(pipe);
  return out;
}

Verdict determinism(const std::string& cli) {
  Recorder r;
  if (cli.empty()) {
    r.require(false, "no --cli executable given");
    return r.verdict();
  }
  const std::string cmd = "\"" + cli + "\" verify --preset DIFF1 --seed 7";
  int s1 = 0, s2 = 0;
  const std::string a = capture(cmd, s1);
  const std::string b = capture(cmd, s2);
  r.require(s1 == 0 && s2 == 0, "verify exit status " + std::to_string(s1) + "/" + std::to_string(s2));
  r.require(!a.empty() && a == b, "reports differ");
  r.note(std::to_string(a.size()) + " identical bytes");
  return r.verdict();
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--cli") && i + 1 < argc) {
      cli = argv[++i];
    } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: kato_acceptance --cli <kato-evolve> [--only N]\n";
      return 1;
    }
  }

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"semigroup law", semigroup_law},
      {"Volterra consistency", volterra_consistency},
      {"Euler-Lotka growth", euler_lotka},
      {"product-formula equivalence", product_equivalence},
      {"stability bounds", stability_bounds},
      {"Kato convergence", kato_convergence},
      {"evolution-system axioms", evolution_axioms},
      {"differentiability", differentiability},
      {"oracle equivalence", oracle_equivalence},
      {"quasilinear solver", quasilinear},
      {"determinism", [&] { return determinism(cli); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && only != static_cast<int>(i + 1)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("%s  %2zu  %-28s %6.1fs  %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                seconds_since(start), v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
