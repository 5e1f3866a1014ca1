#include "cli.hpp"

#include "verify.hpp"

#include "kato/config.hpp"
#include "kato/error.hpp"
#include "kato/io.hpp"
#include "kato/kato.hpp"
#include "kato/mild.hpp"
#include "kato/oracle.hpp"
#include "kato/products.hpp"
#include "kato/profiles.hpp"
#include "kato/quasilinear.hpp"
#include "kato/renewal.hpp"
#include "kato/semigroup.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace kato::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json num_array(const std::vector<double>& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(num(x));
  return a;
}

struct Common {
  std::string preset;
  std::string scenario_file;
  std::uint64_t seed = 0;
  std::optional<double> tol;
  std::string out_dir;
  std::string profile = "smooth";
  std::string state_file;
  std::optional<double> phi_norm;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--preset", c.preset, "built-in scenario (" + [] {
    std::string s;
    for (const auto& n : preset_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
  }() + ")");
  cmd->add_option("--scenario", c.scenario_file, "scenario JSON file");
  cmd->add_option("--seed", c.seed, "seed for randomized inputs")->capture_default_str();
  cmd->add_option("--tol", c.tol, "tolerance (default 1e-5; 1e-6 for quasilinear and compare)");
  cmd->add_option("--out", c.out_dir, "directory for CSV artifacts");
  cmd->add_option("--profile", c.profile, "initial profile")->capture_default_str();
  cmd->add_option("--state", c.state_file, "initial state CSV (overrides --profile)");
  cmd->add_option("--phi-norm", c.phi_norm, "rescale the initial state to this E0 norm");
}

ScenarioConfig load_config(const Common& c) {
  if (!c.preset.empty() && !c.scenario_file.empty())
    throw ValidationError("give either --preset or --scenario, not both");
  if (!c.scenario_file.empty()) return load_scenario_config(c.scenario_file);
  if (!c.preset.empty()) return preset_config(c.preset);
  throw ValidationError("one of --preset or --scenario is required");
}

StateVector initial_state(const Scenario& scenario, const Common& c) {
  StateVector phi = c.state_file.empty() ? make_profile(scenario, c.profile, c.seed)
                                         : read_state_csv(c.state_file, scenario);
  if (c.phi_norm) {
    const double n = norm_E0(phi);
    if (n == 0.0) throw ValidationError("cannot rescale a zero initial state");
    phi *= *c.phi_norm / n;
  }
  return phi;
}

fs::path artifact(const Common& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / name;
}

void write_state(const Common& c, const std::string& name, const StateVector& v) {
  if (!c.out_dir.empty()) write_state_csv(artifact(c, name).string(), v);
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const int d = traj.states.front().dim();
  out << "t,a";
  for (int j = 0; j < d; ++j) out << ",u" << j;
  out << '\n';
  for (std::size_t m = 0; m < traj.states.size(); ++m) {
    const StateVector& u = traj.states[m];
    for (int i = 0; i < u.size(); ++i) {
      out << format_number(traj.times[m]) << ',' << format_number(u.grid().node(i));
      for (int j = 0; j < d; ++j) out << ',' << format_number(u.sample(i)(j));
      out << '\n';
    }
  }
}

/// Writes a CSV table to stdout and, with --out, to a file of the given name.
void emit_table(const Common& c, std::ostream& out, const std::string& name, const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows) {
  write_table_csv(out, header, rows);
  if (!c.out_dir.empty()) {
    std::ofstream file(artifact(c, name));
    write_table_csv(file, header, rows);
  }
}

json evolution_json(const EvolutionResult& r) {
  json j;
  j["n_used"] = r.n_used;
  j["n_value"] = r.n_value;
  j["cauchy_gap"] = num(r.cauchy_gap);
  j["eta"] = num(r.eta);
  j["extrapolated"] = r.extrapolated;
  j["ns"] = r.ns;
  j["gaps"] = num_array(r.gaps);
  return j;
}

json constants_json(const StabilityConstants& c) {
  json j;
  j["M"] = num(c.M);
  j["varpi"] = num(c.varpi);
  j["M0"] = num(c.M0);
  j["omega0"] = num(c.omega0);
  j["M1"] = num(c.M1);
  j["omega1"] = num(c.omega1);
  j["b_norm0"] = num(c.b_norm0);
  j["b_norm1"] = num(c.b_norm1);
  j["eta"] = num(c.eta());
  j["source"] = c.source == ConstantsSource::declared ? "declared" : "estimated";
  return j;
}

void print_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Age-structured evolution systems: semigroups, Kato products, mild and quasilinear solutions",
               "kato-evolve"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand all subcommand help");

  Common c;
  double t = 0.0, s = 0.0, s_max = 1.0, t_end = 1.0, amplitude = 1.0, epsilon = 0.05, r0 = 1.0;
  int n_max = 1 << 12, n_min = 1, refinements = 3, record_every = 1, max_iter = 60, partition = 0;
  std::string plan_text, forcing = "sinusoid", coupling = "norm-coupled-diffusion", initial = "constant";
  std::optional<double> lp_p, lp_n0;

  auto* semigroup = app.add_subcommand("semigroup", "apply the frozen-time semigroup S_t(s)");
  add_common(semigroup, c);
  semigroup->add_option("--t", t, "frozen time")->capture_default_str();
  semigroup->add_option("--s", s, "duration (multiple of the age step)")->capture_default_str();

  auto* birth = app.add_subcommand("birth", "solve the renewal equation for B(s)");
  add_common(birth, c);
  birth->add_option("--t", t, "frozen time")->capture_default_str();
  birth->add_option("--s-max", s_max, "final s")->capture_default_str();

  auto* product = app.add_subcommand("product", "evaluate a product of frozen semigroups two ways");
  add_common(product, c);
  product->add_option("--plan", plan_text, "factors t1:s1,t2:s2,... (t nondecreasing)")->required();

  auto* evolve = app.add_subcommand("evolve", "evolution system U(t, s) by Kato approximants");
  add_common(evolve, c);
  evolve->add_option("--s", s, "initial time")->capture_default_str();
  auto* evolve_t = evolve->add_option("--t", t, "final time (default T)");

  auto* study = app.add_subcommand("convergence-study", "Cauchy gaps of U_n under partition doubling");
  add_common(study, c);
  study->add_option("--s", s, "initial time")->capture_default_str();
  auto* study_t = study->add_option("--t", t, "final time (default T)");
  study->add_option("--n-min", n_min, "first partition count")->capture_default_str();
  study->add_option("--n-max", n_max, "largest partition count")->capture_default_str();

  auto* forced = app.add_subcommand("forced", "mild solution with a forcing term");
  add_common(forced, c);
  forced->add_option("--forcing", forcing, "constant | pulse | sinusoid")->capture_default_str();
  forced->add_option("--amplitude", amplitude, "forcing amplitude")->capture_default_str();
  forced->add_option("--t-end", t_end, "final time")->capture_default_str();

  auto* quasi = app.add_subcommand("quasilinear", "Picard iteration for a state-dependent operator");
  add_common(quasi, c);
  quasi->add_option("--coupling", coupling, "coupling preset")->capture_default_str();
  quasi->add_option("--epsilon", epsilon, "coupling strength")->capture_default_str();
  quasi->add_option("--r0", r0, "ball radius")->capture_default_str();
  quasi->add_option("--initial", initial, "first iterate: constant | linear")->capture_default_str();
  quasi->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str();
  quasi->add_option("--n", partition, "Kato partition (0: finest admissible)")->capture_default_str();
  quasi->add_option("--lp", lp_p, "enable the L_p ball with this p");
  quasi->add_option("--n0", lp_n0, "N0 of the L_p ball (default: estimated)");

  auto* oracle = app.add_subcommand("oracle", "direct upwind time stepper");
  add_common(oracle, c);
  oracle->add_option("--t-end", t_end, "final time")->capture_default_str();
  oracle->add_option("--record-every", record_every, "keep every k-th step")->capture_default_str();

  auto* cmp = app.add_subcommand("compare", "oracle against the evolution system under refinement");
  add_common(cmp, c);
  cmp->add_option("--t-end", t_end, "final time")->capture_default_str();
  cmp->add_option("--refinements", refinements, "number of grids")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "run the invariant suite and report margins");
  add_common(verify, c);

  if (args.empty()) {
    err << app.help();
    return 1;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    const double tol = c.tol.value_or(quasi->parsed() || cmp->parsed() ? 1e-6 : 1e-5);
    if (!(tol > 0.0)) throw ValidationError("--tol must be positive");
    const ScenarioConfig config = load_config(c);
    const Scenario scenario = build_scenario(config);

    if (semigroup->parsed()) {
      const StateVector phi = initial_state(scenario, c);
      const SemigroupApplication app_s = apply_semigroup_detailed(scenario, t, s, phi);
      json j;
      j["command"] = "semigroup";
      j["scenario"] = scenario.name();
      j["t"] = t;
      j["s"] = s;
      j["norm_in"] = num(norm_E0(phi));
      j["norm_out"] = num(norm_E0(app_s.value));
      j["birth_identity_residual"] = num(birth_identity_residual(scenario, t, phi, s));
      j["y_membership_residual"] = num(check_membership_Y(app_s.value, scenario, 0.0).residual);
      write_state(c, "semigroup_state.csv", app_s.value);
      print_json(out, j);
      return 0;
    }
    if (birth->parsed()) {
      const StateVector phi = initial_state(scenario, c);
      const BirthTrajectory b = solve_birth(scenario, t, phi, s_max);
      std::vector<std::string> header{"s"};
      for (int j = 0; j < scenario.dim(); ++j) header.push_back("component_" + std::to_string(j));
      std::vector<std::vector<double>> rows;
      for (int k = 0; k < b.size(); ++k) {
        std::vector<double> row{b.s(k)};
        for (int j = 0; j < scenario.dim(); ++j) row.push_back(b.at(k)(j));
        rows.push_back(std::move(row));
      }
      emit_table(c, out, "birth.csv", header, rows);
      return 0;
    }
    if (product->parsed()) {
      const StateVector phi = initial_state(scenario, c);
      const ProductPlan plan = parse_plan(plan_text);
      const StateVector direct = apply_product_direct(scenario, plan, phi);
      const StateVector sequential = apply_product_sequential(scenario, plan, phi);
      const double gap = norm_E0(direct - sequential);
      json j;
      j["command"] = "product";
      j["scenario"] = scenario.name();
      j["times"] = plan.times;
      j["durations"] = plan.durations;
      j["norm_in"] = num(norm_E0(phi));
      j["direct_norm"] = num(norm_E0(direct));
      j["sequential_norm"] = num(norm_E0(sequential));
      j["discrepancy"] = num(gap);
      j["relative_discrepancy"] = num(gap / norm_E0(phi));
      write_state(c, "product_direct.csv", direct);
      write_state(c, "product_sequential.csv", sequential);
      print_json(out, j);
      return 0;
    }
    if (evolve->parsed()) {
      if (evolve_t->count() == 0) t = scenario.horizon();
      const StateVector phi = initial_state(scenario, c);
      KatoOptions opts;
      opts.constants = estimate_constants(scenario, 32, c.seed);
      const EvolutionResult r = apply_UA(scenario, t, s, phi, tol, opts);
      json j;
      j["command"] = "evolve";
      j["scenario"] = scenario.name();
      j["s"] = s;
      j["t"] = t;
      j["tol"] = tol;
      j["result"] = evolution_json(r);
      j["norm_in"] = num(norm_E0(phi));
      j["norm_out"] = num(norm_E0(r.value));
      j["y_membership_residual"] = num(check_membership_Y(r.value, scenario, 0.0).residual);
      j["constants"] = constants_json(*opts.constants);
      write_state(c, "evolve_state.csv", r.value);
      print_json(out, j);
      return 0;
    }
    if (study->parsed()) {
      if (study_t->count() == 0) t = scenario.horizon();
      const StateVector phi = initial_state(scenario, c);
      std::vector<std::vector<double>> rows;
      for (const auto& r : convergence_study(scenario, t, s, phi, n_min, n_max))
        rows.push_back({static_cast<double>(r.n), r.gap, r.ratio, r.order});
      emit_table(c, out, "convergence.csv", {"n", "gap", "ratio", "order"}, rows);
      return 0;
    }
    if (forced->parsed()) {
      const StateVector phi = initial_state(scenario, c);
      const Forcing f = make_forcing(scenario, forcing, amplitude, "bump", c.seed);
      const MildSolution sol = solve_nonhomogeneous(scenario, phi, f, t_end, tol);
      std::vector<double> norms;
      for (const auto& u : sol.trajectory.states) norms.push_back(norm_E0(u));
      json j;
      j["command"] = "forced";
      j["scenario"] = scenario.name();
      j["forcing"] = forcing;
      j["amplitude"] = amplitude;
      j["n"] = sol.n;
      j["tau"] = sol.tau;
      j["times"] = sol.trajectory.times;
      j["norms"] = num_array(norms);
      j["duhamel_residual"] = num(duhamel_residual(scenario, sol, phi, f));
      if (!c.out_dir.empty()) write_trajectory_csv(artifact(c, "forced_trajectory.csv"), sol.trajectory);
      print_json(out, j);
      return 0;
    }
    if (quasi->parsed()) {
      if (coupling != "norm-coupled-diffusion")
        throw ValidationError("unknown coupling '" + coupling + "' (known: norm-coupled-diffusion)");
      if (initial != "constant" && initial != "linear")
        throw ValidationError("--initial must be constant or linear");
      const StateVector phi = initial_state(scenario, c);
      QuasilinearProblem problem = norm_coupled_diffusion(scenario, epsilon, r0, phi);
      QuasilinearOptions opts;
      opts.n = partition;
      opts.max_iter = max_iter;
      opts.seed = c.seed;
      opts.initial = initial == "linear" ? InitialIterate::linear : InitialIterate::constant;
      opts.keep_iterates = !c.out_dir.empty();
      json lp = nullptr;
      if (lp_p) {
        double n0 = 0.0;
        if (lp_n0) {
          n0 = *lp_n0;
        } else {
          n0 = lp_constants(estimate_constants(scenario, 32, c.seed), 0, *lp_p).N;
        }
        problem.lp_mode = LpMode{*lp_p, n0};
        lp = json{{"p", *lp_p}, {"N0", n0}, {"norm", "discrete L_p in age of the spatial norm"}};
      }
      const QuasilinearResult r = solve_quasilinear(scenario, problem, tol, opts);
      json j;
      j["command"] = "quasilinear";
      j["scenario"] = scenario.name();
      j["coupling"] = coupling;
      j["epsilon"] = epsilon;
      j["r0"] = r0;
      j["tol"] = tol;
      j["lp_mode"] = lp;
      j["T_phi"] = r.T_phi;
      j["n"] = r.n;
      j["iterations"] = r.iterations;
      j["fixed_point_residual"] = num(r.fixed_point_residual);
      j["predicted_contraction"] = num(r.predicted_contraction);
      j["lipschitz"] = json{{"declared", num(r.lipschitz.declared)},
                            {"observed", num(r.lipschitz.observed)},
                            {"within", r.lipschitz.within}};
      json halvings = json::array();
      for (const auto& h : r.halvings) halvings.push_back(json{{"horizon", h.horizon}, {"reason", h.reason}});
      j["halvings"] = halvings;
      json its = json::array();
      for (const auto& it : r.iterates)
        its.push_back(json{{"sup_gap", num(it.sup_gap)},
                           {"ratio", num(it.ratio)},
                           {"ball_excursion", num(it.ball_excursion)},
                           {"lp_ratio", num(it.lp_ratio)},
                           {"dependence_ratio", num(it.dependence_ratio)}});
      j["iterates"] = its;
      j["constants"] = constants_json(r.constants);
      for (std::size_t k = 0; k < r.accepted_iterates.size(); ++k)
        write_trajectory_csv(artifact(c, "iterate_" + std::to_string(k + 1) + ".csv"), r.accepted_iterates[k]);
      if (!c.out_dir.empty()) {
        std::ofstream report(artifact(c, "iterates_report.json"));
        report << j.dump(2) << '\n';
      }
      print_json(out, j);
      return 0;
    }
    if (oracle->parsed()) {
      const StateVector phi = initial_state(scenario, c);
      const Trajectory traj = solve_direct(scenario, phi, t_end, record_every);
      std::vector<std::vector<double>> rows;
      for (std::size_t m = 0; m < traj.states.size(); ++m) {
        const double n = norm_E0(traj.states[m]);
        rows.push_back({traj.times[m], n, std::log(n)});
      }
      emit_table(c, out, "oracle.csv", {"t", "norm", "log_norm"}, rows);
      if (!c.out_dir.empty()) write_state_csv(artifact(c, "oracle_state.csv").string(), traj.states.back());
      return 0;
    }
    if (cmp->parsed()) {
      if (!c.state_file.empty()) throw ValidationError("compare resamples a named profile; --state is not supported");
      std::vector<std::vector<double>> rows;
      for (const auto& r : compare(config, c.profile, c.seed, t_end, refinements, tol))
        rows.push_back({static_cast<double>(r.n_age), r.step, r.discrepancy, r.order, static_cast<double>(r.kato_n),
                        r.kato_fallback ? 1.0 : 0.0});
      emit_table(c, out, "compare.csv", {"n_age", "step", "discrepancy", "order", "kato_n", "kato_fallback"}, rows);
      return 0;
    }
    if (verify->parsed()) {
      const std::vector<Check> checks = run_verification(scenario, c.seed, tol);
      bool all = true;
      json list = json::array();
      for (const auto& ch : checks) {
        all = all && (ch.pass || ch.skipped);
        json e;
        e["name"] = ch.name;
        e["status"] = ch.skipped ? "skipped" : (ch.pass ? "pass" : "fail");
        e["value"] = num(ch.value);
        e["relation"] = ch.relation;
        e["threshold"] = num(ch.threshold);
        if (!ch.note.empty()) e["note"] = ch.note;
        list.push_back(e);
      }
      json j;
      j["command"] = "verify";
      j["scenario"] = scenario.name();
      j["seed"] = c.seed;
      j["tol"] = tol;
      j["checks"] = list;
      j["all_pass"] = all;
      if (!c.out_dir.empty()) {
        std::ofstream report(artifact(c, "verify_report.json"));
        report << j.dump(2) << '\n';
      }
      print_json(out, j);
      return all ? 0 : 2;
    }
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace kato::cli
