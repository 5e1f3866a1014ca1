#pragma once

#include "kato/core_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kato {

/// Operator families:
///   zero                 A ≡ 0
///   mortality            A = −μ(a)·m(t)·I
///   modulated_laplacian  A = κ0·m(t)·(1 + age_slope·a/a_max)·Δ_h − μ(a)·I
///   matrix               A ≡ constant matrix
/// with m(t) = 1 + time_amplitude·sin(2πt/period), μ(a) = Σ_k mu[k]·a^k,
/// and shift·I added to every family.
struct OperatorSpec {
  std::string type = "zero";
  std::vector<double> mu;
  double kappa0 = 0.1;
  double time_amplitude = 0.0;
  double period = 1.0;
  double age_slope = 0.0;
  double shift = 0.0;
  std::vector<std::vector<double>> matrix;
};

/// Birth families: zero, constant (β·I), sine (β·sin(πa/a_max)·I), matrix.
struct BirthSpec {
  std::string type = "zero";
  double beta = 0.0;
  std::vector<std::vector<double>> matrix;
};

struct ScenarioConfig {
  std::string name = "custom";
  int dim = 1;
  double a_max = 1.0;
  int n_age = 100;
  double horizon = 1.0;
  int n_time = 10;
  OperatorSpec op;
  BirthSpec birth;
  std::string reference_operator = "zero";  // zero | identity | laplacian
  std::string spatial_norm = "one";
  int integrator_order = 2;
  Tolerances tolerances;
  double s_max = 0.0;
};

/// Names accepted by preset_config.
std::vector<std::string> preset_names();

/// Built-in scenario configurations (SCAL0, DIFF1, TRANSPORT0, ...).
ScenarioConfig preset_config(const std::string& name);

/// Parses a JSON scenario document. Either "preset" selects a base preset
/// whose fields may be overridden, or the document is custom and must give
/// dim, a_max, n_age, T and n_time. Unknown keys raise ConfigError.
ScenarioConfig parse_scenario_config(const std::string& json_text);
ScenarioConfig load_scenario_config(const std::string& path);

/// Round-trippable JSON rendering of a configuration (stable key order).
std::string scenario_config_to_json(const ScenarioConfig& config);

Scenario build_scenario(const ScenarioConfig& config);

/// Zero-flux discrete Laplacian on a path of d patches: tridiag(1, −2, 1)
/// with −1 on the two boundary diagonal entries.
Matrix neumann_laplacian(int dim);

OperatorField make_operator_field(const OperatorSpec& spec, int dim, double a_max);
BirthKernel make_birth_kernel(const BirthSpec& spec, int dim, double a_max);

}  // namespace kato
