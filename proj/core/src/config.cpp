#include "kato/config.hpp"

#include "kato/error.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <limits>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace kato {

using json = nlohmann::ordered_json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(where + it.key() + ": unknown key");
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "inf" || s == "infinity" || s == "+inf")
      throw ConfigError(where + key + ": infinite values are not supported (finite maximal age only)");
    throw ConfigError(where + key + ": expected a number");
  }
  if (!v.is_number()) throw ConfigError(where + key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + key + ": must be finite");
  return x;
}

int get_int(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + key + ": expected an integer");
  return v.get<int>();
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + key + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> get_vector(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(where + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(where + key + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> get_matrix(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(where + key + ": expected an array of rows");
  std::vector<std::vector<double>> out;
  for (const auto& row : v) {
    if (!row.is_array()) throw ConfigError(where + key + ": expected an array of rows");
    std::vector<double> r;
    for (const auto& x : row) {
      if (!x.is_number()) throw ConfigError(where + key + ": matrix entries must be numbers");
      r.push_back(x.get<double>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void parse_operator(const json& obj, OperatorSpec& spec) {
  const std::string where = "operator.";
  if (!obj.is_object()) throw ConfigError("operator: expected an object");
  reject_unknown(obj, {"type", "mu", "kappa0", "time_amplitude", "period", "age_slope", "shift", "matrix"},
                 where);
  if (obj.contains("type")) spec.type = get_string(obj, "type", where);
  if (obj.contains("mu")) spec.mu = get_vector(obj, "mu", where);
  if (obj.contains("kappa0")) spec.kappa0 = get_number(obj, "kappa0", where);
  if (obj.contains("time_amplitude")) spec.time_amplitude = get_number(obj, "time_amplitude", where);
  if (obj.contains("period")) spec.period = get_number(obj, "period", where);
  if (obj.contains("age_slope")) spec.age_slope = get_number(obj, "age_slope", where);
  if (obj.contains("shift")) spec.shift = get_number(obj, "shift", where);
  if (obj.contains("matrix")) spec.matrix = get_matrix(obj, "matrix", where);
  static const std::set<std::string> types{"zero", "mortality", "modulated_laplacian", "matrix"};
  if (!types.count(spec.type))
    throw ConfigError("operator.type: expected zero|mortality|modulated_laplacian|matrix, got '" + spec.type + "'");
  if (!(spec.period > 0.0)) throw ConfigError("operator.period: must be positive");
}

void parse_birth(const json& obj, BirthSpec& spec) {
  const std::string where = "birth.";
  if (!obj.is_object()) throw ConfigError("birth: expected an object");
  reject_unknown(obj, {"type", "beta", "matrix"}, where);
  if (obj.contains("type")) spec.type = get_string(obj, "type", where);
  if (obj.contains("beta")) spec.beta = get_number(obj, "beta", where);
  if (obj.contains("matrix")) spec.matrix = get_matrix(obj, "matrix", where);
  static const std::set<std::string> types{"zero", "constant", "sine", "matrix"};
  if (!types.count(spec.type))
    throw ConfigError("birth.type: expected zero|constant|sine|matrix, got '" + spec.type + "'");
}

void parse_tolerances(const json& obj, Tolerances& tol) {
  const std::string where = "tolerances.";
  if (!obj.is_object()) throw ConfigError("tolerances: expected an object");
  reject_unknown(obj, {"volterra", "cocycle", "membership", "semigroup", "composition"}, where);
  if (obj.contains("volterra")) tol.volterra = get_number(obj, "volterra", where);
  if (obj.contains("cocycle")) tol.cocycle = get_number(obj, "cocycle", where);
  if (obj.contains("membership")) tol.membership = get_number(obj, "membership", where);
  if (obj.contains("semigroup")) tol.semigroup = get_number(obj, "semigroup", where);
  if (obj.contains("composition")) tol.composition = get_number(obj, "composition", where);
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows, int dim, const std::string& what) {
  if (static_cast<int>(rows.size()) != dim)
    throw ValidationError(what + " must have " + std::to_string(dim) + " rows");
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (static_cast<int>(rows[i].size()) != dim)
      throw ValidationError(what + " row " + std::to_string(i) + " must have " + std::to_string(dim) + " entries");
    for (int j = 0; j < dim; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

double poly(const std::vector<double>& c, double a) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * a + *it;
  return v;
}

double poly_sup(const std::vector<double>& c, double a_max) {
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) s += std::abs(c[k]) * std::pow(a_max, static_cast<double>(k));
  return s;
}

json matrix_json(const std::vector<std::vector<double>>& m) {
  json out = json::array();
  for (const auto& row : m) out.push_back(row);
  return out;
}

}  // namespace

Matrix neumann_laplacian(int dim) {
  if (dim < 1) throw ValidationError("laplacian dimension must be at least 1");
  Matrix l = Matrix::Zero(dim, dim);
  for (int i = 0; i + 1 < dim; ++i) {
    l(i, i + 1) = 1.0;
    l(i + 1, i) = 1.0;
    l(i, i) -= 1.0;
    l(i + 1, i + 1) -= 1.0;
  }
  return l;
}

OperatorField make_operator_field(const OperatorSpec& spec, int dim, double a_max) {
  const double two_pi_over_p = 2.0 * std::numbers::pi / spec.period;
  const double amp = spec.time_amplitude;
  const Matrix eye = Matrix::Identity(dim, dim);
  const double shift = spec.shift;

  if (spec.type == "zero") {
    return OperatorField(dim, [eye, shift](double, double) -> Matrix { return shift * eye; }, 0.0,
                         HolderInfo{1.0, 0.0});
  }
  if (spec.type == "mortality") {
    const std::vector<double> mu = spec.mu;
    const double lip = poly_sup(mu, a_max) * std::abs(amp) * two_pi_over_p;
    return OperatorField(
        dim,
        [eye, shift, mu, amp, two_pi_over_p](double t, double a) -> Matrix {
          const double m = 1.0 + amp * std::sin(two_pi_over_p * t);
          return (shift - poly(mu, a) * m) * eye;
        },
        lip, HolderInfo{1.0, std::numeric_limits<double>::quiet_NaN()});
  }
  if (spec.type == "modulated_laplacian") {
    const Matrix lap = neumann_laplacian(dim);
    const std::vector<double> mu = spec.mu;
    const double k0 = spec.kappa0;
    const double slope = spec.age_slope;
    const double lap_norm = dim == 1 ? 0.0 : 4.0;
    const double lip = std::abs(k0) * std::abs(amp) * two_pi_over_p * (1.0 + std::abs(slope)) * lap_norm;
    return OperatorField(
        dim,
        [lap, eye, shift, mu, k0, amp, slope, a_max, two_pi_over_p](double t, double a) -> Matrix {
          const double kappa = k0 * (1.0 + amp * std::sin(two_pi_over_p * t)) * (1.0 + slope * a / a_max);
          return kappa * lap + (shift - poly(mu, a)) * eye;
        },
        lip, HolderInfo{1.0, std::abs(k0) * (1.0 + std::abs(amp)) * std::abs(slope) / a_max * lap_norm});
  }
  if (spec.type == "matrix") {
    const Matrix k = to_matrix(spec.matrix, dim, "operator.matrix") + shift * eye;
    return OperatorField(dim, [k](double, double) -> Matrix { return k; }, 0.0, HolderInfo{1.0, 0.0});
  }
  throw ConfigError("operator.type: unknown family '" + spec.type + "'");
}

BirthKernel make_birth_kernel(const BirthSpec& spec, int dim, double a_max) {
  const Matrix eye = Matrix::Identity(dim, dim);
  if (spec.type == "zero") return BirthKernel(dim, [eye](double) -> Matrix { return 0.0 * eye; });
  const double beta = spec.beta;
  if (spec.type == "constant") return BirthKernel(dim, [eye, beta](double) -> Matrix { return beta * eye; });
  if (spec.type == "sine") {
    return BirthKernel(dim, [eye, beta, a_max](double a) -> Matrix {
      return beta * std::max(0.0, std::sin(std::numbers::pi * a / a_max)) * eye;
    });
  }
  if (spec.type == "matrix") {
    const Matrix k = to_matrix(spec.matrix, dim, "birth.matrix");
    return BirthKernel(dim, [k](double) -> Matrix { return k; });
  }
  throw ConfigError("birth.type: unknown family '" + spec.type + "'");
}

std::vector<std::string> preset_names() { return {"SCAL0", "SCAL1", "DIFF1", "TRANSPORT0", "MORT1"}; }

ScenarioConfig preset_config(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  if (name == "SCAL0") {
    c.dim = 1;
    c.a_max = 1.0;
    c.n_age = 100;
    c.horizon = 10.0;
    c.n_time = 10;
    c.birth = {"constant", 2.0, {}};
    return c;
  }
  if (name == "SCAL1") {
    // SCAL0 birth with a time-modulated mortality, so frozen semigroups differ in t.
    c.dim = 1;
    c.a_max = 1.0;
    c.n_age = 128;
    c.horizon = 1.0;
    c.n_time = 8;
    c.op.type = "mortality";
    c.op.mu = {0.5};
    c.op.time_amplitude = 0.5;
    c.birth = {"constant", 2.0, {}};
    return c;
  }
  if (name == "DIFF1") {
    c.dim = 32;
    c.a_max = 1.0;
    c.n_age = 64;
    c.horizon = 1.0;
    c.n_time = 16;
    c.op.type = "modulated_laplacian";
    c.op.kappa0 = 0.1;
    c.op.time_amplitude = 0.5;
    c.op.period = 1.0;
    c.op.age_slope = 1.0;
    c.birth = {"sine", 1.5, {}};
    c.reference_operator = "laplacian";
    c.spatial_norm = "two";
    return c;
  }
  if (name == "TRANSPORT0") {
    c.dim = 1;
    c.a_max = 1.0;
    c.n_age = 100;
    c.horizon = 1.0;
    c.n_time = 10;
    return c;
  }
  if (name == "MORT1") {
    c.dim = 1;
    c.a_max = 1.0;
    c.n_age = 128;
    c.horizon = 1.0;
    c.n_time = 8;
    c.op.type = "mortality";
    c.op.mu = {1.0};
    return c;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("preset: unknown preset '" + name + "' (known: " + known + ")");
}

ScenarioConfig parse_scenario_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("scenario: expected a JSON object");
  reject_unknown(doc,
                 {"preset", "custom", "name", "dim", "a_max", "n_age", "T", "n_time", "operator", "birth",
                  "reference_operator", "spatial_norm", "integrator_order", "tolerances", "s_max"},
                 "");

  ScenarioConfig c;
  const bool has_preset = doc.contains("preset");
  const bool custom = doc.contains("custom") && doc.at("custom").is_boolean() && doc.at("custom").get<bool>();
  if (doc.contains("custom") && !doc.at("custom").is_boolean()) throw ConfigError("custom: expected a boolean");
  if (has_preset && custom) throw ConfigError("custom: cannot be combined with preset");
  if (has_preset) {
    c = preset_config(get_string(doc, "preset", ""));
  } else {
    for (const char* key : {"dim", "a_max", "n_age", "T", "n_time"})
      if (!doc.contains(key)) throw ConfigError(std::string(key) + ": required for custom scenarios");
  }
  if (doc.contains("name")) c.name = get_string(doc, "name", "");
  if (doc.contains("dim")) c.dim = get_int(doc, "dim", "");
  if (doc.contains("a_max")) c.a_max = get_number(doc, "a_max", "");
  if (doc.contains("n_age")) c.n_age = get_int(doc, "n_age", "");
  if (doc.contains("T")) c.horizon = get_number(doc, "T", "");
  if (doc.contains("n_time")) c.n_time = get_int(doc, "n_time", "");
  if (doc.contains("operator")) parse_operator(doc.at("operator"), c.op);
  if (doc.contains("birth")) parse_birth(doc.at("birth"), c.birth);
  if (doc.contains("reference_operator")) {
    c.reference_operator = get_string(doc, "reference_operator", "");
    if (c.reference_operator != "zero" && c.reference_operator != "identity" && c.reference_operator != "laplacian")
      throw ConfigError("reference_operator: expected zero|identity|laplacian");
  }
  if (doc.contains("spatial_norm")) {
    c.spatial_norm = get_string(doc, "spatial_norm", "");
    parse_spatial_norm(c.spatial_norm);
  }
  if (doc.contains("integrator_order")) c.integrator_order = get_int(doc, "integrator_order", "");
  if (doc.contains("tolerances")) parse_tolerances(doc.at("tolerances"), c.tolerances);
  if (doc.contains("s_max")) c.s_max = get_number(doc, "s_max", "");
  return c;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_config(buffer.str());
}

std::string scenario_config_to_json(const ScenarioConfig& c) {
  json doc;
  doc["custom"] = true;
  doc["name"] = c.name;
  doc["dim"] = c.dim;
  doc["a_max"] = c.a_max;
  doc["n_age"] = c.n_age;
  doc["T"] = c.horizon;
  doc["n_time"] = c.n_time;
  json op;
  op["type"] = c.op.type;
  op["mu"] = c.op.mu;
  op["kappa0"] = c.op.kappa0;
  op["time_amplitude"] = c.op.time_amplitude;
  op["period"] = c.op.period;
  op["age_slope"] = c.op.age_slope;
  op["shift"] = c.op.shift;
  if (!c.op.matrix.empty()) op["matrix"] = matrix_json(c.op.matrix);
  doc["operator"] = op;
  json birth;
  birth["type"] = c.birth.type;
  birth["beta"] = c.birth.beta;
  if (!c.birth.matrix.empty()) birth["matrix"] = matrix_json(c.birth.matrix);
  doc["birth"] = birth;
  doc["reference_operator"] = c.reference_operator;
  doc["spatial_norm"] = c.spatial_norm;
  doc["integrator_order"] = c.integrator_order;
  json tol;
  tol["volterra"] = c.tolerances.volterra;
  tol["cocycle"] = c.tolerances.cocycle;
  tol["membership"] = c.tolerances.membership;
  tol["semigroup"] = c.tolerances.semigroup;
  tol["composition"] = c.tolerances.composition;
  doc["tolerances"] = tol;
  doc["s_max"] = c.s_max;
  return doc.dump(2);
}

Scenario build_scenario(const ScenarioConfig& c) {
  if (c.dim < 1) throw ValidationError("dim must be at least 1");
  if (c.n_age < 2) throw ValidationError("n_age must be at least 2");
  if (c.n_time < 1) throw ValidationError("n_time must be at least 1");
  if (!(c.a_max > 0.0) || !std::isfinite(c.a_max)) throw ValidationError("a_max must be finite and positive");
  if (!(c.horizon > 0.0)) throw ValidationError("T must be positive");

  Matrix reference;
  if (c.reference_operator == "zero")
    reference = Matrix::Zero(c.dim, c.dim);
  else if (c.reference_operator == "identity")
    reference = Matrix::Identity(c.dim, c.dim);
  else if (c.reference_operator == "laplacian")
    reference = neumann_laplacian(c.dim);
  else
    throw ValidationError("reference_operator: expected zero|identity|laplacian");

  return Scenario(Scenario::Parts{
      c.name,
      AgeGrid(c.a_max, c.n_age),
      TimeGrid(c.horizon, c.n_time),
      c.dim,
      make_operator_field(c.op, c.dim, c.a_max),
      make_birth_kernel(c.birth, c.dim, c.a_max),
      reference,
      parse_spatial_norm(c.spatial_norm),
      c.integrator_order,
      c.tolerances,
      c.s_max,
  });
}

}  // namespace kato
