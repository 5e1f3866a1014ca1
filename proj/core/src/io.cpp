#include "kato/io.hpp"

#include "kato/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kato {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_state_csv(std::ostream& out, const StateVector& phi) {
  out << 'a';
  for (int j = 0; j < phi.dim(); ++j) out << ",u" << j;
  out << '\n';
  for (int i = 0; i < phi.size(); ++i) {
    out << format_number(phi.grid().node(i));
    for (int j = 0; j < phi.dim(); ++j) out << ',' << format_number(phi.sample(i)(j));
    out << '\n';
  }
}

void write_state_csv(const std::string& path, const StateVector& phi) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_state_csv(out, phi);
}

StateVector read_state_csv(const std::string& path, const Scenario& scenario) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open state file " + path);
  const AgeGrid& grid = scenario.age_grid();
  StateVector phi = scenario.zero_state();
  std::string line;
  std::getline(in, line);
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= grid.size()) throw ValidationError(path + ": more rows than age nodes");
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError(path + ": bad number '" + cell + "' on row " + std::to_string(row + 1));
      }
    }
    if (static_cast<int>(values.size()) != scenario.dim() + 1)
      throw ValidationError(path + ": expected " + std::to_string(scenario.dim() + 1) + " columns");
    if (std::abs(values[0] - grid.node(row)) > 1e-9 * std::max(1.0, grid.a_max()))
      throw ValidationError(path + ": age column does not match the scenario grid at row " + std::to_string(row + 1));
    for (int j = 0; j < scenario.dim(); ++j) phi.sample(row)(j) = values[j + 1];
    ++row;
  }
  if (row != grid.size()) throw ValidationError(path + ": expected " + std::to_string(grid.size()) + " rows");
  return phi;
}

void write_table_csv(std::ostream& out, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_number(row[j]);
    out << '\n';
  }
}

}  // namespace kato
