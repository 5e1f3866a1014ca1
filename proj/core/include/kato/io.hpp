#pragma once

#include "kato/core_model.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace kato {

/// Shortest round-trip-safe rendering: 17 significant digits, '.' decimal.
std::string format_number(double x);

/// CSV with header "a,u0,u1,..." and one row per age node.
void write_state_csv(std::ostream& out, const StateVector& phi);
void write_state_csv(const std::string& path, const StateVector& phi);

/// Reads a state written by write_state_csv; the age column must match the grid.
StateVector read_state_csv(const std::string& path, const Scenario& scenario);

/// Plain numeric table.
void write_table_csv(std::ostream& out, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

}  // namespace kato
