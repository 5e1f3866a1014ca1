#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kato::cli {

/// Runs one kato-evolve invocation. args excludes the program name.
/// Returns 0 on success, 1 on usage or validation errors, 2 when `verify`
/// finds a violated invariant.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kato::cli
