#pragma once

#include "kato/core_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kato {

/// Spatial coordinate of patch j: cell centre (j + 1/2)/d on [0, 1].
double patch_coordinate(int j, int dim);

/// Named initial profiles, sampled from a grid-independent formula so that
/// refinements see the same underlying function:
///   ones    φ ≡ 1
///   linear  φ(a) = a in every component
///   smooth  (1 + ½cos(πa/a_max))·(1 + ½cos(πx))
///   random  1 + Σ small seeded cosine modes in (a, x); strictly positive
///   bump    sin(πa/a_max)·(1 + ½cos(πx))  (vanishes at a = 0)
///   alternating  (1 + ½cos(πa/a_max))·(1 ± ½) by patch parity, the
///                roughest spatial mode
StateVector make_profile(const Scenario& scenario, const std::string& name, std::uint64_t seed = 0);

std::vector<std::string> profile_names();

}  // namespace kato
