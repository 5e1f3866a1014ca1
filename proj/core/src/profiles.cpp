#include "kato/profiles.hpp"

#include "kato/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace kato {

double patch_coordinate(int j, int dim) { return (j + 0.5) / dim; }

std::vector<std::string> profile_names() { return {"ones", "linear", "smooth", "random", "bump", "alternating"}; }

StateVector make_profile(const Scenario& scenario, const std::string& name, std::uint64_t seed) {
  using std::numbers::pi;
  const AgeGrid& grid = scenario.age_grid();
  const int d = scenario.dim();
  const double a_max = grid.a_max();
  StateVector phi = scenario.zero_state();

  if (name == "ones") {
    phi.samples().setOnes();
    return phi;
  }
  if (name == "linear") {
    for (int i = 0; i < grid.size(); ++i) phi.sample(i).setConstant(grid.node(i));
    return phi;
  }
  if (name == "smooth" || name == "bump") {
    for (int i = 0; i < grid.size(); ++i) {
      const double a = grid.node(i);
      const double age = name == "smooth" ? 1.0 + 0.5 * std::cos(pi * a / a_max) : std::sin(pi * a / a_max);
      for (int j = 0; j < d; ++j)
        phi.sample(i)(j) = age * (d == 1 ? 1.0 : 1.0 + 0.5 * std::cos(pi * patch_coordinate(j, d)));
    }
    return phi;
  }
  if (name == "alternating") {
    for (int i = 0; i < grid.size(); ++i) {
      const double age = 1.0 + 0.5 * std::cos(pi * grid.node(i) / a_max);
      for (int j = 0; j < d; ++j) phi.sample(i)(j) = age * (1.0 + 0.5 * (j % 2 == 0 ? 1.0 : -1.0));
    }
    return phi;
  }
  if (name == "random") {
    constexpr int modes = 3;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-0.1, 0.1);
    double c[modes][modes];
    for (auto& row : c)
      for (double& v : row) v = coef(rng);
    c[0][0] = 1.0;
    for (int i = 0; i < grid.size(); ++i) {
      const double a = grid.node(i);
      for (int j = 0; j < d; ++j) {
        const double x = patch_coordinate(j, d);
        double v = 0.0;
        for (int k = 0; k < modes; ++k)
          for (int l = 0; l < modes; ++l)
            if (d > 1 || l == 0) v += c[k][l] * std::cos(k * pi * a / a_max) * std::cos(l * pi * x);
        phi.sample(i)(j) = v;
      }
    }
    return phi;
  }
  std::string known;
  for (const auto& n : profile_names()) known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("unknown profile '" + name + "' (known: " + known + ")");
}

}  // namespace kato
