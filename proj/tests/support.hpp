#pragma once

#include "kato/config.hpp"
#include "kato/core_model.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace kato::test {

inline Scenario preset(const std::string& name) { return build_scenario(preset_config(name)); }

inline ScenarioConfig scalar_config(int n_age = 100, double horizon = 1.0, int n_time = 10) {
  ScenarioConfig c;
  c.name = "scalar";
  c.n_age = n_age;
  c.horizon = horizon;
  c.n_time = n_time;
  return c;
}

/// State sampled from f(a) in every component.
inline StateVector sampled(const Scenario& sc, const std::function<double(double)>& f) {
  StateVector v = sc.zero_state();
  for (int i = 0; i < sc.age_grid().size(); ++i) v.sample(i).setConstant(f(sc.age_grid().node(i)));
  return v;
}

/// Root of the Euler–Lotka equation β(1 − e^{−r})/r = 1 by bisection
/// (β > 1, so the root is positive).
inline double euler_lotka_root(double beta) {
  auto g = [beta](double r) { return beta * (1.0 - std::exp(-r)) / r - 1.0; };
  double lo = 1e-9, hi = 50.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace kato::test
