#include "kato/propagator.hpp"

#include "kato/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace kato {

namespace {

Matrix step_map(const Scenario& scenario, double t, int k) {
  const AgeGrid& grid = scenario.age_grid();
  const double h = grid.step();
  const int d = scenario.dim();
  if (scenario.integrator_order() == 2) {
    const double mid = grid.node(k) + 0.5 * h;
    Matrix ha = h * scenario.op()(t, mid);
    if (d == 1) return Matrix::Constant(1, 1, std::exp(ha(0, 0)));
    return ha.exp();
  }
  Matrix lhs = Matrix::Identity(d, d) - h * scenario.op()(t, grid.node(k + 1));
  Eigen::PartialPivLU<Matrix> lu(lhs);
  if (!std::isfinite(lu.rcond()) || lu.rcond() < 1e-14)
    throw StepSizeError("implicit Euler step is singular at a = " + std::to_string(grid.node(k + 1)) +
                        "; refine the age grid");
  return lu.inverse();
}

}  // namespace

Propagator::Propagator(const Scenario& scenario, double t) : t_(t) {
  const int n = scenario.age_grid().n_age();
  const int d = scenario.dim();
  steps_.reserve(n);
  origin_.reserve(n + 1);
  origin_.push_back(Matrix::Identity(d, d));
  for (int k = 0; k < n; ++k) {
    steps_.push_back(step_map(scenario, t, k));
    if (!steps_.back().allFinite())
      throw StepSizeError("age step map is not finite at t = " + std::to_string(t));
    origin_.push_back(steps_.back() * origin_.back());
  }
}

void Propagator::advance(int from, int to, Eigen::Ref<Vector> v) const {
  Vector tmp(v.size());
  for (int k = from; k < to; ++k) {
    tmp.noalias() = steps_[k] * v;
    v = tmp;
  }
}

Vector Propagator::apply(int from, int to, const Eigen::Ref<const Vector>& v) const {
  Vector out = v;
  advance(from, to, out);
  return out;
}

Matrix Propagator::matrix(int from, int to) const {
  const auto d = origin_.front().rows();
  Matrix out = Matrix::Identity(d, d);
  for (int k = from; k < to; ++k) out = steps_[k] * out;
  return out;
}

std::size_t Propagator::bytes() const noexcept {
  const auto d = origin_.front().rows();
  return (steps_.size() + origin_.size()) * static_cast<std::size_t>(d * d) * sizeof(double);
}

std::shared_ptr<const Propagator> PropagatorCache::get(const Scenario& scenario, double t) {
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(t);
    if (it != entries_.end()) {
      order_.splice(order_.end(), order_, it->second.position);
      return it->second.value;
    }
  }
  auto built = std::make_shared<const Propagator>(scenario, t);
  std::lock_guard lock(mutex_);
  auto it = entries_.find(t);
  if (it != entries_.end()) return it->second.value;
  order_.push_back(t);
  entries_.emplace(t, Entry{built, std::prev(order_.end())});
  bytes_ += built->bytes();
  while (bytes_ > max_bytes_ && order_.size() > 1) {
    auto victim = entries_.find(order_.front());
    bytes_ -= victim->second.value->bytes();
    entries_.erase(victim);
    order_.pop_front();
  }
  return built;
}

void PropagatorCache::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
  order_.clear();
  bytes_ = 0;
}

std::shared_ptr<const Propagator> propagator_at(const Scenario& scenario, double t) {
  return scenario.propagator_cache().get(scenario, t);
}

Vector propagate(const Scenario& scenario, const PropagationRequest& req) {
  const AgeGrid& grid = scenario.age_grid();
  if (req.v0.size() != scenario.dim()) throw ValidationError("propagate: v0 has the wrong dimension");
  if (req.sigma > req.a) throw ContractViolation("propagate: sigma must not exceed a");
  const int from = grid.steps_of(req.sigma, "sigma");
  const int to = grid.steps_of(req.a, "a");
  if (from < 0 || to > grid.n_age()) throw ContractViolation("propagate: ages must lie in [0, a_max]");
  if (from == to) return req.v0;
  return propagator_at(scenario, req.t)->apply(from, to, req.v0);
}

double cocycle_residual(const Scenario& scenario, double t, double sigma, double r, double a,
                        const Vector& v0) {
  if (!(sigma <= r && r <= a)) throw ContractViolation("cocycle_residual requires sigma <= r <= a");
  const Vector direct = propagate(scenario, {t, sigma, a, v0});
  const Vector inner = propagate(scenario, {t, sigma, r, v0});
  const Vector outer = propagate(scenario, {t, r, a, inner});
  return spatial_norm(direct - outer, scenario.spatial_norm());
}

std::pair<double, double> fit_exponential_bound(const std::vector<double>& spans,
                                                const std::vector<double>& norms, double min_span) {
  double rate = -std::numeric_limits<double>::infinity();
  double longest = 0.0;
  for (std::size_t i = 0; i < spans.size(); ++i) longest = std::max(longest, spans[i]);
  const double cutoff = std::min(min_span, longest);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i] <= 0.0 || spans[i] < cutoff) continue;
    rate = std::max(rate, std::log(std::max(norms[i], 1e-300)) / spans[i]);
  }
  if (!std::isfinite(rate)) rate = 0.0;
  double m = 1.0;
  for (std::size_t i = 0; i < spans.size(); ++i) m = std::max(m, norms[i] * std::exp(-rate * spans[i]));
  return {m, rate};
}

StabilityConstants estimate_bounds(const Scenario& scenario, double t, int samples,
                                   std::uint64_t seed) {
  if (samples < 1) throw ContractViolation("estimate_bounds requires samples >= 1");
  const AgeGrid& grid = scenario.age_grid();
  const int n = grid.n_age();
  const auto prop = propagator_at(scenario, t);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<int> rows{0};
  for (int i = 1; i < samples; ++i) rows.push_back(pick(rng));

  const int stride = std::max(1, n / 16);
  std::vector<double> spans, norms;
  for (int sigma : rows) {
    Matrix p = Matrix::Identity(scenario.dim(), scenario.dim());
    for (int a = sigma + 1; a <= n; ++a) {
      p = prop->step(a - 1) * p;
      if ((a - sigma) % stride == 0 || a == n) {
        spans.push_back((a - sigma) * grid.step());
        norms.push_back(operator_norm(p, scenario.spatial_norm()));
      }
    }
  }
  const auto [m, rate] = fit_exponential_bound(spans, norms, 0.5 * grid.a_max());
  StabilityConstants c;
  c.M = m;
  c.varpi = rate;
  c.source = ConstantsSource::estimated;
  return c;
}

}  // namespace kato
