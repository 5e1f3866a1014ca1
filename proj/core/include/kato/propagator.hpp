#pragma once

#include "kato/core_model.hpp"

#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>

namespace kato {

/// Frozen-time age propagator U_{A(t)}(a_j, a_i) on the age grid.
///
/// Holds the one-step maps P_k = U(a_{k+1}, a_k) and the cumulative maps
/// U(a_j, 0). Order 2 uses the exponential midpoint rule exp(h·A(t, a_k + h/2));
/// order 1 uses implicit Euler (I − h·A(t, a_{k+1}))^{-1}.
class Propagator {
 public:
  Propagator(const Scenario& scenario, double t);

  double time() const noexcept { return t_; }
  int n_steps() const noexcept { return static_cast<int>(steps_.size()); }

  const Matrix& step(int k) const { return steps_[k]; }
  const Matrix& from_origin(int j) const { return origin_[j]; }

  /// v ← U(a_to, a_from) v, marching node by node.
  void advance(int from, int to, Eigen::Ref<Vector> v) const;
  Vector apply(int from, int to, const Eigen::Ref<const Vector>& v) const;
  Matrix matrix(int from, int to) const;

  std::size_t bytes() const noexcept;

 private:
  double t_;
  std::vector<Matrix> steps_;
  std::vector<Matrix> origin_;
};

/// Per-scenario memo of propagators keyed by frozen time. Bounded LRU; safe
/// for concurrent readers, and observationally absent (entries are pure).
class PropagatorCache {
 public:
  explicit PropagatorCache(std::size_t max_bytes = std::size_t{512} << 20) : max_bytes_(max_bytes) {}

  std::shared_ptr<const Propagator> get(const Scenario& scenario, double t);
  void clear();

 private:
  using Order = std::list<double>;
  struct Entry {
    std::shared_ptr<const Propagator> value;
    Order::iterator position;
  };

  std::mutex mutex_;
  std::map<double, Entry> entries_;
  Order order_;
  std::size_t bytes_ = 0;
  std::size_t max_bytes_;
};

std::shared_ptr<const Propagator> propagator_at(const Scenario& scenario, double t);

struct PropagationRequest {
  double t;
  double sigma;
  double a;
  Vector v0;
};

/// U_{A(t)}(a, σ) v0.
Vector propagate(const Scenario& scenario, const PropagationRequest& req);

/// ‖U(a,σ)v0 − U(a,r)U(r,σ)v0‖ in the spatial norm.
double cocycle_residual(const Scenario& scenario, double t, double sigma, double r, double a,
                        const Vector& v0);

/// Smallest (M, ϖ) with ‖U(a,σ)‖ ≤ M e^{ϖ(a−σ)} over sampled node pairs. The
/// rate ϖ is the largest log-growth rate over pairs spanning at least half
/// the age interval; M is then the smallest constant ≥ 1 covering all pairs.
StabilityConstants estimate_bounds(const Scenario& scenario, double t, int samples,
                                   std::uint64_t seed = 0);

/// Fit helper shared with the product-stability estimator: given (τ_i, n_i)
/// with n_i = ‖operator‖ over a span τ_i, returns (M, rate).
std::pair<double, double> fit_exponential_bound(const std::vector<double>& spans,
                                                const std::vector<double>& norms,
                                                double min_span);

}  // namespace kato
