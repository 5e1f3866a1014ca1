#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kato {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class SpatialNorm { one, two, max };

std::string_view to_string(SpatialNorm norm);
SpatialNorm parse_spatial_norm(std::string_view text);

double spatial_norm(const Eigen::Ref<const Vector>& v, SpatialNorm norm);

/// Operator norm of a d×d matrix induced by the spatial norm.
double operator_norm(const Matrix& m, SpatialNorm norm);

/// Uniform age grid a_i = i·step on [0, a_max].
class AgeGrid {
 public:
  AgeGrid(double a_max, int n_age);

  double a_max() const noexcept { return a_max_; }
  int n_age() const noexcept { return n_age_; }
  double step() const noexcept { return step_; }
  int size() const noexcept { return n_age_ + 1; }
  double node(int i) const noexcept { return i == n_age_ ? a_max_ : i * step_; }

  /// Composite trapezoid weight of node i.
  double weight(int i) const noexcept {
    return (i == 0 || i == n_age_) ? 0.5 * step_ : step_;
  }

  /// Number of age steps in an offset x that must lie on the grid.
  /// Throws AlignmentError otherwise; `what` names the offending quantity.
  int steps_of(double x, std::string_view what) const;

  bool operator==(const AgeGrid& other) const noexcept {
    return a_max_ == other.a_max_ && n_age_ == other.n_age_;
  }

 private:
  double a_max_;
  int n_age_;
  double step_;
};

class TimeGrid {
 public:
  TimeGrid(double horizon, int n_time);

  double horizon() const noexcept { return horizon_; }
  int n_time() const noexcept { return n_time_; }
  double step() const noexcept { return step_; }
  double node(int m) const noexcept { return m == n_time_ ? horizon_ : m * step_; }

 private:
  double horizon_;
  int n_time_;
  double step_;
};

/// A density sampled on the age grid: column i of samples() is φ(a_i) ∈ R^d.
class StateVector {
 public:
  StateVector(const AgeGrid& grid, int dim, SpatialNorm norm);
  StateVector(const AgeGrid& grid, SpatialNorm norm, Matrix samples);

  const AgeGrid& grid() const noexcept { return grid_; }
  SpatialNorm norm() const noexcept { return norm_; }
  int dim() const noexcept { return static_cast<int>(samples_.rows()); }
  int size() const noexcept { return static_cast<int>(samples_.cols()); }

  auto sample(int i) { return samples_.col(i); }
  auto sample(int i) const { return samples_.col(i); }
  const Matrix& samples() const noexcept { return samples_; }
  Matrix& samples() noexcept { return samples_; }

  bool is_finite() const { return samples_.allFinite(); }
  bool same_shape(const StateVector& other) const noexcept;

  StateVector& operator+=(const StateVector& other);
  StateVector& operator-=(const StateVector& other);
  StateVector& operator*=(double alpha);

 private:
  AgeGrid grid_;
  SpatialNorm norm_;
  Matrix samples_;
};

StateVector operator+(StateVector lhs, const StateVector& rhs);
StateVector operator-(StateVector lhs, const StateVector& rhs);
StateVector operator*(double alpha, StateVector v);

struct HolderInfo {
  double rho;
  double constant;
};

/// (t, a) ↦ A(t, a) ∈ R^{d×d}. Evaluation must be deterministic.
class OperatorField {
 public:
  using Evaluate = std::function<Matrix(double t, double a)>;

  OperatorField(int dim, Evaluate evaluate,
                std::optional<double> lipschitz_t = std::nullopt,
                std::optional<HolderInfo> holder_a = std::nullopt);

  Matrix operator()(double t, double a) const;
  int dim() const noexcept { return dim_; }
  std::optional<double> lipschitz_t() const noexcept { return lipschitz_t_; }
  std::optional<HolderInfo> holder_a() const noexcept { return holder_a_; }

 private:
  int dim_;
  Evaluate evaluate_;
  std::optional<double> lipschitz_t_;
  std::optional<HolderInfo> holder_a_;
};

/// a ↦ b(a) ∈ R^{d×d}, entrywise nonnegative.
class BirthKernel {
 public:
  using Evaluate = std::function<Matrix(double a)>;

  BirthKernel(int dim, Evaluate evaluate);

  Matrix operator()(double a) const;
  int dim() const noexcept { return dim_; }

 private:
  int dim_;
  Evaluate evaluate_;
};

struct Tolerances {
  double volterra = 1e-8;
  double cocycle = 1e-6;
  double membership = 1e-8;
  double semigroup = 1e-6;
  double composition = 1e-8;
};

class PropagatorCache;

/// A complete, validated problem instance. Immutable; copies share the
/// internal propagator cache, which is keyed on the operator field.
class Scenario {
 public:
  struct Parts {
    std::string name;
    AgeGrid age_grid;
    TimeGrid time_grid;
    int dim;
    OperatorField op;
    BirthKernel birth;
    Matrix reference_operator;
    SpatialNorm spatial_norm = SpatialNorm::one;
    int integrator_order = 2;
    Tolerances tolerances{};
    double s_max = 0.0;  // 0 selects 10·max(a_max, T)
  };

  explicit Scenario(Parts parts);

  const std::string& name() const noexcept { return parts_.name; }
  const AgeGrid& age_grid() const noexcept { return parts_.age_grid; }
  const TimeGrid& time_grid() const noexcept { return parts_.time_grid; }
  int dim() const noexcept { return parts_.dim; }
  const OperatorField& op() const noexcept { return parts_.op; }
  const BirthKernel& birth() const noexcept { return parts_.birth; }
  const Matrix& reference_operator() const noexcept { return parts_.reference_operator; }
  SpatialNorm spatial_norm() const noexcept { return parts_.spatial_norm; }
  int integrator_order() const noexcept { return parts_.integrator_order; }
  const Tolerances& tolerances() const noexcept { return parts_.tolerances; }
  double s_max() const noexcept { return parts_.s_max; }
  double horizon() const noexcept { return parts_.time_grid.horizon(); }

  /// b(a_i) at every age node, evaluated once at construction.
  const std::vector<Matrix>& birth_at_nodes() const noexcept { return birth_nodes_; }

  StateVector zero_state() const;

  Scenario with_operator(OperatorField op, std::string name = {}) const;
  Scenario with_birth(BirthKernel birth) const;

  PropagatorCache& propagator_cache() const { return *cache_; }

 private:
  Parts parts_;
  std::vector<Matrix> birth_nodes_;
  std::shared_ptr<PropagatorCache> cache_;
};

enum class ConstantsSource { declared, estimated };

struct StabilityConstants {
  double M = 1.0;
  double varpi = 0.0;
  double M0 = 1.0;
  double M1 = 1.0;
  double omega0 = 0.0;
  double omega1 = 0.0;
  double b_norm0 = 0.0;
  double b_norm1 = 0.0;
  ConstantsSource source = ConstantsSource::declared;

  double M_ell(int ell) const { return ell == 0 ? M0 : M1; }
  double omega_ell(int ell) const { return ell == 0 ? omega0 : omega1; }
  double b_norm(int ell) const { return ell == 0 ? b_norm0 : b_norm1; }

  /// max{ω₀ + M₀‖b‖₀, ω₁ + M₁‖b‖₁}
  double eta() const;

  /// Copy with every M scaled by `factor` (slack for discretization error).
  StabilityConstants inflated(double factor) const;

  void validate() const;
};

// Discrete norms. E0 is the trapezoid-in-age L1 norm of the spatial norm; E1
// adds the same norm of Lref·φ; Y adds the E0 norm of the central-difference
// age derivative.
double norm_E0(const StateVector& phi);
double norm_E1(const StateVector& phi, const Scenario& scenario);
double norm_Y(const StateVector& psi, const Scenario& scenario);

/// norm_E0 for ell = 0, norm_E1 for ell = 1.
double norm_ell(const StateVector& phi, const Scenario& scenario, int ell);

/// Spatial graph norm ‖v‖ + ‖Lref v‖.
double graph_norm(const Eigen::Ref<const Vector>& v, const Scenario& scenario);

/// Spatial norm of level ell (0: plain, 1: graph).
double spatial_norm_ell(const Eigen::Ref<const Vector>& v, const Scenario& scenario, int ell);

/// Discrete L_p-in-age norm of the level-ell spatial norm.
double lp_norm(const StateVector& phi, const Scenario& scenario, double p, int ell = 0);

/// Induced norm of K on the level-ell spatial space. For ell = 1 this is the
/// exact induced norm when Lref is zero, ‖K‖ when K commutes with Lref, and
/// the upper bound ‖K‖ + ‖Lref K‖ otherwise.
double induced_norm(const Matrix& k, const Scenario& scenario, int ell);

/// max over age nodes of induced_norm(b(a_i)).
double birth_norm(const Scenario& scenario, int ell);

/// Trapezoid quadrature Σ_i w_i b(a_i) φ(a_i).
Vector birth_quadrature(const Scenario& scenario, const StateVector& phi);

struct Membership {
  bool member;
  double residual;
};

Membership check_membership_Y(const StateVector& psi, const Scenario& scenario, double tol);

/// Throws ValidationError unless phi lives on the scenario's grid and dimension.
void require_on_grid(const StateVector& phi, const Scenario& scenario, std::string_view what);

}  // namespace kato
