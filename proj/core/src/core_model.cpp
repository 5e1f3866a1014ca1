#include "kato/core_model.hpp"

#include "kato/error.hpp"
#include "kato/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kato {

std::string_view to_string(SpatialNorm norm) {
  switch (norm) {
    case SpatialNorm::one: return "one";
    case SpatialNorm::two: return "two";
    case SpatialNorm::max: return "max";
  }
  return "one";
}

SpatialNorm parse_spatial_norm(std::string_view text) {
  if (text == "one") return SpatialNorm::one;
  if (text == "two") return SpatialNorm::two;
  if (text == "max") return SpatialNorm::max;
  throw ConfigError("spatial_norm: expected one of one|two|max, got '" + std::string(text) + "'");
}

double spatial_norm(const Eigen::Ref<const Vector>& v, SpatialNorm norm) {
  switch (norm) {
    case SpatialNorm::one: return v.lpNorm<1>();
    case SpatialNorm::two: return v.norm();
    case SpatialNorm::max: return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

double operator_norm(const Matrix& m, SpatialNorm norm) {
  if (m.size() == 0) return 0.0;
  switch (norm) {
    case SpatialNorm::one: return m.cwiseAbs().colwise().sum().maxCoeff();
    case SpatialNorm::max: return m.cwiseAbs().rowwise().sum().maxCoeff();
    case SpatialNorm::two:
      if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
      if (m.isZero(0.0)) return 0.0;
      return std::sqrt(std::max(
          0.0, Eigen::SelfAdjointEigenSolver<Matrix>(m.transpose() * m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff()));
  }
  return 0.0;
}

// ---------------------------------------------------------------- grids

AgeGrid::AgeGrid(double a_max, int n_age) : a_max_(a_max), n_age_(n_age), step_(0.0) {
  if (!std::isfinite(a_max) || a_max <= 0.0)
    throw ValidationError("a_max must be finite and positive");
  if (n_age < 2) throw ValidationError("n_age must be at least 2");
  step_ = a_max / n_age;
}

int AgeGrid::steps_of(double x, std::string_view what) const {
  const double ratio = x / step_;
  const double k = std::round(ratio);
  if (!std::isfinite(ratio) || std::abs(ratio - k) > 1e-9 * std::max(1.0, std::abs(ratio))) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " = " << x << " is not a multiple of the age step " << step_;
    throw AlignmentError(msg.str());
  }
  return static_cast<int>(k);
}

TimeGrid::TimeGrid(double horizon, int n_time) : horizon_(horizon), n_time_(n_time), step_(0.0) {
  if (!std::isfinite(horizon) || horizon <= 0.0)
    throw ValidationError("T must be finite and positive");
  if (n_time < 1) throw ValidationError("n_time must be at least 1");
  step_ = horizon / n_time;
}

// ---------------------------------------------------------------- state

StateVector::StateVector(const AgeGrid& grid, int dim, SpatialNorm norm)
    : grid_(grid), norm_(norm), samples_(Matrix::Zero(dim, grid.size())) {
  if (dim < 1) throw ValidationError("state dimension must be at least 1");
}

StateVector::StateVector(const AgeGrid& grid, SpatialNorm norm, Matrix samples)
    : grid_(grid), norm_(norm), samples_(std::move(samples)) {
  if (samples_.rows() < 1) throw ValidationError("state dimension must be at least 1");
  if (samples_.cols() != grid.size())
    throw ValidationError("state has " + std::to_string(samples_.cols()) +
                          " age samples, grid has " + std::to_string(grid.size()));
}

bool StateVector::same_shape(const StateVector& other) const noexcept {
  return grid_ == other.grid_ && samples_.rows() == other.samples_.rows();
}

namespace {
void require_same_shape(const StateVector& a, const StateVector& b) {
  if (!a.same_shape(b)) throw ValidationError("state vectors live on different grids or dimensions");
}
}  // namespace

StateVector& StateVector::operator+=(const StateVector& other) {
  require_same_shape(*this, other);
  samples_ += other.samples_;
  return *this;
}

StateVector& StateVector::operator-=(const StateVector& other) {
  require_same_shape(*this, other);
  samples_ -= other.samples_;
  return *this;
}

StateVector& StateVector::operator*=(double alpha) {
  samples_ *= alpha;
  return *this;
}

StateVector operator+(StateVector lhs, const StateVector& rhs) { return lhs += rhs; }
StateVector operator-(StateVector lhs, const StateVector& rhs) { return lhs -= rhs; }
StateVector operator*(double alpha, StateVector v) { return v *= alpha; }

// ---------------------------------------------------------------- fields

OperatorField::OperatorField(int dim, Evaluate evaluate, std::optional<double> lipschitz_t,
                             std::optional<HolderInfo> holder_a)
    : dim_(dim), evaluate_(std::move(evaluate)), lipschitz_t_(lipschitz_t), holder_a_(holder_a) {
  if (dim < 1) throw ValidationError("operator dimension must be at least 1");
  if (!evaluate_) throw ValidationError("operator field has no evaluation routine");
}

Matrix OperatorField::operator()(double t, double a) const {
  Matrix m = evaluate_(t, a);
  if (m.rows() != dim_ || m.cols() != dim_)
    throw ValidationError("operator field returned a matrix of the wrong size");
  return m;
}

BirthKernel::BirthKernel(int dim, Evaluate evaluate) : dim_(dim), evaluate_(std::move(evaluate)) {
  if (dim < 1) throw ValidationError("birth kernel dimension must be at least 1");
  if (!evaluate_) throw ValidationError("birth kernel has no evaluation routine");
}

Matrix BirthKernel::operator()(double a) const {
  Matrix m = evaluate_(a);
  if (m.rows() != dim_ || m.cols() != dim_)
    throw ValidationError("birth kernel returned a matrix of the wrong size");
  return m;
}

// ---------------------------------------------------------------- scenario

Scenario::Scenario(Parts parts) : parts_(std::move(parts)) {
  const int d = parts_.dim;
  if (d < 1) throw ValidationError("dim must be at least 1");
  if (parts_.op.dim() != d)
    throw ValidationError("operator dimension " + std::to_string(parts_.op.dim()) +
                          " does not match dim " + std::to_string(d));
  if (parts_.birth.dim() != d)
    throw ValidationError("birth kernel dimension " + std::to_string(parts_.birth.dim()) +
                          " does not match dim " + std::to_string(d));
  if (parts_.reference_operator.rows() != d || parts_.reference_operator.cols() != d)
    throw ValidationError("reference_operator must be " + std::to_string(d) + "x" +
                          std::to_string(d));
  if (parts_.integrator_order != 1 && parts_.integrator_order != 2)
    throw ValidationError("integrator_order must be 1 or 2");

  const AgeGrid& grid = parts_.age_grid;
  try {
    grid.steps_of(parts_.time_grid.horizon(), "T");
    grid.steps_of(parts_.time_grid.step(), "time step T/n_time");
  } catch (const AlignmentError& e) {
    throw ValidationError(std::string("time grid is not aligned with the age grid: ") + e.what());
  }

  const Tolerances& tol = parts_.tolerances;
  for (double v : {tol.volterra, tol.cocycle, tol.membership, tol.semigroup, tol.composition})
    if (!(v > 0.0)) throw ValidationError("tolerances must be positive");

  if (parts_.s_max == 0.0) parts_.s_max = 10.0 * std::max(grid.a_max(), parts_.time_grid.horizon());
  if (!(parts_.s_max >= grid.step())) throw ValidationError("s_max must be at least one age step");

  birth_nodes_.reserve(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    Matrix b = parts_.birth(grid.node(i));
    if (!b.allFinite()) throw ValidationError("birth kernel is not finite at a = " + std::to_string(grid.node(i)));
    if ((b.array() < 0.0).any())
      throw ValidationError("birth kernel has a negative entry at a = " + std::to_string(grid.node(i)));
    birth_nodes_.push_back(std::move(b));
  }
  cache_ = std::make_shared<PropagatorCache>();
}

StateVector Scenario::zero_state() const {
  return StateVector(parts_.age_grid, parts_.dim, parts_.spatial_norm);
}

Scenario Scenario::with_operator(OperatorField op, std::string name) const {
  Parts parts = parts_;
  parts.op = std::move(op);
  if (!name.empty()) parts.name = std::move(name);
  return Scenario(std::move(parts));
}

Scenario Scenario::with_birth(BirthKernel birth) const {
  Parts parts = parts_;
  parts.birth = std::move(birth);
  return Scenario(std::move(parts));
}

// ---------------------------------------------------------------- constants

double StabilityConstants::eta() const {
  return std::max(omega0 + M0 * b_norm0, omega1 + M1 * b_norm1);
}

StabilityConstants StabilityConstants::inflated(double factor) const {
  StabilityConstants c = *this;
  c.M *= factor;
  c.M0 *= factor;
  c.M1 *= factor;
  return c;
}

void StabilityConstants::validate() const {
  if (!(M >= 1.0) || !(M0 >= 1.0) || !(M1 >= 1.0))
    throw ValidationError("stability constants require M, M0, M1 >= 1");
  if (!std::isfinite(varpi) || !std::isfinite(omega0) || !std::isfinite(omega1))
    throw ValidationError("stability exponents must be finite");
}

// ---------------------------------------------------------------- norms

void require_on_grid(const StateVector& phi, const Scenario& scenario, std::string_view what) {
  if (!(phi.grid() == scenario.age_grid()) || phi.dim() != scenario.dim())
    throw ValidationError(std::string(what) + " does not match the scenario grid or dimension");
}

double norm_E0(const StateVector& phi) {
  const AgeGrid& grid = phi.grid();
  double sum = 0.0;
  for (int i = 0; i < phi.size(); ++i) sum += grid.weight(i) * spatial_norm(phi.sample(i), phi.norm());
  return sum;
}

double graph_norm(const Eigen::Ref<const Vector>& v, const Scenario& scenario) {
  const SpatialNorm n = scenario.spatial_norm();
  return spatial_norm(v, n) + spatial_norm(scenario.reference_operator() * v, n);
}

double spatial_norm_ell(const Eigen::Ref<const Vector>& v, const Scenario& scenario, int ell) {
  return ell == 0 ? spatial_norm(v, scenario.spatial_norm()) : graph_norm(v, scenario);
}

double norm_E1(const StateVector& phi, const Scenario& scenario) {
  if (phi.dim() != scenario.dim()) throw ValidationError("norm_E1: dimension mismatch");
  const AgeGrid& grid = phi.grid();
  double sum = 0.0;
  for (int i = 0; i < phi.size(); ++i) sum += grid.weight(i) * graph_norm(phi.sample(i), scenario);
  return sum;
}

double norm_ell(const StateVector& phi, const Scenario& scenario, int ell) {
  return ell == 0 ? norm_E0(phi) : norm_E1(phi, scenario);
}

double norm_Y(const StateVector& psi, const Scenario& scenario) {
  const double e1 = norm_E1(psi, scenario);
  const AgeGrid& grid = psi.grid();
  const int n = grid.n_age();
  const double h = grid.step();
  double deriv = 0.0;
  for (int i = 0; i <= n; ++i) {
    Vector d;
    if (i == 0)
      d = (psi.sample(1) - psi.sample(0)) / h;
    else if (i == n)
      d = (psi.sample(n) - psi.sample(n - 1)) / h;
    else
      d = (psi.sample(i + 1) - psi.sample(i - 1)) / (2.0 * h);
    deriv += grid.weight(i) * spatial_norm(d, psi.norm());
  }
  return e1 + deriv;
}

double lp_norm(const StateVector& phi, const Scenario& scenario, double p, int ell) {
  if (!(p >= 1.0)) throw ContractViolation("lp_norm requires p >= 1");
  const AgeGrid& grid = phi.grid();
  double sum = 0.0;
  for (int i = 0; i < phi.size(); ++i)
    sum += grid.weight(i) * std::pow(spatial_norm_ell(phi.sample(i), scenario, ell), p);
  return std::pow(sum, 1.0 / p);
}

double induced_norm(const Matrix& k, const Scenario& scenario, int ell) {
  const SpatialNorm n = scenario.spatial_norm();
  const double plain = operator_norm(k, n);
  if (ell == 0) return plain;
  const Matrix& l = scenario.reference_operator();
  const double l_scale = l.cwiseAbs().maxCoeff();
  if (l_scale == 0.0) return plain;
  const double commutator = (k * l - l * k).cwiseAbs().maxCoeff();
  if (commutator <= 1e-12 * std::max(1.0, k.cwiseAbs().maxCoeff() * l_scale)) return plain;
  return plain + operator_norm(l * k, n);
}

double birth_norm(const Scenario& scenario, int ell) {
  double best = 0.0;
  for (const Matrix& b : scenario.birth_at_nodes()) best = std::max(best, induced_norm(b, scenario, ell));
  return best;
}

Vector birth_quadrature(const Scenario& scenario, const StateVector& phi) {
  require_on_grid(phi, scenario, "birth_quadrature input");
  const AgeGrid& grid = scenario.age_grid();
  const auto& b = scenario.birth_at_nodes();
  Vector sum = Vector::Zero(scenario.dim());
  for (int i = 0; i < grid.size(); ++i) sum.noalias() += grid.weight(i) * (b[i] * phi.sample(i));
  return sum;
}

Membership check_membership_Y(const StateVector& psi, const Scenario& scenario, double tol) {
  const Vector gap = psi.sample(0) - birth_quadrature(scenario, psi);
  const double r = spatial_norm(gap, scenario.spatial_norm());
  return {r <= tol, r};
}

}  // namespace kato
