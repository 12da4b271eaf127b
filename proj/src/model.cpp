#include "dnrom/model.hpp"

#include <sstream>

#include "dnrom/errors.hpp"

namespace dnrom {

const char* to_string(DofKind kind) {
  switch (kind) {
    case DofKind::transverse: return "transverse";
    case DofKind::axial: return "axial";
    case DofKind::rotation: return "rotation";
    default: return "generic";
  }
}

namespace {

void check_symmetric(const Matrix& a, const char* name) {
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    std::ostringstream msg;
    msg << name << " matrix is not symmetric (max asymmetry " << asym << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

StructuralModel::StructuralModel(Matrix mass, Matrix stiffness,
                                 std::shared_ptr<const NonlinearForce> force,
                                 std::vector<DofLabel> labels, std::vector<int> constrained)
    : mass_(std::move(mass)),
      stiffness_(std::move(stiffness)),
      force_(std::move(force)),
      labels_(std::move(labels)),
      constrained_(std::move(constrained)) {
  const int n = static_cast<int>(mass_.rows());
  if (n == 0 || mass_.cols() != n || stiffness_.rows() != n || stiffness_.cols() != n)
    throw ValidationError("mass and stiffness must be square and of equal size");
  if (!force_) force_ = std::make_shared<LinearForce>(n);
  if (force_->size() != n) throw ValidationError("nonlinear force size does not match operators");
  check_symmetric(mass_, "mass");
  check_symmetric(stiffness_, "stiffness");
  if (labels_.empty()) {
    labels_.resize(n);
    for (int i = 0; i < n; ++i) labels_[i] = {i, DofKind::generic};
  }
  if (static_cast<int>(labels_.size()) != n) throw ValidationError("one label per dof required");
}

Vector StructuralModel::nonlinear_force(const Vector& x) const {
  if (x.size() != n_dof()) throw ValidationError("displacement size mismatch");
  return force_->evaluate(x);
}

Matrix StructuralModel::nonlinear_tangent(const Vector& x) const {
  if (x.size() != n_dof()) throw ValidationError("displacement size mismatch");
  return force_->tangent(x);
}

Vector StructuralModel::internal_force(const Vector& x) const {
  if (x.size() != n_dof()) throw ValidationError("displacement size mismatch");
  return stiffness_ * x + force_->evaluate(x);
}

StructuralModel StructuralModel::with_force(std::shared_ptr<const NonlinearForce> force) const {
  return StructuralModel(mass_, stiffness_, std::move(force), labels_, constrained_);
}

void DampingSpec::validate() const {
  if (!(zeta_m >= 0.0) || !(zeta_k >= 0.0))
    throw ValidationError("damping coefficients must be non-negative");
}

Vector LinearForce::evaluate(const Vector& x) const { return Vector::Zero(x.size()); }

Matrix LinearForce::tangent(const Vector& x) const { return Matrix::Zero(x.size(), x.size()); }

ScaledForce::ScaledForce(std::shared_ptr<const NonlinearForce> base, double quadratic,
                         double cubic)
    : base_(std::move(base)), q_(quadratic), c_(cubic) {}

Vector ScaledForce::evaluate(const Vector& x) const {
  const Vector fp = base_->evaluate(x);
  const Vector fm = base_->evaluate(-x);
  return 0.5 * q_ * (fp + fm) + 0.5 * c_ * (fp - fm);
}

Matrix ScaledForce::tangent(const Vector& x) const {
  const Matrix jp = base_->tangent(x);
  const Matrix jm = base_->tangent(-x);
  return 0.5 * q_ * (jp - jm) + 0.5 * c_ * (jp + jm);
}

}  // namespace dnrom
