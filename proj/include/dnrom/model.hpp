#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dnrom {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class DofKind { transverse, axial, rotation, generic };

struct DofLabel {
  int node = 0;
  DofKind kind = DofKind::generic;
};

const char* to_string(DofKind kind);

/// Nonlinear part of the internal force, f(X) = G(X,X) + H(X,X,X).
class NonlinearForce {
 public:
  virtual ~NonlinearForce() = default;
  virtual int size() const = 0;
  virtual Vector evaluate(const Vector& x) const = 0;
  /// Jacobian of evaluate(); used by the harmonic balance solver.
  virtual Matrix tangent(const Vector& x) const = 0;
};

class StructuralModel {
 public:
  StructuralModel(Matrix mass, Matrix stiffness,
                  std::shared_ptr<const NonlinearForce> force,
                  std::vector<DofLabel> labels = {},
                  std::vector<int> constrained = {});

  int n_dof() const { return static_cast<int>(mass_.rows()); }
  const Matrix& mass() const { return mass_; }
  const Matrix& stiffness() const { return stiffness_; }
  const std::vector<DofLabel>& labels() const { return labels_; }
  /// Indices (in the unconstrained numbering) removed by the boundary conditions.
  const std::vector<int>& constrained_dofs() const { return constrained_; }
  const NonlinearForce& force() const { return *force_; }
  std::shared_ptr<const NonlinearForce> force_ptr() const { return force_; }

  Vector nonlinear_force(const Vector& x) const;
  Matrix nonlinear_tangent(const Vector& x) const;
  /// K x + G(x,x) + H(x,x,x)
  Vector internal_force(const Vector& x) const;

  /// Same operators, different nonlinear evaluator (used for instrumentation and scaling).
  StructuralModel with_force(std::shared_ptr<const NonlinearForce> force) const;

 private:
  Matrix mass_;
  Matrix stiffness_;
  std::shared_ptr<const NonlinearForce> force_;
  std::vector<DofLabel> labels_;
  std::vector<int> constrained_;
};

struct DampingSpec {
  double zeta_m = 0.0;  // 1/s
  double zeta_k = 0.0;  // s

  bool active() const { return zeta_m != 0.0 || zeta_k != 0.0; }
  double modal(double omega) const { return zeta_m + zeta_k * omega * omega; }
  void validate() const;
};

/// Zero nonlinearity.
class LinearForce : public NonlinearForce {
 public:
  explicit LinearForce(int n) : n_(n) {}
  int size() const override { return n_; }
  Vector evaluate(const Vector& x) const override;
  Matrix tangent(const Vector& x) const override;

 private:
  int n_;
};

/// Wraps a force and multiplies it by a constant (epsilon-scaling tests).
class ScaledForce : public NonlinearForce {
 public:
  ScaledForce(std::shared_ptr<const NonlinearForce> base, double quadratic, double cubic);
  int size() const override { return base_->size(); }
  Vector evaluate(const Vector& x) const override;
  Matrix tangent(const Vector& x) const override;

 private:
  std::shared_ptr<const NonlinearForce> base_;
  double q_, c_;
};

}  // namespace dnrom
