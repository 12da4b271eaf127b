#include "dnrom/spectrum.hpp"

#include <cmath>

#include "dnrom/errors.hpp"

namespace dnrom {

Matrix Spectrum::master_matrix() const {
  Matrix p(phis.rows(), masters.size());
  for (std::size_t i = 0; i < masters.size(); ++i) p.col(i) = phis.col(masters[i]);
  return p;
}

Vector Spectrum::master_omegas() const {
  Vector w(masters.size());
  for (std::size_t i = 0; i < masters.size(); ++i) w[i] = omegas[masters[i]];
  return w;
}

void fix_sign(Eigen::Ref<Vector> v) {
  const double peak = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= (1.0 - 1e-8) * peak) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

Spectrum solve_modes(const StructuralModel& model, int n_modes) {
  const int n = model.n_dof();
  if (n_modes < 1 || n_modes > n) throw ValidationError("requested mode count outside 1..n_dof");
  const Matrix& m = model.mass();
  const Matrix& k = model.stiffness();
  if (Eigen::LLT<Matrix>(m).info() != Eigen::Success)
    throw NumericalError("mass matrix is not positive definite");
  if (Eigen::LLT<Matrix>(k).info() != Eigen::Success)
    throw NumericalError("stiffness matrix is not positive definite");

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(k, m);
  if (es.info() != Eigen::Success) throw NumericalError("generalized eigensolver failed");
  const Vector lambda = es.eigenvalues();
  Matrix v = es.eigenvectors();

  Spectrum sp;
  // Clusters: re-orthonormalize inside each group in the M inner product.
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    const bool split = i == n || lambda[i] - lambda[i - 1] > 1e-8 * std::abs(lambda[i]);
    if (!split) continue;
    if (i - 1 > start) {
      sp.clusters.emplace_back(start, i - 1);
      for (int a = start; a < i; ++a) {
        for (int b = start; b < a; ++b) v.col(a) -= v.col(b).dot(m * v.col(a)) * v.col(b);
        v.col(a) /= std::sqrt(v.col(a).dot(m * v.col(a)));
      }
    }
    start = i;
  }

  sp.omegas.resize(n_modes);
  sp.phis.resize(n, n_modes);
  for (int i = 0; i < n_modes; ++i) {
    sp.omegas[i] = std::sqrt(lambda[i]);
    Vector phi = v.col(i);
    phi /= std::sqrt(phi.dot(m * phi));
    fix_sign(phi);
    sp.phis.col(i) = phi;
  }
  std::erase_if(sp.clusters, [&](const auto& c) { return c.first >= n_modes; });
  return sp;
}

}  // namespace dnrom
