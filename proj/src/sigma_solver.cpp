#include "dnrom/sigma_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dnrom/errors.hpp"

namespace dnrom {

SigmaSolver::SigmaSolver(const StructuralModel& model, const Spectrum& spectrum, double eps_res)
    : model_(model), spectrum_(spectrum), eps_res_(eps_res) {}

std::size_t SigmaSolver::factorizations() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.size();
}

std::vector<std::string> SigmaSolver::warnings() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return warnings_;
}

std::shared_ptr<const SigmaSolver::Factor> SigmaSolver::factor(
    double sigma2, const std::vector<int>& border) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& e : cache_)
      if (e.border == border && std::abs(e.sigma2 - sigma2) <= 1e-12 * std::max(e.sigma2, sigma2))
        return e.lu;
  }
  const int n = model_.n_dof();
  const int b = static_cast<int>(border.size());
  if (b == 0) {
    for (int s = 0; s < spectrum_.n_computed(); ++s) {
      const double ws2 = spectrum_.omega(s) * spectrum_.omega(s);
      const double gap = std::abs(sigma2 - ws2) / ws2;
      if (gap <= eps_res_) {
        std::ostringstream msg;
        msg << "shift sigma=" << std::sqrt(sigma2) << " rad/s is resonant with mode " << s + 1
            << " (relative gap " << gap << "); declare the resonance so the system is bordered";
        throw ResonanceError(msg.str());
      }
    }
  }
  Matrix a = Matrix::Zero(n + b, n + b);
  a.topLeftCorner(n, n) = sigma2 * model_.mass() - model_.stiffness();
  for (int c = 0; c < b; ++c) {
    const Vector mphi = model_.mass() * spectrum_.phis.col(border[c]);
    a.block(0, n + c, n, 1) = mphi;
    a.block(n + c, 0, 1, n) = mphi.transpose();
  }
  // Jacobi equilibration so that the singularity test does not see the axial/bending
  // stiffness contrast of FE models; border columns are scaled to unit norm.
  Vector d(n + b);
  for (int i = 0; i < n; ++i) {
    const double k = std::max(std::abs(model_.stiffness()(i, i)), sigma2 * model_.mass()(i, i));
    d[i] = k > 0.0 ? 1.0 / std::sqrt(k) : 1.0;
  }
  for (int c = 0; c < b; ++c) {
    const double nrm = d.head(n).cwiseProduct(a.block(0, n + c, n, 1)).norm();
    d[n + c] = nrm > 0.0 ? 1.0 / nrm : 1.0;
  }
  a = d.asDiagonal() * a * d.asDiagonal();
  auto lu = std::make_shared<Factor>();
  lu->lu.compute(a);
  lu->scale = d;
  const double rc = lu->lu.rcond();
  if (!(rc > rcond_threshold)) {
    std::ostringstream msg;
    msg << "shifted system at sigma=" << std::sqrt(sigma2) << " rad/s is numerically singular (rcond "
        << rc << "); an undeclared internal resonance or an uncomputed mode is likely";
    throw NumericalError(msg.str());
  }
  std::lock_guard<std::mutex> lock(mutex_);
  for (const auto& e : cache_)
    if (e.border == border && std::abs(e.sigma2 - sigma2) <= 1e-12 * std::max(e.sigma2, sigma2))
      return e.lu;
  cache_.push_back({sigma2, border, lu});
  return lu;
}

SigmaSolver::Result SigmaSolver::solve(double sigma, const Vector& rhs,
                                       const std::vector<int>& border) const {
  const int n = model_.n_dof();
  if (rhs.size() != n) throw ValidationError("right-hand side size mismatch");
  std::vector<int> sorted = border;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const int b = static_cast<int>(sorted.size());
  Result out;
  if (rhs.isZero(0.0)) {
    out.z = Vector::Zero(n);
    out.residual = Vector::Zero(b);
    return out;
  }
  const auto lu = factor(sigma * sigma, sorted);
  Vector full = Vector::Zero(n + b);
  full.head(n) = rhs;
  const Vector x = lu->scale.cwiseProduct(lu->lu.solve(lu->scale.cwiseProduct(full)));
  out.z = x.head(n);
  out.residual = Vector::Zero(static_cast<Eigen::Index>(border.size()));
  // Report residuals in the caller's border order.
  for (std::size_t c = 0; c < border.size(); ++c) {
    const auto it = std::find(sorted.begin(), sorted.end(), border[c]);
    out.residual[c] = x[n + (it - sorted.begin())];
  }
  return out;
}

}  // namespace dnrom
