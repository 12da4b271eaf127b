#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dnrom/model.hpp"
#include "dnrom/spectrum.hpp"

namespace dnrom {

/// Solves (sigma^2 M - K) Z = rhs, optionally bordered with M phi_s for each s in `border`:
///   [D  M Phi_b; (M Phi_b)^T 0] [Z; P] = [rhs; 0].
/// Factorizations are cached by (sigma^2, border set) and shared between threads.
class SigmaSolver {
 public:
  struct Result {
    Vector z;
    Vector residual;  // one entry per border mode (P^s)
  };

  SigmaSolver(const StructuralModel& model, const Spectrum& spectrum, double eps_res = 1e-3);

  Result solve(double sigma, const Vector& rhs, const std::vector<int>& border = {}) const;

  std::size_t factorizations() const;
  std::vector<std::string> warnings() const;
  double rcond_threshold = 1e-13;

 private:
  struct Factor {
    Eigen::PartialPivLU<Matrix> lu;  // of diag(scale) A diag(scale)
    Vector scale;
  };
  struct Entry {
    double sigma2;
    std::vector<int> border;
    std::shared_ptr<const Factor> lu;
  };
  std::shared_ptr<const Factor> factor(double sigma2, const std::vector<int>& border) const;

  const StructuralModel& model_;
  const Spectrum& spectrum_;
  double eps_res_;
  mutable std::mutex mutex_;
  mutable std::vector<Entry> cache_;
  mutable std::vector<std::string> warnings_;
};

}  // namespace dnrom
