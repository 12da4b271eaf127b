#pragma once

#include <utility>
#include <vector>

#include "dnrom/model.hpp"

namespace dnrom {

struct Spectrum {
  Vector omegas;             // ascending, rad/s
  Matrix phis;               // columns mass-normalized
  std::vector<int> masters;  // 0-based indices into omegas
  std::vector<std::pair<int, int>> clusters;  // [first, last] of near-equal eigenvalues

  int n_computed() const { return static_cast<int>(omegas.size()); }
  double omega(int i) const { return omegas[i]; }
  Vector phi(int i) const { return phis.col(i); }
  /// Master-mode matrix, one column per master.
  Matrix master_matrix() const;
  Vector master_omegas() const;
};

/// Lowest n_modes eigenpairs of K phi = w^2 M phi. The largest-magnitude entry of each
/// vector is made positive (first such entry when several tie to 1e-8).
Spectrum solve_modes(const StructuralModel& model, int n_modes);

/// Makes the largest-magnitude entry positive; shared by everything that normalizes modes.
void fix_sign(Eigen::Ref<Vector> v);

}  // namespace dnrom
