#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <vector>

#include "dnrom/model.hpp"
#include "dnrom/spectrum.hpp"

namespace dnrom {

/// Polarization settings. With amplitude != 1 the even/odd parts are taken from
/// f(+-lambda x) and rescaled, mirroring classical prescribed-displacement STEP.
struct StepOptions {
  double amplitude = 1.0;
};

/// Even (quadratic) and odd (cubic) parts of the nonlinear force.
Vector quadratic_part(const StructuralModel& model, const Vector& x, const StepOptions& opt = {});
Vector cubic_part(const StructuralModel& model, const Vector& x, const StepOptions& opt = {});

/// G(v, w), exact symmetric bilinear form.
Vector quadratic_force(const StructuralModel& model, const Vector& v, const Vector& w,
                       const StepOptions& opt = {});
/// H(u, v, w), exact symmetric trilinear form.
Vector cubic_force(const StructuralModel& model, const Vector& u, const Vector& v,
                   const Vector& w, const StepOptions& opt = {});

/// G and H on master modes, indexed by position in `masters` (0..n-1).
struct StepTensors {
  std::vector<int> masters;  // mode indices into the spectrum
  std::map<std::array<int, 2>, Vector> g;  // i <= j
  std::map<std::array<int, 3>, Vector> h;  // i <= j <= k
  std::size_t evaluations = 0;

  int n() const { return static_cast<int>(masters.size()); }
  const Vector& G(int i, int j) const;
  const Vector& H(int i, int j, int k) const;
};

StepTensors step_tensors(const StructuralModel& model, const Spectrum& spectrum,
                         const std::vector<int>& masters, const StepOptions& opt = {});

/// Number of nonlinear-force calls made by step_tensors for n masters:
/// two per distinct nonzero multiset of at most three master indices.
std::size_t step_evaluation_count(int n);

}  // namespace dnrom
