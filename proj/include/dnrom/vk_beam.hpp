#pragma once

#include <array>
#include <vector>

#include "dnrom/model.hpp"

namespace dnrom {

struct BeamConfig {
  double length = 1.0;
  double width = 0.01;
  double height = 0.01;
  double young_modulus = 210e9;
  double density = 8750.0;
  double poisson = 0.3;  // stored only; Euler-Bernoulli kinematics ignore it
  int n_elements = 20;

  double area() const { return width * height; }
  double inertia() const { return width * height * height * height / 12.0; }
  void validate() const;
};

/// Von Karman beam force: eps = u' + w'^2/2, curvature w''. Works on free dofs.
class VkBeamForce : public NonlinearForce {
 public:
  VkBeamForce(const BeamConfig& config, std::vector<int> free_to_full);

  int size() const override { return static_cast<int>(free_to_full_.size()); }
  Vector evaluate(const Vector& x) const override;
  Matrix tangent(const Vector& x) const override;

 private:
  struct GaussPoint {
    double weight;
    std::array<double, 6> bu;      // d u'/dq
    std::array<double, 6> bw;      // d w'/dq
  };
  void gather(const Vector& x, int e, std::array<double, 6>& q) const;

  BeamConfig config_;
  std::vector<int> free_to_full_;
  std::vector<int> full_to_free_;
  std::vector<GaussPoint> gauss_;
};

/// Clamped-clamped beam along z. Per node: transverse, axial, rotation.
StructuralModel assemble_vk_beam(const BeamConfig& config);

/// Free-dof index of the transverse displacement at the node nearest to z.
int beam_transverse_dof(const BeamConfig& config, double z);

}  // namespace dnrom
