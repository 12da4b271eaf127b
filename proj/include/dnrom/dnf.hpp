#pragma once

#include <array>
#include <vector>

#include "dnrom/model.hpp"
#include "dnrom/resonance.hpp"
#include "dnrom/sigma_solver.hpp"
#include "dnrom/spectrum.hpp"
#include "dnrom/step.hpp"

namespace dnrom {

/// Residual force returned by a bordered solve.
struct BorderedResidual {
  int order = 2;       // 2: which = 0 (Zs) or 1 (Zd); 3: which = 0..3 (Z0..Z3)
  int which = 0;
  std::array<int, 3> idx{};  // master positions (k unused at order 2)
  int s = 0;                 // spectrum index of the border mode
  double value = 0.0;
};

/// Mapping vectors over ordered master tuples. Order-2 index i*n+j, order-3 (i*n+j)*n+k.
struct MappingTensors {
  int n = 0;
  std::vector<int> masters;
  Vector omegas;  // master frequencies
  Matrix phi;     // master mode shapes, one column each

  std::vector<Vector> a, b, gamma, zs, zd;

  bool damped = false;
  DampingSpec damping;
  std::vector<Vector> c, alpha, beta, zss, zdd;

  bool third = false;
  std::vector<Vector> r, u, mu, nu;
  std::array<std::vector<Vector>, 4> z;

  std::vector<BorderedResidual> residuals;
  ResonanceSet resonances;

  int n_dof() const { return static_cast<int>(phi.rows()); }
  int i2(int i, int j) const { return i * n + j; }
  int i3(int i, int j, int k) const { return (i * n + j) * n + k; }
};

/// Third-order force vectors A_ijk = 2 G(phi_i, a_jk), B_ijk = 2 G(phi_i, b_jk).
struct ForceTensors {
  int n = 0;
  std::vector<Vector> A, B;  // index (i*n+j)*n+k
  std::size_t quadratic_calls = 0;
};

/// Solver-independent step: Zs at w_i+w_j, Zd at w_j-w_i, rhs G(phi_i, phi_j).
MappingTensors second_order_tensors(const StructuralModel& model, const Spectrum& spectrum,
                                    const StepTensors& step, const ResonanceSet& resonances,
                                    const SigmaSolver& solver);

ForceTensors third_order_force_tensors(const StructuralModel& model,
                                       const MappingTensors& order2,
                                       const StepOptions& opt = {});

/// Adds r, u, mu, nu. Refuses when a second-order resonance is flagged.
void third_order_tensors(const StructuralModel& model, const StepTensors& step,
                         const ForceTensors& forces, const SigmaSolver& solver,
                         MappingTensors& tensors);

/// Adds c, alpha, beta for Rayleigh damping C = zeta_m M + zeta_k K.
void damping_tensors(const StructuralModel& model, const DampingSpec& damping,
                     const SigmaSolver& solver, MappingTensors& tensors);

/// theta_ij = -1/2 K^-1 G(phi_i, phi_j), i, j spectrum indices.
Vector static_modal_derivative(const StructuralModel& model, const Spectrum& spectrum, int i,
                               int j);

struct DnfOptions {
  int order = 3;
  double eps_res = 1e-3;
  DampingSpec damping;
  std::vector<ResonanceDeclaration> declared;
  StepOptions step;
};

/// Everything needed downstream (ROM assembly, reconstruction).
struct DnfBuild {
  StepTensors step;
  MappingTensors tensors;
  ForceTensors forces;
  std::vector<Vector> C;  // 2 G(phi_i, c_jk) when damped
  std::vector<std::string> warnings;
};

/// Full pipeline on a spectrum that should contain all (or at least all relevant) modes.
DnfBuild build_dnf(const StructuralModel& model, const Spectrum& spectrum,
                   const std::vector<int>& masters, const DnfOptions& options);

/// M-norm sqrt(v^T M v).
double m_norm(const StructuralModel& model, const Vector& v);

}  // namespace dnrom
