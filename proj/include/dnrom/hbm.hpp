#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dnrom/dnf.hpp"
#include "dnrom/model.hpp"
#include "dnrom/rom.hpp"

namespace dnrom {

/// Second-order system M x'' + C x' + K x + f(x, x') = F cos(w t) seen by the harmonic balance.
class HbmSystem {
 public:
  virtual ~HbmSystem() = default;
  virtual int size() const = 0;
  virtual const Matrix& mass() const = 0;
  virtual const Matrix& stiffness() const = 0;
  virtual const Matrix& damping() const = 0;
  virtual const Vector& forcing() const = 0;
  virtual bool velocity_dependent() const = 0;
  /// f(x, v); Jacobians are filled when non-null.
  virtual void nonlinear(const Vector& x, const Vector& v, Vector& f, Matrix* dx,
                         Matrix* dv) const = 0;
  /// Scalar observed along the orbit (physical displacement at the probe).
  virtual double probe(const Vector& x, const Vector& v) const = 0;
};

/// Full finite-element model, Rayleigh damping, point force at one dof.
class FullSystem : public HbmSystem {
 public:
  FullSystem(const StructuralModel& model, const DampingSpec& damping, int probe_dof,
             int force_dof = -1, double force = 0.0);
  int size() const override { return model_.n_dof(); }
  const Matrix& mass() const override { return model_.mass(); }
  const Matrix& stiffness() const override { return model_.stiffness(); }
  const Matrix& damping() const override { return c_; }
  const Vector& forcing() const override { return f_; }
  bool velocity_dependent() const override { return false; }
  void nonlinear(const Vector& x, const Vector& v, Vector& f, Matrix* dx,
                 Matrix* dv) const override;
  double probe(const Vector& x, const Vector&) const override { return x[probe_]; }

 private:
  const StructuralModel& model_;
  Matrix c_;
  Vector f_;
  int probe_;
};

/// Reduced dynamics; the probe is reconstructed through the mapping when tensors are given.
class RomSystem : public HbmSystem {
 public:
  RomSystem(const RomModel& rom, const MappingTensors* tensors = nullptr, int order = 2,
            bool damped = false, int probe_dof = -1);
  int size() const override { return rom_.n; }
  const Matrix& mass() const override { return m_; }
  const Matrix& stiffness() const override { return k_; }
  const Matrix& damping() const override { return c_; }
  const Vector& forcing() const override { return rom_.forcing; }
  bool velocity_dependent() const override { return velocity_; }
  void nonlinear(const Vector& x, const Vector& v, Vector& f, Matrix* dx,
                 Matrix* dv) const override;
  double probe(const Vector& x, const Vector& v) const override;

 private:
  RomModel rom_;
  const MappingTensors* tensors_;
  int order_;
  bool damped_;
  int probe_;
  bool velocity_;
  Matrix m_, k_, c_;
};

/// Alternating frequency/time residual. Unknowns are harmonic-major:
/// [c0 | cos 1 | sin 1 | ... | cos H | sin H], each block of system size.
class Hbm {
 public:
  Hbm(const HbmSystem& system, int harmonics, int samples = 0);
  int harmonics() const { return h_; }
  int samples() const { return nt_; }
  int unknowns() const { return n_ * (2 * h_ + 1); }
  const HbmSystem& system() const { return sys_; }

  /// Residual of M x'' + C x' + kappa M x' + K x + f - F cos(w t). Derivatives filled when non-null.
  Vector residual(const Vector& z, double omega, double kappa = 0.0, Matrix* dz = nullptr,
                  Vector* domega = nullptr, Vector* dkappa = nullptr) const;

  /// Time samples (rows) of x and x'/omega at the given phases.
  Matrix displacement(const Vector& z, const Vector& theta) const;
  /// max |probe| over a fine time grid.
  double amplitude(const Vector& z, double omega) const;
  /// Fourier magnitudes of the probe signal, harmonics 0..H.
  Vector probe_harmonics(const Vector& z, double omega) const;

 private:
  const HbmSystem& sys_;
  int n_, h_, nt_;
  Matrix e_, ed_, p_;  // basis at samples, its theta-derivative, projection
  Matrix w_;           // (2H+1)^2 x N products P[h,m] E[m,g]
  Matrix wd_;          // same with E'
};

struct HbmConfig {
  int harmonics = 9;
  int samples = 0;  // 0: 2^ceil(log2(4H+2))
  double tolerance = 1e-9;
  int max_newton = 12;
  int max_steps = 400;
  double step = 0.01;
  double step_min = 1e-6;
  double step_max = 0.05;
  double omega_min = 0.0;
  double omega_max = 1e300;
  double amplitude_max = 1e300;
  double coefficient_scale = 0.0;  // 0: derived from the start point and amplitude_max
  double start_amplitude = 0.0;    // backbone start (probe units); 0: 1e-3 * amplitude_max
  double kick = 1e-4;              // backbone phase-fixing unfolding parameter scale
};

struct BranchPoint {
  double omega = 0.0;
  Vector z;
  double amplitude = 0.0;
  double kappa = 0.0;
  bool fold = false;
  double residual = 0.0;
};

struct Branch {
  std::vector<BranchPoint> points;
  std::string termination;
  int harmonics = 0;
  std::vector<int> folds() const;
};

/// Conservative backbone from the linear mode `phase` (M-weighted direction) at omega0.
Branch backbone(const Hbm& hbm, const Vector& mode, double omega0, const HbmConfig& config);
/// Forced response from omega_min upwards.
Branch frf(const Hbm& hbm, const HbmConfig& config);

/// CSV with units in the header; omega_ref normalises the second column.
void write_branch_csv(std::ostream& out, const Hbm& hbm, const Branch& branch, double omega_ref);

}  // namespace dnrom
