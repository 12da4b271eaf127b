#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dnrom/dnf.hpp"

namespace dnrom {

/// coefficient * prod R_i^rexp[i] * prod S_i^sexp[i], on equation `eq`.
struct Monomial {
  int eq = 0;
  std::vector<int> rexp, sexp;
  double coefficient = 0.0;
};

enum class RomVariant { o2_full, o3 };
enum class NonlinearDamping { none, self, full };

struct RomOptions {
  RomVariant variant = RomVariant::o2_full;
  NonlinearDamping damping = NonlinearDamping::full;  // only used with a damped build
};

/// R'' + zeta R' + w^2 R + sum monomials = F cos(Omega t), one equation per master.
struct RomModel {
  int n = 0;
  Vector omegas;
  Vector damping;  // zeta_M + zeta_K w_r^2
  std::vector<Monomial> monomials;
  std::string variant;
  Vector forcing;  // modal amplitudes phi_r^T F
  double forcing_frequency = 0.0;

  /// Nonlinear terms and their Jacobians w.r.t. R and S (optional).
  void nonlinear(const Vector& R, const Vector& S, Vector& f, Matrix* dR = nullptr,
                 Matrix* dS = nullptr) const;
  bool velocity_dependent() const;
};

/// Reduced coefficient tables, [((r*n+i)*n+j)*n+k].
struct ReducedTensors {
  int n = 0;
  std::vector<double> A, B, C, h;
  double at(const std::vector<double>& t, int r, int i, int j, int k) const {
    return t[((r * n + i) * n + j) * n + k];
  }
};

ReducedTensors reduced_tensors(const DnfBuild& build);

RomModel assemble_rom(const DnfBuild& build, const RomOptions& options);
/// Same from stored mapping and reduced tensors (e.g. read back from an archive).
RomModel assemble_rom(const MappingTensors& t, const ReducedTensors& rt, const RomOptions& options);

/// Accelerations R'' at (R, S, t).
Vector rom_rhs(const RomModel& rom, const Vector& R, const Vector& S, double t);

/// Physical displacement and velocity from normal coordinates.
struct Reconstruction {
  Vector X, Y;
};
Reconstruction reconstruct(const MappingTensors& t, const Vector& R, const Vector& S, int order,
                           bool damped, bool velocity_from_x = false);

/// Invariance defects of the mapping along the reduced flow:
/// first = dX/dt - Y, second = M dY/dt + C Y + K X + f(X).
struct InvarianceDefect {
  Vector first, second;
};
InvarianceDefect invariance_defect(const StructuralModel& model, const MappingTensors& t,
                                   const RomModel& rom, const Vector& R, const Vector& S,
                                   int order, bool damped);

void write_rom(std::ostream& out, const RomModel& rom);
RomModel read_rom(std::istream& in);
/// Human-readable equations, one block per master.
void print_rom_equations(std::ostream& out, const RomModel& rom);

}  // namespace dnrom
