#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dnrom/model.hpp"
#include "dnrom/spectrum.hpp"

namespace dnrom {

/// Smallest relative gap |sigma^2 - w_s^2| / w_s^2 over non-trivial second/third-order
/// combinations of the masters against every computed mode.
double resonance_margin(const Spectrum& sp, const std::vector<int>& masters);

/// Random potential-derived model whose master combinations stay >= margin away from any
/// mode; seed is advanced past rejected draws.
StructuralModel nonresonant_model(int n, std::uint64_t& seed, const std::vector<int>& masters,
                                  double margin = 1e-2);

/// Worst relative error of f(x) rebuilt from polarization tensors on all modes.
double step_roundtrip_error(const StructuralModel& model, int n_states, std::uint64_t seed);

/// Direct (physical-basis) tensors against the dense modal formulas.
struct EquivalenceErrors {
  double second = 0;        // a, b, gamma vs V * oracle
  double split = 0;         // split vs unsplit modal a
  double mass_inverse = 0;  // M^-1 K path vs V * oracle
  double third = 0;         // r, u, mu, nu on non-resonant rows
  double trivial = 0;       // leftover on trivially resonant rows, relative
  int compared = 0;
};
EquivalenceErrors direct_modal_equivalence(const StructuralModel& model,
                                           const std::vector<int>& masters);

struct VerifyReport {
  int models = 0;
  double step = 0;
  EquivalenceErrors worst;
  bool step_ok() const { return step <= 1e-9; }
  bool equivalence_ok() const {
    return worst.second <= 1e-8 && worst.third <= 1e-8 && worst.trivial <= 1e-10 &&
           worst.split <= 1e-10 && worst.mass_inverse <= 1e-10 && worst.compared > 0;
  }
};

/// Runs both suites on n_models random systems (sizes up to 30 for STEP, 12 for DNF) and
/// prints one line per model when log is given.
VerifyReport run_verification(int n_models, std::uint64_t seed, std::ostream* log = nullptr);

}  // namespace dnrom
