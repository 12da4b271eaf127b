#pragma once

#include <array>
#include <string>
#include <vector>

#include "dnrom/spectrum.hpp"

namespace dnrom {

/// s = w_i + w_j (sum) or s = w_j - w_i (difference); i, j are master positions.
struct SecondOrderResonance {
  int s = 0;  // spectrum index
  int i = 0, j = 0;
  bool sum = true;
  double sigma = 0.0;
  bool declared = false;
};

/// s = +-w_i +-w_j +-w_k on the sorted master multiset {i <= j <= k}.
struct ThirdOrderResonance {
  int s = 0;
  std::array<int, 3> triple{};
  std::array<int, 3> signs{};
  double sigma = 0.0;
  bool trivial = false;
  bool declared = false;
};

/// User declaration. Either an explicit tuple (s; i, j[, k]) of mode numbers or a ratio
/// relation p:q between two masters, expanded on virtual integer frequencies.
struct ResonanceDeclaration {
  int s = -1;
  std::vector<int> modes;  // spectrum indices
  int p = 0, q = 0;        // ratio form when p > 0: w_b / w_a = p / q, modes = {a, b}
};

/// Accepts "s,i,j", "s,i,j,k" (1-based mode numbers) and "p:q(a,b)".
ResonanceDeclaration parse_resonance(const std::string& text);

struct ResonanceSet {
  double tolerance = 1e-3;
  std::vector<int> masters;
  std::vector<SecondOrderResonance> second_order;
  std::vector<ThirdOrderResonance> third_order;
  std::vector<std::string> warnings;

  bool has_second_order() const { return !second_order.empty(); }
  /// Modes s to border with for the ordered pair (i, j) at the sum/difference shift.
  std::vector<int> second_border(int i, int j, bool sum) const;
  /// Modes s resonant with the multiset {i, j, k} (any sign pattern).
  std::vector<int> third_border(int i, int j, int k) const;
  /// Master positions r whose equation keeps the monomials of multiset {i, j, k}.
  std::vector<int> third_equations(int i, int j, int k) const;
};

ResonanceSet detect_resonances(const Spectrum& spectrum, const std::vector<int>& masters,
                               double tol = 1e-3,
                               const std::vector<ResonanceDeclaration>& declared = {});

}  // namespace dnrom
