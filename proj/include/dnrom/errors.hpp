#pragma once

#include <stdexcept>
#include <string>

namespace dnrom {

// Bad input: malformed files, size mismatches, broken symmetry.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solve failed or an operator is singular where it must not be.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Refusal due to internal-resonance policy (small denominators, O3 with 1:2).
class ResonanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dnrom
