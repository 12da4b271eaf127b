#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "dnrom/polynomial_model.hpp"
#include "dnrom/resonance.hpp"
#include "dnrom/spectrum.hpp"
#include "dnrom/verify.hpp"

namespace dnrom::testing {

using dnrom::nonresonant_model;
using dnrom::resonance_margin;

inline Vector random_vector(int n, unsigned seed, double scale = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline double rel(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

/// Diagonal model with prescribed frequencies and a few modal coefficients.
inline StructuralModel diagonal_model(const std::vector<double>& w,
                                      std::vector<PolynomialForce::Quadratic> q = {},
                                      std::vector<PolynomialForce::Cubic> c = {}) {
  const int n = static_cast<int>(w.size());
  Matrix k = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) k(i, i) = w[i] * w[i];
  auto f = std::make_shared<PolynomialForce>(n, std::move(q), std::move(c));
  return StructuralModel(Matrix::Identity(n, n), k, f);
}

}  // namespace dnrom::testing
