#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dnrom/model.hpp"

namespace dnrom {

/// f_p(x) = sum_{r,s} g^p_rs x_r x_s + sum_{r,s,t} h^p_rst x_r x_s x_t (full sums).
/// Stored once per canonical index tuple as monomial coefficients.
class PolynomialForce : public NonlinearForce {
 public:
  struct Quadratic {
    int p, r, s;  // r <= s
    double coefficient;
  };
  struct Cubic {
    int p, r, s, t;  // r <= s <= t
    double coefficient;
  };

  PolynomialForce(int n, std::vector<Quadratic> quadratic, std::vector<Cubic> cubic);

  int size() const override { return n_; }
  Vector evaluate(const Vector& x) const override;
  Matrix tangent(const Vector& x) const override;

  const std::vector<Quadratic>& quadratic() const { return quadratic_; }
  const std::vector<Cubic>& cubic() const { return cubic_; }

  /// Full symmetric tensor entry g^p_rs (monomial coefficient divided by multiplicity).
  double g(int p, int r, int s) const;
  double h(int p, int r, int s, int t) const;

 private:
  int n_;
  std::vector<Quadratic> quadratic_;
  std::vector<Cubic> cubic_;
};

/// Text format, 1-based indices, values are full-sum tensor entries:
///   [dimensions] n_dof N
///   [mass] / [stiffness]   row col value      (mirrored)
///   [quadratic]            p r s value        (g^p_rs, r<=s)
///   [cubic]                p r s t value      (h^p_rst, r<=s<=t)
StructuralModel parse_polynomial_model(std::istream& in);
StructuralModel load_polynomial_model(const std::string& path);
void write_polynomial_model(std::ostream& out, const StructuralModel& model);

/// Dense SPD (M, K) and potential-derived g, h; deterministic in seed.
StructuralModel random_polynomial_model(int n, std::uint64_t seed, double g_scale = 1.0,
                                        double h_scale = 1.0);

}  // namespace dnrom
