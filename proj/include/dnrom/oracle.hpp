#pragma once

#include <vector>

#include "dnrom/model.hpp"

namespace dnrom {

/// Modal-basis system: x_s'' + w_s^2 x_s + sum g^s_ij x_i x_j + sum h^s_ijk x_i x_j x_k = 0.
struct DenseModalSystem {
  int N = 0;
  Vector omega;
  std::vector<double> g;  // [(s*N+i)*N+j]
  std::vector<double> h;  // [((s*N+i)*N+j)*N+k]

  double G(int s, int i, int j) const { return g[(s * N + i) * N + j]; }
  double H(int s, int i, int j, int k) const { return h[((s * N + i) * N + j) * N + k]; }
};

/// Projects the explicit tensors of a polynomial model on the basis V (columns mass-normalized
/// eigenvectors with frequencies omega) by dense index loops, independent of polarization.
DenseModalSystem modal_system(const StructuralModel& model, const Matrix& V, const Vector& omega);

/// Order-2 modal tensors, stored [(s*N+i)*N+j].
struct ModalSecondOrder {
  int N = 0;
  std::vector<double> a, a_split, b, gamma;
  double at(const std::vector<double>& t, int s, int i, int j) const { return t[(s * N + i) * N + j]; }
};

/// Closed forms: unsplit a = (wi^2+wj^2-ws^2) g / D, split a = (1/(sum) + 1/(diff)) g / 2,
/// b = 2 g / D, gamma_ij = 2 g (wj^2 - wi^2 - ws^2) / D. Throws on resonant denominators.
ModalSecondOrder modal_second_order(const DenseModalSystem& sys);

/// a_ij via the mass-inverse operator O^2 = M^-1 K, dense; physical vector.
Vector mass_inverse_a(const StructuralModel& model, const Vector& g_ij, double wi, double wj);

/// Order-3 modal tensors over all (s,i,j,k), [((s*N+i)*N+j)*N+k], with A, B from the
/// full modal sums A^s_ijk = sum_m 2 g^s_im a^m_jk. Rows where the index multiset is
/// resonant with s (trivial or within tol) are left at zero and flagged invalid.
struct ModalThirdOrder {
  int N = 0;
  std::vector<double> A, B, r, u, mu, nu;
  std::vector<char> valid;
  std::size_t index(int s, int i, int j, int k) const {
    return ((static_cast<std::size_t>(s) * N + i) * N + j) * N + k;
  }
};

ModalThirdOrder modal_third_order(const DenseModalSystem& sys, const ModalSecondOrder& o2,
                                  double tol = 1e-6);

/// Balance system for distinct i, j, k solved as an 8x8 dense system on row s:
/// returns {r, mu, u_ijk, u_jki, u_kij, nu_ijk, nu_jki, nu_kij}.
Eigen::Matrix<double, 8, 1> balance_solve(const DenseModalSystem& sys, const ModalThirdOrder& t3,
                                          int s, int i, int j, int k);

}  // namespace dnrom
