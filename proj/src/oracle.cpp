#include "dnrom/oracle.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "dnrom/errors.hpp"
#include "dnrom/polynomial_model.hpp"

namespace dnrom {

DenseModalSystem modal_system(const StructuralModel& model, const Matrix& V, const Vector& omega) {
  const auto* poly = dynamic_cast<const PolynomialForce*>(&model.force());
  const auto* lin = dynamic_cast<const LinearForce*>(&model.force());
  if (!poly && !lin) throw ValidationError("modal oracle needs an explicit polynomial model");
  const int n = model.n_dof();
  const int N = static_cast<int>(V.cols());
  if (N > 20) throw ValidationError("modal oracle is limited to 20 modes");
  DenseModalSystem sys;
  sys.N = N;
  sys.omega = omega;
  sys.g.assign(N * N * N, 0.0);
  sys.h.assign(N * N * N * N, 0.0);
  if (!poly) return sys;

  // Dense physical tensors in full-sum form.
  std::vector<double> gp(n * n * n, 0.0), hp(n * n * n * n, 0.0);
  for (int p = 0; p < n; ++p)
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) gp[(p * n + r) * n + s] = poly->g(p, r, s);
  for (int p = 0; p < n; ++p)
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) hp[((p * n + r) * n + s) * n + t] = poly->h(p, r, s, t);

  for (int a = 0; a < N; ++a)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        double v = 0.0;
        for (int p = 0; p < n; ++p)
          for (int r = 0; r < n; ++r)
            for (int s = 0; s < n; ++s)
              v += V(p, a) * gp[(p * n + r) * n + s] * V(r, i) * V(s, j);
        sys.g[(a * N + i) * N + j] = v;
      }
  // h contracted one index at a time to keep the loops at n^4 N.
  std::vector<double> t1(N * n * n * n, 0.0);
  for (int a = 0; a < N; ++a)
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) {
          double v = 0.0;
          for (int p = 0; p < n; ++p) v += V(p, a) * hp[((p * n + r) * n + s) * n + t];
          t1[((a * n + r) * n + s) * n + t] = v;
        }
  for (int a = 0; a < N; ++a)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
          double v = 0.0;
          for (int r = 0; r < n; ++r)
            for (int s = 0; s < n; ++s)
              for (int t = 0; t < n; ++t)
                v += t1[((a * n + r) * n + s) * n + t] * V(r, i) * V(s, j) * V(t, k);
          sys.h[((a * N + i) * N + j) * N + k] = v;
        }
  return sys;
}

ModalSecondOrder modal_second_order(const DenseModalSystem& sys) {
  const int N = sys.N;
  ModalSecondOrder o;
  o.N = N;
  o.a.assign(N * N * N, 0.0);
  o.a_split = o.b = o.gamma = o.a;
  for (int s = 0; s < N; ++s)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const double wi = sys.omega[i], wj = sys.omega[j], ws = sys.omega[s];
        const double ds = (wi + wj) * (wi + wj) - ws * ws;
        const double dd = (wj - wi) * (wj - wi) - ws * ws;
        if (std::abs(ds) < 1e-6 * ws * ws || std::abs(dd) < 1e-6 * ws * ws) {
          std::ostringstream msg;
          msg << "oracle: second-order resonant denominator at s=" << s << " i=" << i
              << " j=" << j;
          throw ResonanceError(msg.str());
        }
        const double g = sys.G(s, i, j);
        const double D = ds * dd;
        const int p = (s * N + i) * N + j;
        o.a[p] = (wi * wi + wj * wj - ws * ws) * g / D;
        o.a_split[p] = 0.5 * (1.0 / ds + 1.0 / dd) * g;
        o.b[p] = 2.0 * g / D;
        o.gamma[p] = 2.0 * g * (wj * wj - wi * wi - ws * ws) / D;
      }
  return o;
}

Vector mass_inverse_a(const StructuralModel& model, const Vector& g_ij, double wi, double wj) {
  const int n = model.n_dof();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix O2 = model.mass().lu().solve(model.stiffness());
  const double ss = (wi + wj) * (wi + wj), sd = (wj - wi) * (wj - wi);
  Vector v = model.mass().lu().solve(g_ij);
  v = ((wi * wi + wj * wj) * I - O2) * v;
  v = (ss * I - O2).lu().solve(v);
  v = (sd * I - O2).lu().solve(v);
  return v;
}

ModalThirdOrder modal_third_order(const DenseModalSystem& sys, const ModalSecondOrder& o2,
                                  double tol) {
  const int N = sys.N;
  ModalThirdOrder t;
  t.N = N;
  const std::size_t n4 = static_cast<std::size_t>(N) * N * N * N;
  t.A.assign(n4, 0.0);
  t.B = t.r = t.u = t.mu = t.nu = t.A;
  t.valid.assign(n4, 1);
  for (int s = 0; s < N; ++s)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
          double a = 0.0, b = 0.0;
          for (int m = 0; m < N; ++m) {
            a += 2.0 * sys.G(s, i, m) * o2.at(o2.a, m, j, k);
            b += 2.0 * sys.G(s, i, m) * o2.at(o2.b, m, j, k);
          }
          t.A[t.index(s, i, j, k)] = a;
          t.B[t.index(s, i, j, k)] = b;
        }
  const std::array<std::array<int, 3>, 4> pat = {{{1, 1, 1}, {-1, 1, 1}, {1, -1, 1}, {1, 1, -1}}};
  for (int s = 0; s < N; ++s)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
          const double wi = sys.omega[i], wj = sys.omega[j], wk = sys.omega[k];
          const double ws = sys.omega[s];
          const std::size_t p = t.index(s, i, j, k);
          const std::array<double, 3> w = {wi, wj, wk};
          // Any sign pattern of the multiset hitting w_s makes the row resonant.
          bool resonant = false;
          for (const auto& sg : pat) {
            const double sig = sg[0] * w[0] + sg[1] * w[1] + sg[2] * w[2];
            if (std::abs(sig * sig - ws * ws) <= tol * ws * ws) resonant = true;
          }
          if (resonant) {
            t.valid[p] = 0;
            continue;
          }
          auto A = [&](int x, int y, int z) { return t.A[t.index(s, x, y, z)]; };
          auto B = [&](int x, int y, int z) { return t.B[t.index(s, x, y, z)]; };
          const double S = A(i, j, k) + A(j, k, i) + A(k, i, j) + 3.0 * sys.H(s, i, j, k);
          const double Bi = B(i, j, k), Bj = B(j, k, i), Bk = B(k, i, j);
          const std::array<double, 4> P = {S - wj * wk * Bi - wk * wi * Bj - wi * wj * Bk,
                                           S - wj * wk * Bi + wk * wi * Bj + wi * wj * Bk,
                                           S + wj * wk * Bi - wk * wi * Bj + wi * wj * Bk,
                                           S + wj * wk * Bi + wk * wi * Bj - wi * wj * Bk};
          std::array<double, 4> sig{}, Z{};
          for (int c = 0; c < 4; ++c) {
            sig[c] = pat[c][0] * wi + pat[c][1] * wj + pat[c][2] * wk;
            Z[c] = P[c] / (sig[c] * sig[c] - ws * ws);
          }
          t.r[p] = (Z[0] + Z[1] + Z[2] + Z[3]) / 12.0;
          t.u[p] = (-Z[0] - Z[1] + Z[2] + Z[3]) / (4.0 * wj * wk);
          t.mu[p] = (-sig[0] * Z[0] + sig[1] * Z[1] + sig[2] * Z[2] + sig[3] * Z[3]) /
                    (12.0 * wi * wj * wk);
          t.nu[p] = (sig[0] * Z[0] - sig[1] * Z[1] + sig[2] * Z[2] + sig[3] * Z[3]) / (4.0 * wi);
        }
  return t;
}

Eigen::Matrix<double, 8, 1> balance_solve(const DenseModalSystem& sys, const ModalThirdOrder& t3,
                                          int s, int i, int j, int k) {
  const double wi2 = sys.omega[i] * sys.omega[i], wj2 = sys.omega[j] * sys.omega[j];
  const double wk2 = sys.omega[k] * sys.omega[k], O2 = sys.omega[s] * sys.omega[s];
  // Unknowns: r, mu, u_ijk, u_jki, u_kij, nu_ijk, nu_jki, nu_kij.
  Eigen::Matrix<double, 8, 8> m = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix<double, 8, 1> rhs = Eigen::Matrix<double, 8, 1>::Zero();
  m.row(0) << 0, 3, -1, -1, -1, 0, 0, 0;
  m.row(1) << 3, 0, -wj2, -wi2, 0, 0, 0, -1;
  m.row(2) << 3, 0, -wk2, 0, -wi2, 0, -1, 0;
  m.row(3) << 3, 0, 0, -wk2, -wj2, -1, 0, 0;
  m.row(4) << -3 * O2, 0, 0, 0, 0, wi2, wj2, wk2;
  m.row(5) << 0, 3 * wi2, -O2, 0, 0, 0, -1, -1;
  m.row(6) << 0, 3 * wj2, 0, -O2, 0, -1, 0, -1;
  m.row(7) << 0, 3 * wk2, 0, 0, -O2, -1, -1, 0;
  auto A = [&](int x, int y, int z) { return t3.A[t3.index(s, x, y, z)]; };
  auto B = [&](int x, int y, int z) { return t3.B[t3.index(s, x, y, z)]; };
  rhs[4] = 3 * sys.H(s, i, j, k) + A(i, j, k) + A(j, k, i) + A(k, i, j);
  rhs[5] = B(i, j, k);
  rhs[6] = B(j, k, i);
  rhs[7] = B(k, i, j);
  return m.fullPivLu().solve(rhs);
}

}  // namespace dnrom
