#include "dnrom/vk_beam.hpp"

#include <cmath>

#include "dnrom/errors.hpp"

namespace dnrom {

namespace {

// 5-point Gauss-Legendre on [0, 1]; exact for the degree-8 membrane terms.
constexpr std::array<double, 5> kXi = {0.04691007703066800, 0.23076534494715845, 0.5,
                                       0.76923465505284155, 0.95308992296933200};
constexpr std::array<double, 5> kW = {0.11846344252809454, 0.23931433524968324,
                                      0.28444444444444444, 0.23931433524968324,
                                      0.11846344252809454};

// Local element dofs: w_a, u_a, th_a, w_b, u_b, th_b.
std::array<double, 6> hermite(double xi, double le) {
  return {1 - 3 * xi * xi + 2 * xi * xi * xi, 0.0, le * (xi - 2 * xi * xi + xi * xi * xi),
          3 * xi * xi - 2 * xi * xi * xi,     0.0, le * (-xi * xi + xi * xi * xi)};
}

std::array<double, 6> hermite_d1(double xi, double le) {
  return {(-6 * xi + 6 * xi * xi) / le, 0.0, 1 - 4 * xi + 3 * xi * xi,
          (6 * xi - 6 * xi * xi) / le,  0.0, -2 * xi + 3 * xi * xi};
}

std::array<double, 6> hermite_d2(double xi, double le) {
  return {(-6 + 12 * xi) / (le * le), 0.0, (-4 + 6 * xi) / le,
          (6 - 12 * xi) / (le * le),  0.0, (-2 + 6 * xi) / le};
}

std::array<double, 6> axial(double xi) { return {0.0, 1 - xi, 0.0, 0.0, xi, 0.0}; }

std::array<double, 6> axial_d1(double le) { return {0.0, -1 / le, 0.0, 0.0, 1 / le, 0.0}; }

}  // namespace

void BeamConfig::validate() const {
  if (!(length > 0) || !(width > 0) || !(height > 0) || !(young_modulus > 0) || !(density > 0) ||
      !(poisson > 0))
    throw ValidationError("beam parameters must be strictly positive");
  if (n_elements < 4) throw ValidationError("beam needs at least 4 elements");
}

VkBeamForce::VkBeamForce(const BeamConfig& config, std::vector<int> free_to_full)
    : config_(config), free_to_full_(std::move(free_to_full)) {
  const int n_full = 3 * (config_.n_elements + 1);
  full_to_free_.assign(n_full, -1);
  for (int i = 0; i < static_cast<int>(free_to_full_.size()); ++i)
    full_to_free_[free_to_full_[i]] = i;
  const double le = config_.length / config_.n_elements;
  for (int g = 0; g < 5; ++g) gauss_.push_back({kW[g] * le, axial_d1(le), hermite_d1(kXi[g], le)});
}

void VkBeamForce::gather(const Vector& x, int e, std::array<double, 6>& q) const {
  for (int a = 0; a < 6; ++a) {
    const int f = full_to_free_[3 * e + a];
    q[a] = f < 0 ? 0.0 : x[f];
  }
}

Vector VkBeamForce::evaluate(const Vector& x) const {
  if (x.size() != size()) throw ValidationError("displacement size mismatch");
  const double ea = config_.young_modulus * config_.area();
  Vector f = Vector::Zero(size());
  std::array<double, 6> q{};
  for (int e = 0; e < config_.n_elements; ++e) {
    gather(x, e, q);
    std::array<double, 6> fe{};
    for (const auto& gp : gauss_) {
      double du = 0, dw = 0;
      for (int a = 0; a < 6; ++a) {
        du += gp.bu[a] * q[a];
        dw += gp.bw[a] * q[a];
      }
      // Nonlinear part of EA*eps*(bu + w' bw) with eps = u' + w'^2/2.
      const double cu = ea * 0.5 * dw * dw;
      const double cw = ea * (du * dw + 0.5 * dw * dw * dw);
      for (int a = 0; a < 6; ++a) fe[a] += gp.weight * (cu * gp.bu[a] + cw * gp.bw[a]);
    }
    for (int a = 0; a < 6; ++a) {
      const int fi = full_to_free_[3 * e + a];
      if (fi >= 0) f[fi] += fe[a];
    }
  }
  return f;
}

Matrix VkBeamForce::tangent(const Vector& x) const {
  if (x.size() != size()) throw ValidationError("displacement size mismatch");
  const double ea = config_.young_modulus * config_.area();
  Matrix kt = Matrix::Zero(size(), size());
  std::array<double, 6> q{};
  for (int e = 0; e < config_.n_elements; ++e) {
    gather(x, e, q);
    double ke[6][6] = {};
    for (const auto& gp : gauss_) {
      double du = 0, dw = 0;
      for (int a = 0; a < 6; ++a) {
        du += gp.bu[a] * q[a];
        dw += gp.bw[a] * q[a];
      }
      const double eps = du + 0.5 * dw * dw;
      for (int a = 0; a < 6; ++a) {
        const double ba = gp.bu[a] + dw * gp.bw[a];
        for (int b = 0; b < 6; ++b) {
          const double bb = gp.bu[b] + dw * gp.bw[b];
          ke[a][b] += gp.weight * ea *
                      (ba * bb - gp.bu[a] * gp.bu[b] + eps * gp.bw[a] * gp.bw[b]);
        }
      }
    }
    for (int a = 0; a < 6; ++a) {
      const int fa = full_to_free_[3 * e + a];
      if (fa < 0) continue;
      for (int b = 0; b < 6; ++b) {
        const int fb = full_to_free_[3 * e + b];
        if (fb >= 0) kt(fa, fb) += ke[a][b];
      }
    }
  }
  return kt;
}

StructuralModel assemble_vk_beam(const BeamConfig& config) {
  config.validate();
  const int ne = config.n_elements;
  const int n_full = 3 * (ne + 1);
  const double le = config.length / ne;
  const double ea = config.young_modulus * config.area();
  const double ei = config.young_modulus * config.inertia();
  const double rho_a = config.density * config.area();

  Matrix m = Matrix::Zero(n_full, n_full);
  Matrix k = Matrix::Zero(n_full, n_full);
  for (int e = 0; e < ne; ++e) {
    for (int g = 0; g < 5; ++g) {
      const double w = kW[g] * le;
      const auto nw = hermite(kXi[g], le);
      const auto nu = axial(kXi[g]);
      const auto bk = hermite_d2(kXi[g], le);
      const auto bu = axial_d1(le);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          m(3 * e + a, 3 * e + b) += w * rho_a * (nw[a] * nw[b] + nu[a] * nu[b]);
          k(3 * e + a, 3 * e + b) += w * (ea * bu[a] * bu[b] + ei * bk[a] * bk[b]);
        }
    }
  }
  // Symmetrize away round-off of the accumulation order.
  m = 0.5 * (m + m.transpose()).eval();
  k = 0.5 * (k + k.transpose()).eval();

  std::vector<int> constrained = {0, 1, 2, n_full - 3, n_full - 2, n_full - 1};
  std::vector<int> free;
  std::vector<DofLabel> labels;
  const DofKind kinds[3] = {DofKind::transverse, DofKind::axial, DofKind::rotation};
  for (int i = 3; i < n_full - 3; ++i) {
    free.push_back(i);
    labels.push_back({i / 3, kinds[i % 3]});
  }
  const int n = static_cast<int>(free.size());
  Matrix mf(n, n), kf(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      mf(i, j) = m(free[i], free[j]);
      kf(i, j) = k(free[i], free[j]);
    }
  auto force = std::make_shared<VkBeamForce>(config, free);
  return StructuralModel(std::move(mf), std::move(kf), std::move(force), std::move(labels),
                         std::move(constrained));
}

int beam_transverse_dof(const BeamConfig& config, double z) {
  config.validate();
  const int node = static_cast<int>(std::lround(z / config.length * config.n_elements));
  if (node <= 0 || node >= config.n_elements)
    throw ValidationError("probe position lies on a clamped end");
  return 3 * (node - 1);
}

}  // namespace dnrom
