#include "dnrom/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <random>

#include "dnrom/dnf.hpp"
#include "dnrom/oracle.hpp"
#include "dnrom/polynomial_model.hpp"
#include "dnrom/resonance.hpp"
#include "dnrom/step.hpp"

namespace dnrom {

namespace {

double rel(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

double resonance_margin(const Spectrum& sp, const std::vector<int>& masters) {
  double margin = 1e300;
  const int n = static_cast<int>(masters.size());
  auto gap = [&](double sigma, int s) {
    const double w2 = sp.omega(s) * sp.omega(s);
    return std::abs(sigma * sigma - w2) / w2;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double wi = sp.omega(masters[i]), wj = sp.omega(masters[j]);
      for (int s = 0; s < sp.n_computed(); ++s) {
        margin = std::min(margin, gap(wi + wj, s));
        if (i != j) margin = std::min(margin, gap(wj - wi, s));
      }
      for (int k = 0; k < n; ++k) {
        const std::array<double, 3> w = {wi, wj, sp.omega(masters[k])};
        const std::array<int, 3> t = {masters[i], masters[j], masters[k]};
        for (int a = 0; a < 4; ++a) {
          std::array<int, 3> sg = {1, 1, 1};
          if (a > 0) sg[a - 1] = -1;
          bool trivial = false;
          for (int x = 0; x < 3; ++x)
            for (int y = x + 1; y < 3; ++y)
              if (t[x] == t[y] && sg[x] == -sg[y]) trivial = true;
          if (trivial) continue;
          const double sigma = sg[0] * w[0] + sg[1] * w[1] + sg[2] * w[2];
          for (int s = 0; s < sp.n_computed(); ++s) margin = std::min(margin, gap(sigma, s));
        }
      }
    }
  return margin;
}

StructuralModel nonresonant_model(int n, std::uint64_t& seed, const std::vector<int>& masters,
                                  double margin) {
  for (;; ++seed) {
    auto model = random_polynomial_model(n, seed);
    const auto sp = solve_modes(model, n);
    if (resonance_margin(sp, masters) > margin) return model;
  }
}

double step_roundtrip_error(const StructuralModel& model, int n_states, std::uint64_t seed) {
  const int n = model.n_dof();
  const auto sp = solve_modes(model, n);
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  const auto t = step_tensors(model, sp, all);
  const Matrix to_modal = sp.phis.transpose() * model.mass();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0;
  for (int m = 0; m < n_states; ++m) {
    Vector x(n);
    for (auto& v : x) v = u(rng);
    const Vector q = to_modal * x;
    Vector f = Vector::Zero(n);
    for (const auto& [k, v] : t.g) f += (k[0] == k[1] ? 1.0 : 2.0) * q[k[0]] * q[k[1]] * v;
    for (const auto& [k, v] : t.h) {
      const double mult = (k[0] == k[1] && k[1] == k[2]) ? 1 : (k[0] == k[1] || k[1] == k[2]) ? 3 : 6;
      f += mult * q[k[0]] * q[k[1]] * q[k[2]] * v;
    }
    worst = std::max(worst, rel(f, model.nonlinear_force(x)));
  }
  return worst;
}

EquivalenceErrors direct_modal_equivalence(const StructuralModel& model,
                                           const std::vector<int>& masters) {
  const int N = model.n_dof();
  const auto sp = solve_modes(model, N);
  const auto build = build_dnf(model, sp, masters, {});
  const auto& t = build.tensors;
  const auto sys = modal_system(model, sp.phis, sp.omegas);
  const auto o2 = modal_second_order(sys);
  const auto o3 = modal_third_order(sys, o2);
  const Matrix& V = sp.phis;
  const int n = static_cast<int>(masters.size());
  EquivalenceErrors e;

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int mi = masters[i], mj = masters[j];
      Vector a(N), as(N), b(N), g(N);
      for (int s = 0; s < N; ++s) {
        a[s] = o2.at(o2.a, s, mi, mj);
        as[s] = o2.at(o2.a_split, s, mi, mj);
        b[s] = o2.at(o2.b, s, mi, mj);
        g[s] = o2.at(o2.gamma, s, mi, mj);
      }
      const int p = t.i2(i, j);
      e.second = std::max({e.second, rel(t.a[p], V * a), rel(t.b[p], V * b), rel(t.gamma[p], V * g)});
      e.split = std::max(e.split, rel(V * as, V * a));
      e.mass_inverse = std::max(
          e.mass_inverse, rel(mass_inverse_a(model, build.step.G(i, j), sp.omega(mi), sp.omega(mj)), V * a));
    }

  const Matrix P = V.transpose() * model.mass();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const int mi = masters[i], mj = masters[j], mk = masters[k];
        const int p = t.i3(i, j, k);
        const Vector r = P * t.r[p], u = P * t.u[p], mu = P * t.mu[p], nu = P * t.nu[p];
        const double size = t.r[p].norm() + t.u[p].norm() + t.mu[p].norm() + t.nu[p].norm();
        auto scale = [&](const std::vector<double>& all) {
          double m = 0;
          for (int s = 0; s < N; ++s) m = std::max(m, std::abs(all[o3.index(s, mi, mj, mk)]));
          return std::max(m, 1e-300);
        };
        for (int s = 0; s < N; ++s) {
          const auto q = o3.index(s, mi, mj, mk);
          if (!o3.valid[q]) {
            const double left = std::abs(r[s]) + std::abs(u[s]) + std::abs(mu[s]) + std::abs(nu[s]);
            e.trivial = std::max(e.trivial, left / std::max(size, 1e-300));
            continue;
          }
          e.third = std::max({e.third, std::abs(r[s] - o3.r[q]) / scale(o3.r),
                              std::abs(u[s] - o3.u[q]) / scale(o3.u),
                              std::abs(mu[s] - o3.mu[q]) / scale(o3.mu),
                              std::abs(nu[s] - o3.nu[q]) / scale(o3.nu)});
          ++e.compared;
        }
      }
  return e;
}

VerifyReport run_verification(int n_models, std::uint64_t seed, std::ostream* log) {
  VerifyReport rep;
  rep.models = n_models;
  for (int m = 0; m < n_models; ++m) {
    const int n_step = 6 + (3 * m) % 25;  // 6..30
    const auto poly = random_polynomial_model(n_step, seed + 101 * m);
    const double step = step_roundtrip_error(poly, 20, seed + m);
    rep.step = std::max(rep.step, step);

    const int N = 3 + m % 10;  // 3..12
    std::vector<int> masters;
    for (int i = 0; i < std::min(N, 3); ++i) masters.push_back(i);
    std::uint64_t s = seed + 1000 + 37 * m;
    const auto model = nonresonant_model(N, s, masters);
    const auto e = direct_modal_equivalence(model, masters);
    rep.worst.second = std::max(rep.worst.second, e.second);
    rep.worst.split = std::max(rep.worst.split, e.split);
    rep.worst.mass_inverse = std::max(rep.worst.mass_inverse, e.mass_inverse);
    rep.worst.third = std::max(rep.worst.third, e.third);
    rep.worst.trivial = std::max(rep.worst.trivial, e.trivial);
    rep.worst.compared += e.compared;
    if (log)
      *log << "model " << m + 1 << ": step N=" << n_step << " rel " << step << "; dnf N=" << N
           << " second " << e.second << " split " << e.split << " mass-inverse " << e.mass_inverse
           << " third " << e.third << " trivial " << e.trivial << "\n";
  }
  return rep;
}

}  // namespace dnrom
