#include <cmath>

#include <gtest/gtest.h>

#include "dnrom/dnf.hpp"
#include "dnrom/errors.hpp"
#include "dnrom/polynomial_model.hpp"
#include "dnrom/vk_beam.hpp"
#include "support.hpp"

using namespace dnrom;
using dnrom::testing::rel;

using dnrom::testing::diagonal_model;

TEST(ResonanceTest, DetectionExamples) {
  {
    const auto m = diagonal_model({1, 2.5, 5});
    const auto sp = solve_modes(m, 3);
    const auto r = detect_resonances(sp, {0});
    EXPECT_FALSE(r.has_second_order());
  }
  {
    const auto m = diagonal_model({1, 2, 5});
    const auto sp = solve_modes(m, 3);
    const auto r = detect_resonances(sp, {0, 1});
    ASSERT_TRUE(r.has_second_order());
    EXPECT_EQ(r.second_order[0].s, 1);
    EXPECT_EQ(r.second_border(0, 0, true), std::vector<int>{1});
  }
  {
    const auto m = diagonal_model({1, 2.7, 6.1});
    const auto sp = solve_modes(m, 3);
    const auto r = detect_resonances(sp, {0, 1, 2});
    for (int s = 0; s < 3; ++s)
      for (int m2 = 0; m2 < 3; ++m2) {
        const auto b = r.third_border(m2, m2, s);
        EXPECT_NE(std::find(b.begin(), b.end(), s), b.end());
      }
    for (const auto& e : r.third_order) EXPECT_TRUE(e.trivial);
  }
}

TEST(ResonanceTest, RatioDeclarations) {
  const auto m = diagonal_model({1, 5.4});
  const auto sp = solve_modes(m, 2);
  const auto r = detect_resonances(sp, {0, 1}, 1e-3, {parse_resonance("3:1(1,2)")});
  // {1,1,1} kept on equation 2 and {1,1,2} on equation 1, nothing at second order.
  EXPECT_FALSE(r.has_second_order());
  EXPECT_EQ(r.third_equations(0, 0, 0), (std::vector<int>{0, 1}));
  EXPECT_EQ(r.third_equations(0, 0, 1), (std::vector<int>{0, 1}));
  EXPECT_EQ(r.third_equations(0, 1, 1), (std::vector<int>{0}));
  EXPECT_EQ(r.third_equations(1, 1, 1), (std::vector<int>{1}));
  EXPECT_THROW(parse_resonance("x"), ValidationError);
  const auto d = parse_resonance("2,1,1");
  EXPECT_EQ(d.s, 1);
  EXPECT_EQ(d.modes, (std::vector<int>{0, 0}));
}

TEST(SigmaSolverTest, ZeroRhsAndHandBorderedCase) {
  const auto m = diagonal_model({1, 2, 3});
  const auto sp = solve_modes(m, 3);
  SigmaSolver solver(m, sp);
  const auto z0 = solver.solve(1.5, Vector::Zero(3));
  EXPECT_EQ(z0.z.norm(), 0.0);
  Vector e2 = Vector::Unit(3, 1);
  const auto r = solver.solve(2.0, e2, {1});
  EXPECT_NEAR(r.z[1], 0.0, 1e-15);
  EXPECT_NEAR(r.z.norm(), 0.0, 1e-15);
  EXPECT_NEAR(r.residual[0], 1.0, 1e-15);
  EXPECT_THROW(solver.solve(2.0, e2), ResonanceError);
}

TEST(SigmaSolverTest, CacheSharesFactorizations) {
  const auto m = diagonal_model({1, 2.3, 3.7});
  const auto sp = solve_modes(m, 3);
  SigmaSolver solver(m, sp);
  solver.solve(1.5, Vector::Ones(3));
  solver.solve(-1.5, Vector::Ones(3));
  solver.solve(1.5, Vector::Ones(3), {1});
  EXPECT_EQ(solver.factorizations(), 2u);
}

TEST(DnfTest, StaticModalDerivativeIdentityOnBeam) {
  const auto model = assemble_vk_beam(BeamConfig{});
  const auto sp = solve_modes(model, model.n_dof());
  DnfOptions opt;
  opt.order = 2;
  const auto b = build_dnf(model, sp, {0, 1, 2}, opt);
  for (int i = 0; i < 3; ++i) {
    const Vector theta = static_modal_derivative(model, sp, i, i);
    const Vector& zd = b.tensors.zd[b.tensors.i2(i, i)];
    EXPECT_LE(rel(zd, 2 * theta), 1e-9);
    EXPECT_LE(m_norm(model, theta - 0.5 * zd), 1e-9 * m_norm(model, theta));
  }
}

TEST(DnfTest, ZeroForcesGiveZeroTensors) {
  const auto m = diagonal_model({1, 2.3, 3.7});
  const auto sp = solve_modes(m, 3);
  DnfOptions opt;
  opt.damping = {0.01, 0.001};
  const auto b = build_dnf(m, sp, {0, 1}, opt);
  for (const auto* set : {&b.tensors.a, &b.tensors.b, &b.tensors.gamma, &b.tensors.c,
                          &b.tensors.r, &b.tensors.u, &b.tensors.mu, &b.tensors.nu})
    for (const auto& v : *set) EXPECT_EQ(v.norm(), 0.0);
}

TEST(DnfTest, ConservativeLimitHasNoDampingTensors) {
  std::uint64_t seed = 1;
  const auto model = dnrom::testing::nonresonant_model(5, seed, {0, 1});
  const auto sp = solve_modes(model, 5);
  DnfOptions opt;
  opt.order = 2;
  const auto b = build_dnf(model, sp, {0, 1}, opt);
  EXPECT_FALSE(b.tensors.damped);
  SigmaSolver solver(model, sp);
  auto t = b.tensors;
  damping_tensors(model, DampingSpec{}, solver, t);
  for (const auto& v : t.c) EXPECT_EQ(v.norm(), 0.0);
  for (const auto& v : t.alpha) EXPECT_EQ(v.norm(), 0.0);
  for (const auto& v : t.beta) EXPECT_EQ(v.norm(), 0.0);
}

TEST(DnfTest, SymmetriesOfMappingAndZVectors) {
  std::uint64_t seed = 3;
  const std::vector<int> masters = {0, 1, 2};
  const auto model = dnrom::testing::nonresonant_model(7, seed, masters);
  const auto sp = solve_modes(model, 7);
  const auto b = build_dnf(model, sp, masters, {});
  const auto& t = b.tensors;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      EXPECT_LE(rel(t.a[t.i2(i, j)], t.a[t.i2(j, i)]), 1e-12);
      EXPECT_LE(rel(t.b[t.i2(i, j)], t.b[t.i2(j, i)]), 1e-12);
    }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        auto Z = [&](int c, int x, int y, int z) -> const Vector& { return t.z[c][t.i3(x, y, z)]; };
        const double tol = 1e-10;
        for (auto p : {t.i3(i, k, j), t.i3(j, i, k), t.i3(j, k, i), t.i3(k, i, j), t.i3(k, j, i)})
          EXPECT_LE(rel(t.z[0][p], Z(0, i, j, k)), tol);
        EXPECT_LE(rel(Z(1, i, k, j), Z(1, i, j, k)), tol);
        EXPECT_LE(rel(Z(3, j, k, i), Z(1, i, j, k)), tol);
        EXPECT_LE(rel(Z(2, j, i, k), Z(1, i, j, k)), tol);
        EXPECT_LE(rel(Z(2, k, i, j), Z(1, i, j, k)), tol);
        EXPECT_LE(rel(Z(3, k, j, i), Z(1, i, j, k)), tol);
      }
}

TEST(DnfTest, BorderedSolvesAreMassOrthogonalAndReturnProjection) {
  std::uint64_t seed = 11;
  const std::vector<int> masters = {0, 1, 2};
  const auto model = dnrom::testing::nonresonant_model(8, seed, masters);
  const auto sp = solve_modes(model, 8);
  const auto b = build_dnf(model, sp, masters, {});
  const auto& t = b.tensors;
  ASSERT_FALSE(t.residuals.empty());
  for (const auto& r : t.residuals) {
    ASSERT_EQ(r.order, 3);
    const Vector& z = t.z[r.which][t.i3(r.idx[0], r.idx[1], r.idx[2])];
    EXPECT_LE(std::abs(sp.phi(r.s).dot(model.mass() * z)), 1e-10 * std::max(m_norm(model, z), 1e-300));
  }
}

TEST(DnfTest, SecondOrderResonanceRefusedAtThirdOrder) {
  const auto m = diagonal_model({1, 2, 5.3}, {{1, 0, 0, 1.0}});
  const auto sp = solve_modes(m, 3);
  DnfOptions opt;
  EXPECT_THROW(build_dnf(m, sp, {0, 1}, opt), ResonanceError);
  opt.order = 2;
  const auto b = build_dnf(m, sp, {0, 1}, opt);
  // Zs_00 bordered with mode 2: no component along it, residual equals g^2_11.
  const Vector& zs = b.tensors.zs[b.tensors.i2(0, 0)];
  EXPECT_NEAR(zs[1], 0.0, 1e-14);
  // 1:2 also makes w_2 - w_1 = w_1: the difference shift of the mixed pair is bordered too.
  int found = 0;
  for (const auto& r : b.tensors.residuals) {
    if (r.which == 0 && r.idx[0] == 0 && r.idx[1] == 0) {
      EXPECT_EQ(r.s, 1);
      EXPECT_NEAR(r.value, 1.0, 1e-14);
      ++found;
    } else {
      EXPECT_EQ(r.which, 1);
      EXPECT_EQ(r.s, 0);
    }
  }
  EXPECT_EQ(found, 1);
}

TEST(DnfTest, SlaveResonanceRefused) {
  const auto m = diagonal_model({1, 2.5, 3.0});
  const auto sp = solve_modes(m, 3);
  EXPECT_THROW(build_dnf(m, sp, {0}, {}), ResonanceError);
}

TEST(DnfTest, PureMassDampingSpecialization) {
  std::uint64_t seed = 21;
  const auto model = dnrom::testing::nonresonant_model(5, seed, {0, 1});
  const auto sp = solve_modes(model, 5);
  DnfOptions opt;
  opt.order = 2;
  opt.damping = {0.3, 0.0};
  const auto b = build_dnf(model, sp, {0, 1}, opt);
  const auto& t = b.tensors;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const int p = t.i2(i, j);
      const double wi = t.omegas[i], wj = t.omegas[j];
      const Vector ref = 0.3 * t.b[p] - 0.3 * (t.zss[p] + t.zdd[p]) - 0.3 * (wi / wj) * (t.zss[p] - t.zdd[p]);
      EXPECT_LE(rel(t.c[p], ref), 1e-13);
      EXPECT_LE(rel(t.alpha[p], -wj * wj * t.c[p]), 1e-15);
    }
}

// Scalar-by-scalar modal evaluation of the damping tensor with hand-solved Zss, Zdd.
TEST(DnfTest, DampingTensorMatchesModalEvaluation) {
  std::uint64_t seed = 31;
  const auto model = dnrom::testing::nonresonant_model(2, seed, {0, 1});
  const auto sp = solve_modes(model, 2);
  DnfOptions opt;
  opt.order = 2;
  opt.damping = {0.2, 3e-3};
  const auto b = build_dnf(model, sp, {0, 1}, opt);
  const auto& t = b.tensors;
  const double zm = 0.2, zk = 3e-3;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double wi = sp.omega(i), wj = sp.omega(j);
      const Vector g = quadratic_force(model, sp.phi(i), sp.phi(j));
      Vector c_modal(2);
      for (int s = 0; s < 2; ++s) {
        const double ws2 = sp.omega(s) * sp.omega(s);
        const double ds = (wi + wj) * (wi + wj) - ws2, dd = (wj - wi) * (wj - wi) - ws2;
        const double gs = sp.phi(s).dot(g);
        const double zs = gs / ds, zd = gs / dd, zss = zs / ds, zdd = zd / dd;
        const double a = 0.5 * (zs + zd), bb = (zd - zs) / (2 * wi * wj);
        c_modal[s] = (zm + 3 * wi * wi * zk) * bb - 2 * zk * a + (-zm + 2 * wi * wi * zk) * (zss + zdd) +
                     (-zm + 2 * wj * wj * zk) * (wi / wj) * (zss - zdd);
      }
      const Vector c_proj = sp.phis.transpose() * model.mass() * t.c[t.i2(i, j)];
      EXPECT_LE(rel(c_proj, c_modal), 1e-10);
    }
}

TEST(DnfTest, MappingOrderScaling) {
  std::uint64_t seed = 41;
  const std::vector<int> masters = {0, 1};
  const auto base = dnrom::testing::nonresonant_model(6, seed, masters);
  const auto sp = solve_modes(base, 6);
  const auto b1 = build_dnf(base, sp, masters, {});
  for (double eps : {1e-2, 1e-4}) {
    const auto scaled = base.with_force(std::make_shared<ScaledForce>(base.force_ptr(), eps, eps));
    const auto be = build_dnf(scaled, sp, masters, {});
    for (int p = 0; p < 4; ++p) {
      EXPECT_LE(rel(be.tensors.a[p], eps * b1.tensors.a[p]), 1e-8);
      EXPECT_LE(rel(be.tensors.gamma[p], eps * b1.tensors.gamma[p]), 1e-8);
    }
    // Order 3 = eps (from H) + eps^2 (from A, B): recover both parts from two builds.
    const auto cubic_only = base.with_force(std::make_shared<ScaledForce>(base.force_ptr(), 0.0, 1.0));
    const auto bh = build_dnf(cubic_only, sp, masters, {});
    for (int p = 0; p < 8; ++p) {
      const Vector quad_part = b1.tensors.r[p] - bh.tensors.r[p];
      const Vector expected = eps * bh.tensors.r[p] + eps * eps * quad_part;
      EXPECT_LE(rel(be.tensors.r[p], expected), 1e-8);
    }
  }
}

TEST(DnfTest, SlowFastDegeneration) {
  // One master at w=1, slaves at >= 12 with dense coupling.
  const std::vector<double> w = {1.0, 12.0, 13.7, 15.9, 19.1};
  std::vector<PolynomialForce::Quadratic> q;
  for (int s = 1; s < 5; ++s) q.push_back({s, 0, 0, 0.3 * s});
  const auto m = diagonal_model(w, q);
  const auto sp = solve_modes(m, 5);
  DnfOptions opt;
  opt.order = 2;
  const auto b = build_dnf(m, sp, {0}, opt);
  const auto& t = b.tensors;
  const double na = m_norm(m, t.a[0]);
  EXPECT_LE(m_norm(m, t.a[0] - t.zd[0]), 0.02 * na);
  EXPECT_LE(t.omegas[0] * t.omegas[0] * m_norm(m, t.b[0]), 0.05 * na);
}

TEST(DnfTest, VelocityTensorsFromStoredZ) {
  std::uint64_t seed = 51;
  const std::vector<int> masters = {0, 1};
  const auto model = dnrom::testing::nonresonant_model(5, seed, masters);
  const auto sp = solve_modes(model, 5);
  const auto b = build_dnf(model, sp, masters, {});
  const auto& t = b.tensors;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double wi = t.omegas[i], wj = t.omegas[j];
      const int p = t.i2(i, j);
      EXPECT_LE(rel(t.gamma[p], ((wj - wi) / wj) * t.zd[p] + ((wj + wi) / wj) * t.zs[p]), 1e-15);
    }
}
