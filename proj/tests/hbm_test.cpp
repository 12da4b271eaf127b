#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "dnrom/errors.hpp"
#include "dnrom/hbm.hpp"
#include "dnrom/polynomial_model.hpp"
#include "dnrom/vk_beam.hpp"
#include "support.hpp"

using namespace dnrom;
using dnrom::testing::random_vector;

namespace {

StructuralModel duffing(double w0, double alpha, double quad = 0.0) {
  std::vector<PolynomialForce::Quadratic> q;
  if (quad != 0.0) q.push_back({0, 0, 0, quad});
  return dnrom::testing::diagonal_model({w0}, q, {{0, 0, 0, 0, alpha}});
}

Vector one_harmonic(int h, int n, int k, const Vector& a, const Vector& b) {
  Vector z = Vector::Zero(n * (2 * h + 1));
  z.segment((2 * k - 1) * n, n) = a;
  z.segment(2 * k * n, n) = b;
  return z;
}

}  // namespace

TEST(HbmTest, LinearOscillatorExactCoefficients) {
  const auto m = duffing(2.0, 0.0);
  const FullSystem sys(m, {0.3, 0.0}, 0, 0, 1.5);
  const Hbm hbm(sys, 4);
  for (double w : {0.5, 1.9, 2.0, 3.7}) {
    const double k = 4.0 - w * w, c = 0.3 * w, d = k * k + c * c;
    Vector a(1), b(1);
    a << 1.5 * k / d;
    b << 1.5 * c / d;
    const Vector r = hbm.residual(one_harmonic(4, 1, 1, a, b), w);
    EXPECT_LE(r.norm(), 1e-12);
  }
  const FullSystem free(m, {}, 0);
  EXPECT_EQ(Hbm(free, 3).residual(Vector::Zero(7), 1.0).norm(), 0.0);
  EXPECT_THROW(Hbm(free, 3, 12), ValidationError);
  EXPECT_EQ(Hbm(free, 15).samples(), 64);
  EXPECT_EQ(Hbm(free, 9).samples(), 64);
  EXPECT_EQ(Hbm(free, 3).samples(), 16);
}

TEST(HbmTest, DuffingSingleHarmonicLeaksOnlyThirdHarmonic) {
  const auto m = duffing(1.0, 0.1);
  const FullSystem sys(m, {}, 0);
  const Hbm hbm(sys, 5);
  for (double a : {0.1, 0.01}) {
    const double w = std::sqrt(1.0 + 0.75 * 0.1 * a * a);
    Vector va(1), vb(1);
    va << a;
    vb << 0.0;
    const Vector r = hbm.residual(one_harmonic(5, 1, 1, va, vb), w);
    // Only cos 3: alpha a^3 / 4.
    EXPECT_NEAR(r[5], 0.1 * a * a * a / 4, 1e-15);
    EXPECT_LE((r.norm() - std::abs(r[5])), 1e-15);
  }
}

TEST(HbmTest, AftMatchesDirectProjection) {
  // Cubic + quadratic scalar force, direct Fourier projection on a dense grid.
  const auto m = duffing(1.3, 0.7, 0.4);
  const FullSystem sys(m, {}, 0);
  const int h = 3;
  const Hbm hbm(sys, h);
  const Vector z = random_vector(2 * h + 1, 7, 0.5);
  const Vector r = hbm.residual(z, 1.0);
  const int ns = 4096;
  Vector ref = Vector::Zero(2 * h + 1);
  for (int m2 = 0; m2 < ns; ++m2) {
    const double th = 2 * M_PI * m2 / ns;
    double x = z[0];
    for (int k = 1; k <= h; ++k) x += z[2 * k - 1] * std::cos(k * th) + z[2 * k] * std::sin(k * th);
    const double f = 0.4 * x * x + 0.7 * x * x * x;
    ref[0] += f / ns;
    for (int k = 1; k <= h; ++k) {
      ref[2 * k - 1] += 2 * f * std::cos(k * th) / ns;
      ref[2 * k] += 2 * f * std::sin(k * th) / ns;
    }
  }
  // Add the linear part.
  ref[0] += 1.69 * z[0];
  for (int k = 1; k <= h; ++k) {
    ref[2 * k - 1] += (1.69 - k * k) * z[2 * k - 1];
    ref[2 * k] += (1.69 - k * k) * z[2 * k];
  }
  EXPECT_LE((r - ref).norm(), 1e-13 * ref.norm());
}

TEST(HbmTest, JacobianMatchesFiniteDifferences) {
  std::uint64_t seed = 3;
  const std::vector<int> masters = {0, 1};
  const auto model = dnrom::testing::nonresonant_model(5, seed, masters);
  const auto sp = solve_modes(model, 5);
  DnfOptions opt;
  opt.order = 2;
  opt.damping = {0.01, 0.002};
  const auto b = build_dnf(model, sp, masters, opt);
  auto rom = assemble_rom(b, {});
  rom.forcing << 0.3, 0.1;
  const RomSystem rsys(rom);
  const FullSystem fsys(model, {0.01, 0.002}, 0, 1, 0.2);
  for (const HbmSystem* sys : {static_cast<const HbmSystem*>(&rsys), static_cast<const HbmSystem*>(&fsys)}) {
    const Hbm hbm(*sys, 3);
    const Vector z = random_vector(hbm.unknowns(), 11, 0.3);
    const double w = 1.7, kappa = 0.05;
    Matrix dz;
    Vector dw, dk;
    hbm.residual(z, w, kappa, &dz, &dw, &dk);
    Matrix fd(dz.rows(), dz.cols());
    const double h = 1e-6;
    for (int j = 0; j < z.size(); ++j) {
      Vector zp = z, zm = z;
      zp[j] += h;
      zm[j] -= h;
      fd.col(j) = (hbm.residual(zp, w, kappa) - hbm.residual(zm, w, kappa)) / (2 * h);
    }
    EXPECT_LE((fd - dz).norm(), 1e-7 * dz.norm());
    const Vector fw = (hbm.residual(z, w + h, kappa) - hbm.residual(z, w - h, kappa)) / (2 * h);
    EXPECT_LE((fw - dw).norm(), 1e-7 * dw.norm());
    const Vector fk = (hbm.residual(z, w, kappa + h) - hbm.residual(z, w, kappa - h)) / (2 * h);
    EXPECT_LE((fk - dk).norm(), 1e-7 * dk.norm());
  }
}

TEST(HbmTest, LinearFrfFollowsAnalyticCurve) {
  const double w0 = 2.0, zeta = 0.02, F = 0.1;
  const auto m = duffing(w0, 0.0);
  const FullSystem sys(m, {zeta, 0.0}, 0, 0, F);
  const Hbm hbm(sys, 3);
  HbmConfig cfg;
  cfg.omega_min = 1.0;
  cfg.omega_max = 3.0;
  cfg.amplitude_max = 10.0;
  cfg.step_max = 0.02;
  cfg.max_steps = 2000;
  const auto br = frf(hbm, cfg);
  ASSERT_GT(br.points.size(), 20u);
  EXPECT_EQ(br.termination, "left frequency window");
  double peak = 0.0;
  for (std::size_t i = 0; i < br.points.size(); ++i) {
    const auto& p = br.points[i];
    const double k = w0 * w0 - p.omega * p.omega, c = zeta * p.omega;
    EXPECT_NEAR(p.amplitude, F / std::hypot(k, c), 1e-8 * F / (zeta * w0));
    EXPECT_FALSE(p.fold);
    peak = std::max(peak, p.amplitude);
  }
  // Single peak: amplitude rises, then falls, never both again.
  int changes = 0;
  for (std::size_t i = 2; i < br.points.size(); ++i) {
    const double d1 = br.points[i - 1].amplitude - br.points[i - 2].amplitude;
    const double d2 = br.points[i].amplitude - br.points[i - 1].amplitude;
    changes += (d1 > 0) != (d2 > 0);
  }
  EXPECT_EQ(changes, 1);
  // Peak of |x| for C = zeta M: F / (zeta w sqrt(w0^2 - zeta^2/4)) at the damped peak.
  const double exact = F / (zeta * std::sqrt(w0 * w0 - zeta * zeta / 4));
  EXPECT_LE(peak, exact * (1 + 1e-12));
  EXPECT_GT(peak, 0.99 * exact);
}

TEST(HbmTest, ZeroForcingGivesTrivialBranch) {
  const auto m = duffing(1.0, 0.3);
  const FullSystem sys(m, {0.05, 0.0}, 0);
  const Hbm hbm(sys, 3);
  HbmConfig cfg;
  cfg.omega_min = 0.5;
  cfg.omega_max = 1.5;
  const auto br = frf(hbm, cfg);
  for (const auto& p : br.points) EXPECT_EQ(p.amplitude, 0.0);
}

TEST(HbmTest, DuffingBackboneMatchesPerturbation) {
  const double w0 = 1.5, alpha = 0.4;
  const auto m = duffing(w0, alpha);
  const FullSystem sys(m, {}, 0);
  const Hbm hbm(sys, 5);
  HbmConfig cfg;
  cfg.amplitude_max = 1.0;
  cfg.step_max = 0.02;
  Vector mode(1);
  mode << 1.0;
  const auto br = backbone(hbm, mode, w0, cfg);
  EXPECT_EQ(br.termination, "amplitude cap reached");
  int checked = 0;
  for (const auto& p : br.points) {
    const double a = hbm.probe_harmonics(p.z, p.omega)[1];
    const double corr = 3 * alpha * a * a / (8 * w0 * w0);
    if (corr > 0.05) continue;
    EXPECT_NEAR(p.omega, w0 * (1 + corr), 0.005 * w0);
    EXPECT_LE(std::abs(p.kappa), 1e-10);
    ++checked;
  }
  EXPECT_GT(checked, 5);
  EXPECT_TRUE(br.folds().empty());
}

TEST(HbmTest, LinearBackboneIsVertical) {
  const auto m = duffing(1.5, 0.0);
  const FullSystem sys(m, {}, 0);
  const Hbm hbm(sys, 3);
  HbmConfig cfg;
  cfg.amplitude_max = 1.0;
  Vector mode(1);
  mode << 1.0;
  const auto br = backbone(hbm, mode, 1.5, cfg);
  EXPECT_GT(br.points.back().amplitude, 1.0);
  for (const auto& p : br.points) EXPECT_NEAR(p.omega, 1.5, 1e-10);
}

TEST(HbmTest, HardeningFrfHasTwoFolds) {
  const auto m = duffing(1.0, 1.0);
  const FullSystem sys(m, {0.02, 0.0}, 0, 0, 0.05);
  const Hbm hbm(sys, 5);
  HbmConfig cfg;
  cfg.omega_min = 0.7;
  cfg.omega_max = 1.8;
  cfg.amplitude_max = 10.0;
  cfg.step_max = 0.02;
  cfg.max_steps = 3000;
  const auto br = frf(hbm, cfg);
  EXPECT_EQ(br.termination, "left frequency window");
  EXPECT_EQ(br.folds().size(), 2u);
  for (const auto& p : br.points) EXPECT_LE(p.residual, cfg.tolerance);
}

TEST(HbmTest, CsvHeaderCarriesUnits) {
  const auto m = duffing(1.0, 0.0);
  const FullSystem sys(m, {}, 0);
  const Hbm hbm(sys, 2);
  Branch br;
  br.harmonics = 2;
  BranchPoint p;
  p.omega = 1.0;
  p.z = Vector::Zero(5);
  br.points.push_back(p);
  std::stringstream ss;
  write_branch_csv(ss, hbm, br, 1.0);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "omega_rad_s,omega_over_omega_ref_1,probe_amplitude_m,fold_flag_1,probe_h0_m,probe_h1_m,probe_h2_m");
}

TEST(HbmTest, SingleMasterRomBackboneMatchesMultipleScales) {
  const auto model = assemble_vk_beam(BeamConfig{});
  const auto sp = solve_modes(model, 12);
  DnfOptions opt;
  opt.order = 3;
  const auto b = build_dnf(model, sp, {0}, opt);
  const auto rom = assemble_rom(b, {RomVariant::o3});
  const auto rt = reduced_tensors(b);
  const double w0 = rom.omegas[0], ah = rt.A[0] + rt.h[0], B = rt.B[0];
  const RomSystem sys(rom);
  const Hbm hbm(sys, 7);
  HbmConfig cfg;
  // a where the correction reaches ~3%.
  const double amax = std::sqrt(0.03 / (3 * ah / (8 * w0 * w0) + B / 8));
  cfg.amplitude_max = amax;
  cfg.step_max = 0.02;
  Vector mode(1);
  mode << 1.0;
  const auto br = backbone(hbm, mode, w0, cfg);
  int checked = 0;
  for (const auto& p : br.points) {
    const double a = hbm.probe_harmonics(p.z, p.omega)[1];
    const double corr = (3 * ah / (8 * w0 * w0) + B / 8) * a * a;
    if (corr > 0.02) continue;
    EXPECT_NEAR(p.omega / (w0 * (1 + corr)), 1.0, 1e-3) << "a=" << a;
    ++checked;
  }
  EXPECT_GT(checked, 5);
}
