#include <random>

#include <gtest/gtest.h>

#include "dnrom/polynomial_model.hpp"
#include "dnrom/step.hpp"
#include "dnrom/vk_beam.hpp"

using namespace dnrom;

namespace {

Vector rnd(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double rel(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

Vector dense_g(const PolynomialForce& p, const Vector& v, const Vector& w) {
  const int n = p.size();
  Vector out = Vector::Zero(n);
  for (int a = 0; a < n; ++a)
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) out[a] += p.g(a, r, s) * v[r] * w[s];
  return out;
}

Vector dense_h(const PolynomialForce& p, const Vector& u, const Vector& v, const Vector& w) {
  const int n = p.size();
  Vector out = Vector::Zero(n);
  for (int a = 0; a < n; ++a)
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) out[a] += p.h(a, r, s, t) * u[r] * v[s] * w[t];
  return out;
}

/// Counts nonlinear-force calls.
class CountingForce : public NonlinearForce {
 public:
  explicit CountingForce(std::shared_ptr<const NonlinearForce> base) : base_(std::move(base)) {}
  int size() const override { return base_->size(); }
  Vector evaluate(const Vector& x) const override {
    ++calls;
    return base_->evaluate(x);
  }
  Matrix tangent(const Vector& x) const override { return base_->tangent(x); }
  mutable std::size_t calls = 0;

 private:
  std::shared_ptr<const NonlinearForce> base_;
};

}  // namespace

TEST(StepTest, QuadraticMatchesContraction) {
  const auto model = random_polynomial_model(7, 3);
  const auto& p = dynamic_cast<const PolynomialForce&>(model.force());
  const Vector v = rnd(7, 1), w = rnd(7, 2);
  EXPECT_LE(rel(quadratic_force(model, v, v), dense_g(p, v, v)), 1e-11);
  EXPECT_LE(rel(quadratic_force(model, v, w), dense_g(p, v, w)), 1e-11);
  EXPECT_LE(quadratic_force(model, v, Vector::Zero(7)).norm(), 1e-14 * dense_g(p, v, v).norm());
  EXPECT_EQ((quadratic_force(model, v, w) - quadratic_force(model, w, v)).norm(), 0.0);
}

TEST(StepTest, CubicMatchesContractionAndIsSymmetric) {
  const auto model = random_polynomial_model(6, 4);
  const auto& p = dynamic_cast<const PolynomialForce&>(model.force());
  const Vector u = rnd(6, 1), v = rnd(6, 2), w = rnd(6, 3);
  EXPECT_LE(rel(cubic_force(model, v, v, v), dense_h(p, v, v, v)), 1e-11);
  const Vector ref = cubic_force(model, u, v, w);
  EXPECT_LE(rel(ref, dense_h(p, u, v, w)), 1e-11);
  EXPECT_LE(rel(cubic_force(model, u, w, v), ref), 1e-12);
  EXPECT_LE(rel(cubic_force(model, v, u, w), ref), 1e-12);
  EXPECT_LE(rel(cubic_force(model, v, w, u), ref), 1e-12);
  EXPECT_LE(rel(cubic_force(model, w, u, v), ref), 1e-12);
  EXPECT_LE(rel(cubic_force(model, w, v, u), ref), 1e-12);
  EXPECT_LE(cubic_force(model, u, v, Vector::Zero(6)).norm(), 1e-13 * ref.norm());
}

TEST(StepTest, AmplitudeFlagGivesSameTensors) {
  const auto model = random_polynomial_model(5, 9);
  const Vector v = rnd(5, 1), w = rnd(5, 2);
  StepOptions opt;
  opt.amplitude = 0.1;
  EXPECT_LE(rel(quadratic_force(model, v, w, opt), quadratic_force(model, v, w)), 1e-10);
  EXPECT_LE(rel(cubic_force(model, v, w, v, opt), cubic_force(model, v, w, v)), 1e-9);
}

TEST(StepTest, EntryAndEvaluationCount) {
  const auto base = random_polynomial_model(6, 5);
  auto counter = std::make_shared<CountingForce>(base.force_ptr());
  const auto model = base.with_force(counter);
  const auto sp = solve_modes(model, 6);
  const auto t = step_tensors(model, sp, {0, 2});
  EXPECT_EQ(t.g.size(), 3u);
  EXPECT_EQ(t.h.size(), 4u);
  EXPECT_EQ(counter->calls, step_evaluation_count(2));
  EXPECT_EQ(step_evaluation_count(2), 18u);
  EXPECT_EQ(t.evaluations, counter->calls);
  counter->calls = 0;
  step_tensors(model, sp, {0, 1, 2});
  EXPECT_EQ(counter->calls, step_evaluation_count(3));
}

TEST(StepTest, LinearModelGivesZeroTensors) {
  StructuralModel model(Matrix::Identity(3, 3), Matrix::Identity(3, 3) * 3, nullptr);
  const auto sp = solve_modes(model, 3);
  const auto t = step_tensors(model, sp, {0, 1});
  for (const auto& [k, v] : t.g) EXPECT_EQ(v.norm(), 0.0);
  for (const auto& [k, v] : t.h) EXPECT_EQ(v.norm(), 0.0);
}

TEST(StepTest, RoundTripReconstructsForce) {
  for (unsigned m = 0; m < 3; ++m) {
    const int n = 8 + 4 * m;
    const auto model = random_polynomial_model(n, 100 + m);
    const auto sp = solve_modes(model, n);
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    const auto t = step_tensors(model, sp, all);
    // X = Phi q, f(X) = sum_ij G_ij q_i q_j + sum_ijk H_ijk q_i q_j q_k.
    const Matrix Pinv = sp.phis.transpose() * model.mass();
    for (unsigned s = 0; s < 5; ++s) {
      const Vector x = rnd(n, 50 + s);
      const Vector q = Pinv * x;
      Vector f = Vector::Zero(n);
      for (const auto& [k, v] : t.g) f += (k[0] == k[1] ? 1.0 : 2.0) * q[k[0]] * q[k[1]] * v;
      for (const auto& [k, v] : t.h) {
        const double mult = (k[0] == k[1] && k[1] == k[2]) ? 1 : (k[0] == k[1] || k[1] == k[2]) ? 3 : 6;
        f += mult * q[k[0]] * q[k[1]] * q[k[2]] * v;
      }
      EXPECT_LE(rel(f, model.nonlinear_force(x)), 1e-9);
    }
  }
}

TEST(StepTest, BeamFirstModeQuadraticIsAxial) {
  const auto model = assemble_vk_beam(BeamConfig{});
  const auto sp = solve_modes(model, 3);
  const auto t = step_tensors(model, sp, {0});
  const Vector& g = t.G(0, 0);
  double axial = 0;
  for (int i = 0; i < model.n_dof(); ++i)
    if (model.labels()[i].kind == DofKind::axial) axial += g[i] * g[i];
  EXPECT_NEAR(std::sqrt(axial), g.norm(), 1e-12 * g.norm());
}
