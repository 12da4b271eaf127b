#include "dnrom/dnf.hpp"

#include <cmath>
#include <sstream>

#include "dnrom/errors.hpp"

namespace dnrom {

double m_norm(const StructuralModel& model, const Vector& v) {
  return std::sqrt(std::max(0.0, v.dot(model.mass() * v)));
}

MappingTensors second_order_tensors(const StructuralModel& model, const Spectrum& spectrum,
                                    const StepTensors& step, const ResonanceSet& resonances,
                                    const SigmaSolver& solver) {
  MappingTensors t;
  t.n = step.n();
  t.masters = step.masters;
  t.resonances = resonances;
  t.omegas.resize(t.n);
  t.phi.resize(model.n_dof(), t.n);
  for (int i = 0; i < t.n; ++i) {
    t.omegas[i] = spectrum.omega(t.masters[i]);
    t.phi.col(i) = spectrum.phi(t.masters[i]);
  }
  const int n2 = t.n * t.n;
  t.a.resize(n2), t.b.resize(n2), t.gamma.resize(n2), t.zs.resize(n2), t.zd.resize(n2);
  for (int i = 0; i < t.n; ++i)
    for (int j = 0; j < t.n; ++j) {
      const double wi = t.omegas[i], wj = t.omegas[j];
      const Vector& g = step.G(i, j);
      const auto bs = resonances.second_border(i, j, true);
      const auto bd = i == j ? std::vector<int>{} : resonances.second_border(i, j, false);
      const auto s = solver.solve(wi + wj, g, bs);
      const auto d = solver.solve(wj - wi, g, bd);
      for (std::size_t c = 0; c < bs.size(); ++c)
        t.residuals.push_back({2, 0, {i, j, 0}, bs[c], s.residual[c]});
      for (std::size_t c = 0; c < bd.size(); ++c)
        t.residuals.push_back({2, 1, {i, j, 0}, bd[c], d.residual[c]});
      const int p = t.i2(i, j);
      t.zs[p] = s.z;
      t.zd[p] = d.z;
      t.a[p] = 0.5 * (d.z + s.z);
      t.b[p] = (d.z - s.z) / (2 * wi * wj);
      t.gamma[p] = ((wj - wi) / wj) * d.z + ((wj + wi) / wj) * s.z;
    }
  return t;
}

ForceTensors third_order_force_tensors(const StructuralModel& model,
                                       const MappingTensors& order2, const StepOptions& opt) {
  ForceTensors f;
  const int n = order2.n;
  f.n = n;
  f.A.resize(n * n * n);
  f.B.resize(n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        const Vector phi = order2.phi.col(i);
        const Vector A = 2.0 * quadratic_force(model, phi, order2.a[order2.i2(j, k)], opt);
        const Vector B = 2.0 * quadratic_force(model, phi, order2.b[order2.i2(j, k)], opt);
        f.quadratic_calls += 2;
        f.A[order2.i3(i, j, k)] = f.A[order2.i3(i, k, j)] = A;
        f.B[order2.i3(i, j, k)] = f.B[order2.i3(i, k, j)] = B;
      }
  return f;
}

void third_order_tensors(const StructuralModel& model, const StepTensors& step,
                         const ForceTensors& forces, const SigmaSolver& solver,
                         MappingTensors& t) {
  if (t.resonances.has_second_order())
    throw ResonanceError(
        "a second-order internal resonance is present; only the second-order normal form "
        "(O2 variant) is valid in that case");
  const int n = t.n;
  const int n3 = n * n * n;
  t.r.assign(n3, Vector());
  t.u.assign(n3, Vector());
  t.mu.assign(n3, Vector());
  t.nu.assign(n3, Vector());
  for (auto& z : t.z) z.assign(n3, Vector());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double wi = t.omegas[i], wj = t.omegas[j], wk = t.omegas[k];
        const auto& A = forces.A;
        const auto& B = forces.B;
        const Vector S = A[t.i3(i, j, k)] + A[t.i3(j, k, i)] + A[t.i3(k, i, j)] +
                         3.0 * step.H(i, j, k);
        const Vector& Bijk = B[t.i3(i, j, k)];
        const Vector& Bjki = B[t.i3(j, k, i)];
        const Vector& Bkij = B[t.i3(k, i, j)];
        const std::array<Vector, 4> P = {
            S - wj * wk * Bijk - wk * wi * Bjki - wi * wj * Bkij,
            S - wj * wk * Bijk + wk * wi * Bjki + wi * wj * Bkij,
            S + wj * wk * Bijk - wk * wi * Bjki + wi * wj * Bkij,
            S + wj * wk * Bijk + wk * wi * Bjki - wi * wj * Bkij};
        const std::array<double, 4> sigma = {wi + wj + wk, -wi + wj + wk, wi - wj + wk,
                                             wi + wj - wk};
        const auto border = t.resonances.third_border(i, j, k);
        std::array<Vector, 4> Z;
        for (int c = 0; c < 4; ++c) {
          const auto res = solver.solve(sigma[c], P[c], border);
          Z[c] = res.z;
          for (std::size_t q = 0; q < border.size(); ++q)
            t.residuals.push_back({3, c, {i, j, k}, border[q], res.residual[q]});
        }
        const int p = t.i3(i, j, k);
        for (int c = 0; c < 4; ++c) t.z[c][p] = Z[c];
        t.r[p] = (Z[0] + Z[1] + Z[2] + Z[3]) / 12.0;
        t.u[p] = (-Z[0] - Z[1] + Z[2] + Z[3]) / (4.0 * wj * wk);
        t.mu[p] = (-sigma[0] * Z[0] + sigma[1] * Z[1] + sigma[2] * Z[2] + sigma[3] * Z[3]) /
                  (12.0 * wi * wj * wk);
        t.nu[p] = (sigma[0] * Z[0] - sigma[1] * Z[1] + sigma[2] * Z[2] + sigma[3] * Z[3]) /
                  (4.0 * wi);
      }
  t.third = true;
  (void)model;
}

void damping_tensors(const StructuralModel& model, const DampingSpec& damping,
                     const SigmaSolver& solver, MappingTensors& t) {
  damping.validate();
  const int n = t.n;
  const int n2 = n * n;
  t.damping = damping;
  t.c.assign(n2, Vector());
  t.alpha.assign(n2, Vector());
  t.beta.assign(n2, Vector());
  t.zss.assign(n2, Vector());
  t.zdd.assign(n2, Vector());
  const double zm = damping.zeta_m, zk = damping.zeta_k;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double wi = t.omegas[i], wj = t.omegas[j];
      const int p = t.i2(i, j);
      const auto bs = t.resonances.second_border(i, j, true);
      const auto bd = i == j ? std::vector<int>{} : t.resonances.second_border(i, j, false);
      const Vector zss = solver.solve(wi + wj, model.mass() * t.zs[p], bs).z;
      const Vector zdd = solver.solve(wj - wi, model.mass() * t.zd[p], bd).z;
      t.zss[p] = zss;
      t.zdd[p] = zdd;
      t.c[p] = (zm + 3 * wi * wi * zk) * t.b[p] - 2 * zk * t.a[p] +
               (-zm + 2 * wi * wi * zk) * (zss + zdd) +
               (-zm + 2 * wj * wj * zk) * (wi / wj) * (zss - zdd);
      // Y picks up d/dt(c_ij R_i S_j) = c_ij S_i S_j - w_j^2 c_ij R_i R_j at leading order.
      t.alpha[p] = -wj * wj * t.c[p];
      t.beta[p] = t.c[p] - (damping.modal(wi) + damping.modal(wj)) * t.b[p];
    }
  t.damped = true;
}

Vector static_modal_derivative(const StructuralModel& model, const Spectrum& spectrum, int i,
                               int j) {
  const Vector g = quadratic_force(model, spectrum.phi(i), spectrum.phi(j));
  Eigen::LLT<Matrix> llt(model.stiffness());
  if (llt.info() != Eigen::Success) throw NumericalError("stiffness matrix is not positive definite");
  return -0.5 * llt.solve(g);
}

DnfBuild build_dnf(const StructuralModel& model, const Spectrum& spectrum,
                   const std::vector<int>& masters, const DnfOptions& options) {
  if (options.order != 2 && options.order != 3) throw ValidationError("order must be 2 or 3");
  if (masters.empty()) throw ValidationError("at least one master mode required");
  DnfBuild out;
  out.step = step_tensors(model, spectrum, masters, options.step);
  auto res = detect_resonances(spectrum, masters, options.eps_res, options.declared);
  auto is_master = [&](int s) {
    return std::find(masters.begin(), masters.end(), s) != masters.end();
  };
  for (const auto& r : res.second_order)
    if (!is_master(r.s)) {
      std::ostringstream msg;
      msg << "second-order internal resonance with slave mode " << r.s + 1
          << " (sigma=" << r.sigma << " rad/s); add it to the master set";
      throw ResonanceError(msg.str());
    }
  for (const auto& r : res.third_order)
    if (!is_master(r.s)) {
      std::ostringstream msg;
      msg << "third-order internal resonance with slave mode " << r.s + 1
          << " (sigma=" << r.sigma << " rad/s); add it to the master set";
      throw ResonanceError(msg.str());
    }
  if (options.order == 3 && res.has_second_order())
    throw ResonanceError(
        "second-order internal resonance detected or declared: the third-order normal form is "
        "refused, use the second-order DNF (order 2) only");
  out.warnings = res.warnings;

  SigmaSolver solver(model, spectrum, options.eps_res);
  out.tensors = second_order_tensors(model, spectrum, out.step, res, solver);
  if (options.damping.active()) damping_tensors(model, options.damping, solver, out.tensors);
  out.forces = third_order_force_tensors(model, out.tensors, options.step);
  if (options.order == 3)
    third_order_tensors(model, out.step, out.forces, solver, out.tensors);
  if (out.tensors.damped) {
    const int n = out.tensors.n;
    out.C.resize(n * n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          out.C[out.tensors.i3(i, j, k)] =
              2.0 * quadratic_force(model, out.tensors.phi.col(i),
                                    out.tensors.c[out.tensors.i2(j, k)], options.step);
  }
  for (const auto& w : solver.warnings()) out.warnings.push_back(w);
  return out;
}

}  // namespace dnrom
