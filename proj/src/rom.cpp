#include "dnrom/rom.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "dnrom/errors.hpp"

namespace dnrom {

namespace {

double ipow(double x, int e) {
  double v = 1.0;
  for (int i = 0; i < e; ++i) v *= x;
  return v;
}

using Key = std::tuple<int, std::vector<int>, std::vector<int>>;

void add(std::map<Key, double>& table, int n, int eq, std::initializer_list<int> r,
         std::initializer_list<int> s, double value) {
  if (value == 0.0) return;
  std::vector<int> re(n, 0), se(n, 0);
  for (int i : r) ++re[i];
  for (int i : s) ++se[i];
  table[{eq, re, se}] += value;
}

}  // namespace

void RomModel::nonlinear(const Vector& R, const Vector& S, Vector& f, Matrix* dR,
                         Matrix* dS) const {
  f = Vector::Zero(n);
  if (dR) *dR = Matrix::Zero(n, n);
  if (dS) *dS = Matrix::Zero(n, n);
  for (const auto& m : monomials) {
    double v = m.coefficient;
    for (int i = 0; i < n; ++i) v *= ipow(R[i], m.rexp[i]) * ipow(S[i], m.sexp[i]);
    f[m.eq] += v;
    if (!dR && !dS) continue;
    for (int a = 0; a < n; ++a) {
      if (dR && m.rexp[a] > 0) {
        double d = m.coefficient * m.rexp[a];
        for (int i = 0; i < n; ++i)
          d *= ipow(R[i], m.rexp[i] - (i == a)) * ipow(S[i], m.sexp[i]);
        (*dR)(m.eq, a) += d;
      }
      if (dS && m.sexp[a] > 0) {
        double d = m.coefficient * m.sexp[a];
        for (int i = 0; i < n; ++i)
          d *= ipow(R[i], m.rexp[i]) * ipow(S[i], m.sexp[i] - (i == a));
        (*dS)(m.eq, a) += d;
      }
    }
  }
}

bool RomModel::velocity_dependent() const {
  for (const auto& m : monomials)
    for (int e : m.sexp)
      if (e) return true;
  return false;
}

ReducedTensors reduced_tensors(const DnfBuild& build) {
  const auto& t = build.tensors;
  const int n = t.n;
  ReducedTensors rt;
  rt.n = n;
  const std::size_t n4 = static_cast<std::size_t>(n) * n * n * n;
  rt.A.assign(n4, 0.0);
  rt.B = rt.C = rt.h = rt.A;
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const std::size_t q = ((static_cast<std::size_t>(r) * n + i) * n + j) * n + k;
          const int p = t.i3(i, j, k);
          const Vector phi = t.phi.col(r);
          rt.A[q] = phi.dot(build.forces.A[p]);
          rt.B[q] = phi.dot(build.forces.B[p]);
          rt.h[q] = phi.dot(build.step.H(i, j, k));
          if (!build.C.empty()) rt.C[q] = phi.dot(build.C[p]);
        }
  return rt;
}

RomModel assemble_rom(const DnfBuild& build, const RomOptions& options) {
  return assemble_rom(build.tensors, reduced_tensors(build), options);
}

RomModel assemble_rom(const MappingTensors& t, const ReducedTensors& rt, const RomOptions& options) {
  const int n = t.n;
  if (rt.n != n) throw ValidationError("reduced tensors do not match the mapping tensors");
  const bool o3 = options.variant == RomVariant::o3;
  if (o3 && !t.third)
    throw ValidationError("O3 reduced dynamics needs third-order mapping tensors (dnf order 3)");
  if (o3 && t.resonances.has_second_order())
    throw ResonanceError("O3 reduced dynamics refused: second-order internal resonance present");

  RomModel rom;
  rom.n = n;
  rom.omegas = t.omegas;
  rom.damping = Vector::Zero(n);
  rom.forcing = Vector::Zero(n);
  if (t.damped)
    for (int r = 0; r < n; ++r) rom.damping[r] = t.damping.modal(t.omegas[r]);

  std::map<Key, double> table;
  bool nontrivial = false;
  for (const auto& e : t.resonances.third_order) nontrivial |= !e.trivial;
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          if (o3) {
            const auto eqs = t.resonances.third_equations(i, j, k);
            if (std::find(eqs.begin(), eqs.end(), r) == eqs.end()) continue;
          }
          add(table, n, r, {i, j, k}, {}, rt.at(rt.A, r, i, j, k) + rt.at(rt.h, r, i, j, k));
          add(table, n, r, {i}, {j, k}, rt.at(rt.B, r, i, j, k));
          if (t.damped) {
            const bool self = i == r && j == r && k == r;
            if (options.damping == NonlinearDamping::full ||
                (options.damping == NonlinearDamping::self && self))
              add(table, n, r, {i, j}, {k}, rt.at(rt.C, r, i, j, k));
          }
        }
  // Quadratic terms left by bordered second-order solves.
  for (const auto& res : t.residuals) {
    if (res.order != 2) continue;
    const auto it = std::find(t.masters.begin(), t.masters.end(), res.s);
    if (it == t.masters.end()) throw ResonanceError("second-order resonance with a slave mode");
    const int eq = static_cast<int>(it - t.masters.begin());
    const int i = res.idx[0], j = res.idx[1];
    const double wiwj = t.omegas[i] * t.omegas[j];
    const double sign = res.which == 0 ? -1.0 : 1.0;
    add(table, n, eq, {i, j}, {}, 0.5 * res.value);
    add(table, n, eq, {}, {i, j}, sign * 0.5 * res.value / wiwj);
  }
  for (const auto& [key, c] : table) {
    if (c == 0.0) continue;
    rom.monomials.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), c});
  }
  std::string tag = o3 ? (nontrivial ? "O3-plus-resonant" : "O3-trivial") : "O2-full";
  if (t.damped) {
    tag += options.damping == NonlinearDamping::full   ? "+damped(full-C)"
           : options.damping == NonlinearDamping::self ? "+damped(self-C)"
                                                       : "+damped(linear)";
  }
  rom.variant = tag;
  return rom;
}

Vector rom_rhs(const RomModel& rom, const Vector& R, const Vector& S, double t) {
  if (R.size() != rom.n || S.size() != rom.n) throw ValidationError("state size mismatch");
  Vector f;
  rom.nonlinear(R, S, f);
  Vector acc = -rom.omegas.cwiseProduct(rom.omegas).cwiseProduct(R) -
               rom.damping.cwiseProduct(S) - f;
  if (rom.forcing.size() == rom.n) acc += rom.forcing * std::cos(rom.forcing_frequency * t);
  return acc;
}

Reconstruction reconstruct(const MappingTensors& t, const Vector& R, const Vector& S, int order,
                           bool damped, bool velocity_from_x) {
  const int n = t.n;
  if (R.size() != n || S.size() != n) throw ValidationError("state size mismatch");
  if (order == 3 && !t.third) throw ValidationError("third-order tensors not available");
  if (damped && !t.damped) throw ValidationError("damping tensors not available");
  if (order != 2 && order != 3) throw ValidationError("reconstruction order must be 2 or 3");

  auto displacement = [&](const Vector& r, const Vector& s) {
    Vector x = t.phi * r;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int p = t.i2(i, j);
        x += t.a[p] * (r[i] * r[j]) + t.b[p] * (s[i] * s[j]);
        if (damped) x += t.c[p] * (r[i] * s[j]);
        if (order == 3)
          for (int k = 0; k < n; ++k) {
            const int q = t.i3(i, j, k);
            x += t.r[q] * (r[i] * r[j] * r[k]) + t.u[q] * (r[i] * s[j] * s[k]);
          }
      }
    return x;
  };

  Reconstruction out;
  out.X = displacement(R, S);
  if (velocity_from_x) {
    // Derivative of the polynomial X along the linear flow (R' = S, S' = -w^2 R);
    // the 5-point stencil is exact for degree <= 4.
    const Vector dr = S, ds = -t.omegas.cwiseProduct(t.omegas).cwiseProduct(R);
    const double h = 1.0;
    out.Y = (-displacement(R + 2 * h * dr, S + 2 * h * ds) + 8 * displacement(R + h * dr, S + h * ds) -
             8 * displacement(R - h * dr, S - h * ds) + displacement(R - 2 * h * dr, S - 2 * h * ds)) /
            (12 * h);
    return out;
  }
  Vector y = t.phi * S;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int p = t.i2(i, j);
      y += t.gamma[p] * (R[i] * S[j]);
      if (damped) y += t.alpha[p] * (R[i] * R[j]) + t.beta[p] * (S[i] * S[j]);
      if (order == 3)
        for (int k = 0; k < n; ++k) {
          const int q = t.i3(i, j, k);
          y += t.mu[q] * (S[i] * S[j] * S[k]) + t.nu[q] * (S[i] * R[j] * R[k]);
        }
    }
  out.Y = y;
  return out;
}

InvarianceDefect invariance_defect(const StructuralModel& model, const MappingTensors& t,
                                   const RomModel& rom, const Vector& R, const Vector& S,
                                   int order, bool damped) {
  const Vector dR = S, dS = rom_rhs(rom, R, S, 0.0);
  // X and Y are cubic along the line (R + h dR, S + h dS), so the 5-point rule is exact.
  auto at = [&](double h) { return reconstruct(t, R + h * dR, S + h * dS, order, damped); };
  const double h = 0.5 * (R.norm() + S.norm() + 1e-300) / (dR.norm() + dS.norm() + 1e-300);
  const auto p2 = at(2 * h), p1 = at(h), m1 = at(-h), m2 = at(-2 * h);
  const auto c = reconstruct(t, R, S, order, damped);
  const Vector dX = (-p2.X + 8 * p1.X - 8 * m1.X + m2.X) / (12 * h);
  const Vector dY = (-p2.Y + 8 * p1.Y - 8 * m1.Y + m2.Y) / (12 * h);
  InvarianceDefect d;
  d.first = dX - c.Y;
  Vector cy = Vector::Zero(model.n_dof());
  if (damped) cy = t.damping.zeta_m * (model.mass() * c.Y) + t.damping.zeta_k * (model.stiffness() * c.Y);
  d.second = model.mass() * dY + cy + model.internal_force(c.X);
  return d;
}

void write_rom(std::ostream& out, const RomModel& rom) {
  out << std::setprecision(17);
  out << "# reduced dynamics: R'' + zeta R' + w^2 R + sum(monomials) = F cos(Omega t)\n";
  out << "variant " << rom.variant << "\n";
  out << "n_masters " << rom.n << "\n";
  for (int r = 0; r < rom.n; ++r)
    out << "mode " << r + 1 << " omega_rad_s " << rom.omegas[r] << " zeta_1_s " << rom.damping[r]
        << " forcing " << (rom.forcing.size() == rom.n ? rom.forcing[r] : 0.0) << "\n";
  out << "forcing_frequency_rad_s " << rom.forcing_frequency << "\n";
  out << "# monomial eq R-exponents S-exponents coefficient\n";
  for (const auto& m : rom.monomials) {
    out << "monomial " << m.eq + 1;
    for (int e : m.rexp) out << ' ' << e;
    for (int e : m.sexp) out << ' ' << e;
    out << ' ' << m.coefficient << "\n";
  }
}

RomModel read_rom(std::istream& in) {
  RomModel rom;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "variant") {
      ls >> rom.variant;
    } else if (key == "n_masters") {
      ls >> rom.n;
      if (rom.n < 1) throw ValidationError("ROM archive: bad master count");
      rom.omegas = rom.damping = rom.forcing = Vector::Zero(rom.n);
    } else if (key == "mode") {
      int r;
      std::string k1, k2, k3;
      double w, z, f;
      ls >> r >> k1 >> w >> k2 >> z >> k3 >> f;
      if (!ls || r < 1 || r > rom.n) throw ValidationError("ROM archive: bad mode line");
      rom.omegas[r - 1] = w;
      rom.damping[r - 1] = z;
      rom.forcing[r - 1] = f;
    } else if (key == "forcing_frequency_rad_s") {
      ls >> rom.forcing_frequency;
    } else if (key == "monomial") {
      Monomial m;
      ls >> m.eq;
      --m.eq;
      m.rexp.resize(rom.n);
      m.sexp.resize(rom.n);
      for (auto& e : m.rexp) ls >> e;
      for (auto& e : m.sexp) ls >> e;
      ls >> m.coefficient;
      if (!ls || m.eq < 0 || m.eq >= rom.n) throw ValidationError("ROM archive: bad monomial line");
      rom.monomials.push_back(m);
    } else {
      throw ValidationError("ROM archive: unknown key " + key);
    }
  }
  if (rom.n == 0) throw ValidationError("ROM archive: missing n_masters");
  return rom;
}

void print_rom_equations(std::ostream& out, const RomModel& rom) {
  out << std::setprecision(6);
  out << "variant: " << rom.variant << "\n";
  for (int r = 0; r < rom.n; ++r) {
    out << "R" << r + 1 << "'' + " << rom.damping[r] << " R" << r + 1 << "' + " << rom.omegas[r] * rom.omegas[r]
        << " R" << r + 1;
    for (const auto& m : rom.monomials) {
      if (m.eq != r) continue;
      out << (m.coefficient < 0 ? "\n    - " : "\n    + ") << std::abs(m.coefficient);
      for (int i = 0; i < rom.n; ++i)
        for (int e = 0; e < m.rexp[i]; ++e) out << " R" << i + 1;
      for (int i = 0; i < rom.n; ++i)
        for (int e = 0; e < m.sexp[i]; ++e) out << " R" << i + 1 << "'";
    }
    out << "\n    = ";
    if (rom.forcing.size() == rom.n && rom.forcing[r] != 0.0)
      out << rom.forcing[r] << " cos(Omega t)\n";
    else
      out << "0\n";
  }
}

}  // namespace dnrom
