#include "dnrom/hbm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "dnrom/errors.hpp"

namespace dnrom {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

int default_samples(int h) {
  int n = 1;
  while (n < 4 * h + 2) n *= 2;
  return n;
}

Matrix basis(int h, const Vector& theta, bool derivative) {
  Matrix e = Matrix::Zero(theta.size(), 2 * h + 1);
  for (int m = 0; m < theta.size(); ++m) {
    e(m, 0) = derivative ? 0.0 : 1.0;
    for (int k = 1; k <= h; ++k) {
      const double c = std::cos(k * theta[m]), s = std::sin(k * theta[m]);
      e(m, 2 * k - 1) = derivative ? -k * s : c;
      e(m, 2 * k) = derivative ? k * c : s;
    }
  }
  return e;
}

Vector phases(int n) {
  Vector t(n);
  for (int m = 0; m < n; ++m) t[m] = 2.0 * M_PI * m / n;
  return t;
}

}  // namespace

FullSystem::FullSystem(const StructuralModel& model, const DampingSpec& damping, int probe_dof,
                       int force_dof, double force)
    : model_(model), probe_(probe_dof) {
  damping.validate();
  const int n = model.n_dof();
  if (probe_dof < 0 || probe_dof >= n) throw ValidationError("probe dof out of range");
  c_ = damping.zeta_m * model.mass() + damping.zeta_k * model.stiffness();
  f_ = Vector::Zero(n);
  if (force != 0.0) {
    if (force_dof < 0 || force_dof >= n) throw ValidationError("forced dof out of range");
    if (force < 0.0) throw ValidationError("forcing amplitude must be >= 0");
    f_[force_dof] = force;
  }
}

void FullSystem::nonlinear(const Vector& x, const Vector&, Vector& f, Matrix* dx,
                           Matrix* dv) const {
  f = model_.nonlinear_force(x);
  if (dx) *dx = model_.nonlinear_tangent(x);
  if (dv) *dv = Matrix::Zero(size(), size());
}

RomSystem::RomSystem(const RomModel& rom, const MappingTensors* tensors, int order, bool damped,
                     int probe_dof)
    : rom_(rom), tensors_(tensors), order_(order), damped_(damped), probe_(probe_dof) {
  const int n = rom.n;
  if (rom_.forcing.size() != n) rom_.forcing = Vector::Zero(n);
  velocity_ = rom.velocity_dependent();
  m_ = Matrix::Identity(n, n);
  k_ = rom.omegas.cwiseProduct(rom.omegas).asDiagonal();
  c_ = rom.damping.asDiagonal();
  if (tensors_) {
    if (tensors_->n != n) throw ValidationError("mapping tensors do not match the ROM");
    if (probe_ < 0 || probe_ >= tensors_->n_dof()) throw ValidationError("probe dof out of range");
  } else if (probe_ < 0) {
    probe_ = 0;
  } else if (probe_ >= n) {
    throw ValidationError("probe coordinate out of range");
  }
}

void RomSystem::nonlinear(const Vector& x, const Vector& v, Vector& f, Matrix* dx,
                          Matrix* dv) const {
  rom_.nonlinear(x, v, f, dx, dv);
}

double RomSystem::probe(const Vector& x, const Vector& v) const {
  if (!tensors_) return x[probe_];
  return reconstruct(*tensors_, x, v, order_, damped_).X[probe_];
}

Hbm::Hbm(const HbmSystem& system, int harmonics, int samples)
    : sys_(system), n_(system.size()), h_(harmonics) {
  if (harmonics < 1) throw ValidationError("at least one harmonic is required");
  nt_ = samples > 0 ? samples : default_samples(harmonics);
  if (nt_ < 4 * h_ + 1)
    throw ValidationError("time samples must be >= 4H+1 for alias-free cubic terms");
  const Vector th = phases(nt_);
  e_ = basis(h_, th, false);
  ed_ = basis(h_, th, true);
  p_ = e_.transpose() * (2.0 / nt_);
  p_.row(0) *= 0.5;
  const int nh = 2 * h_ + 1;
  w_.resize(nh * nh, nt_);
  wd_.resize(nh * nh, nt_);
  for (int a = 0; a < nh; ++a)
    for (int b = 0; b < nh; ++b)
      for (int m = 0; m < nt_; ++m) {
        w_(a * nh + b, m) = p_(a, m) * e_(m, b);
        wd_(a * nh + b, m) = p_(a, m) * ed_(m, b);
      }
}

Vector Hbm::residual(const Vector& z, double omega, double kappa, Matrix* dz, Vector* domega,
                     Vector* dkappa) const {
  const int nh = 2 * h_ + 1, nu = unknowns();
  if (z.size() != nu) throw ValidationError("harmonic coefficient block has the wrong size");
  const Eigen::Map<const RowMajor> c(z.data(), nh, n_);
  const Matrix& M = sys_.mass();
  const Matrix& K = sys_.stiffness();
  const Matrix C = sys_.damping() + kappa * M;
  const bool vel = sys_.velocity_dependent();

  // Nonlinear part by sampling.
  const Matrix xt = e_ * c;
  const Matrix vd = ed_ * c;  // velocity / omega
  Matrix ft(nt_, n_);
  Matrix jx, jv;
  const bool jac = dz || domega;
  Matrix jxs, jvs;
  Matrix dom_t;
  if (jac) {
    jxs.resize(nt_, static_cast<Eigen::Index>(n_) * n_);
    if (vel) {
      jvs.resize(nt_, static_cast<Eigen::Index>(n_) * n_);
      dom_t.resize(nt_, n_);
    }
  }
  Vector f;
  for (int m = 0; m < nt_; ++m) {
    const Vector x = xt.row(m).transpose();
    const Vector v = omega * vd.row(m).transpose();
    sys_.nonlinear(x, v, f, jac ? &jx : nullptr, jac && vel ? &jv : nullptr);
    ft.row(m) = f.transpose();
    if (jac) {
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) jxs(m, i * n_ + j) = jx(i, j);
      if (vel) {
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j) jvs(m, i * n_ + j) = jv(i, j);
        dom_t.row(m) = (jv * vd.row(m).transpose()).transpose();
      }
    }
  }
  const Matrix fc = p_ * ft;

  Vector r(nu);
  Eigen::Map<RowMajor> rm(r.data(), nh, n_);
  rm = fc;
  rm.row(0) += (K * c.row(0).transpose()).transpose();
  for (int k = 1; k <= h_; ++k) {
    const Vector a = c.row(2 * k - 1).transpose(), b = c.row(2 * k).transpose();
    const double kw = k * omega;
    rm.row(2 * k - 1) += (K * a - kw * kw * (M * a) + kw * (C * b)).transpose();
    rm.row(2 * k) += (K * b - kw * kw * (M * b) - kw * (C * a)).transpose();
  }
  rm.row(1) -= sys_.forcing().transpose();

  if (dz) {
    dz->setZero(nu, nu);
    const Matrix wj = w_ * jxs;
    Matrix wjd;
    if (vel) wjd = omega * (wd_ * jvs);
    for (int a = 0; a < nh; ++a)
      for (int b = 0; b < nh; ++b) {
        auto blk = dz->block(a * n_, b * n_, n_, n_);
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j) {
            double v = wj(a * nh + b, i * n_ + j);
            if (vel) v += wjd(a * nh + b, i * n_ + j);
            blk(i, j) = v;
          }
      }
    dz->block(0, 0, n_, n_) += K;
    for (int k = 1; k <= h_; ++k) {
      const double kw = k * omega;
      const int ic = (2 * k - 1) * n_, is = 2 * k * n_;
      dz->block(ic, ic, n_, n_) += K - kw * kw * M;
      dz->block(is, is, n_, n_) += K - kw * kw * M;
      dz->block(ic, is, n_, n_) += kw * C;
      dz->block(is, ic, n_, n_) -= kw * C;
    }
  }
  if (domega) {
    domega->setZero(nu);
    Eigen::Map<RowMajor> dm(domega->data(), nh, n_);
    if (vel) dm = p_ * dom_t;
    for (int k = 1; k <= h_; ++k) {
      const Vector a = c.row(2 * k - 1).transpose(), b = c.row(2 * k).transpose();
      dm.row(2 * k - 1) += (-2.0 * k * k * omega * (M * a) + k * (C * b)).transpose();
      dm.row(2 * k) += (-2.0 * k * k * omega * (M * b) - k * (C * a)).transpose();
    }
  }
  if (dkappa) {
    dkappa->setZero(nu);
    Eigen::Map<RowMajor> dk(dkappa->data(), nh, n_);
    for (int k = 1; k <= h_; ++k) {
      const Vector a = c.row(2 * k - 1).transpose(), b = c.row(2 * k).transpose();
      dk.row(2 * k - 1) = (k * omega * (M * b)).transpose();
      dk.row(2 * k) = (-k * omega * (M * a)).transpose();
    }
  }
  return r;
}

Matrix Hbm::displacement(const Vector& z, const Vector& theta) const {
  const Eigen::Map<const RowMajor> c(z.data(), 2 * h_ + 1, n_);
  return basis(h_, theta, false) * c;
}

namespace {

Vector probe_signal(const Hbm& hbm, const Vector& z, double omega, int samples) {
  const int n = hbm.system().size(), nh = 2 * hbm.harmonics() + 1;
  const Vector th = phases(samples);
  const Eigen::Map<const RowMajor> c(z.data(), nh, n);
  const Matrix x = basis(hbm.harmonics(), th, false) * c;
  const Matrix v = omega * (basis(hbm.harmonics(), th, true) * c);
  Vector s(samples);
  for (int m = 0; m < samples; ++m)
    s[m] = hbm.system().probe(x.row(m).transpose(), v.row(m).transpose());
  return s;
}

}  // namespace

double Hbm::amplitude(const Vector& z, double omega) const {
  const int ns = std::max(256, 4 * nt_);
  const Vector s = probe_signal(*this, z, omega, ns).cwiseAbs();
  Eigen::Index m0;
  const double grid = s.maxCoeff(&m0);
  if (grid == 0.0) return 0.0;
  // Golden-section refinement of the grid maximum.
  const Eigen::Map<const RowMajor> c(z.data(), 2 * h_ + 1, n_);
  auto at = [&](double th) {
    Vector t(1);
    t[0] = th;
    const Vector x = (basis(h_, t, false) * c).transpose();
    const Vector v = omega * (basis(h_, t, true) * c).transpose();
    return std::abs(sys_.probe(x, v));
  };
  const double d = 2.0 * M_PI / ns, g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = m0 * d - d, b = m0 * d + d;
  double x1 = b - g * (b - a), x2 = a + g * (b - a), f1 = at(x1), f2 = at(x2);
  for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
    if (f1 > f2) {
      b = x2, x2 = x1, f2 = f1, x1 = b - g * (b - a), f1 = at(x1);
    } else {
      a = x1, x1 = x2, f1 = f2, x2 = a + g * (b - a), f2 = at(x2);
    }
  }
  return std::max({grid, f1, f2});
}

Vector Hbm::probe_harmonics(const Vector& z, double omega) const {
  const int ns = std::max(256, 4 * nt_);
  const Vector s = probe_signal(*this, z, omega, ns);
  const Vector th = phases(ns);
  Vector out(h_ + 1);
  out[0] = std::abs(s.mean());
  for (int k = 1; k <= h_; ++k) {
    double a = 0.0, b = 0.0;
    for (int m = 0; m < ns; ++m) {
      a += s[m] * std::cos(k * th[m]);
      b += s[m] * std::sin(k * th[m]);
    }
    out[k] = 2.0 / ns * std::hypot(a, b);
  }
  return out;
}

std::vector<int> Branch::folds() const {
  std::vector<int> f;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].fold) f.push_back(static_cast<int>(i));
  return f;
}

namespace {

/// Augmented problem y = [z; omega; (kappa)], equations [R; (phase)].
struct Problem {
  const Hbm& hbm;
  bool backbone;
  Vector phase;  // phase row on the harmonic block (backbones)
  Vector scale;  // unknown scaling

  /// Integral phase condition: orthogonality to the time-shift direction of `ref`.
  void anchor_phase(const Vector& ref) {
    const int ns = hbm.system().size();
    const Matrix& M = hbm.system().mass();
    phase = Vector::Zero(nz());
    for (int k = 1; k <= hbm.harmonics(); ++k) {
      const Vector a = ref.segment((2 * k - 1) * ns, ns), b = ref.segment(2 * k * ns, ns);
      phase.segment((2 * k - 1) * ns, ns) = k * (M * b);
      phase.segment(2 * k * ns, ns) = -k * (M * a);
    }
    const double nrm = phase.norm();
    if (nrm > 0.0) phase /= nrm;
  }

  int nz() const { return hbm.unknowns(); }
  int nunk() const { return nz() + (backbone ? 2 : 1); }
  int neq() const { return nz() + (backbone ? 1 : 0); }

  /// Residual and Jacobian with respect to scaled unknowns u = y / scale.
  Vector eval(const Vector& y, Matrix* J, double* rel) const {
    const int n = nz();
    const double kappa = backbone ? y[n + 1] : 0.0;
    Matrix dz;
    Vector dw, dk;
    const Vector z = y.head(n);
    const Vector r = hbm.residual(z, y[n], kappa, J ? &dz : nullptr, J ? &dw : nullptr,
                                  J && backbone ? &dk : nullptr);
    Vector out(neq());
    out.head(n) = r;
    const int ns = hbm.system().size();
    if (backbone) out[n] = phase.dot(z);
    if (J) {
      J->setZero(neq(), nunk());
      J->topLeftCorner(n, n) = dz;
      J->col(n).head(n) = dw;
      if (backbone) {
        J->col(n + 1).head(n) = dk;
        J->row(n).head(n) = phase.transpose();
      }
      *J = *J * scale.asDiagonal();
    }
    if (rel) {
      // Size of the linear stiffness term as the reference.
      const Eigen::Map<const RowMajor> c(z.data(), 2 * hbm.harmonics() + 1, ns);
      const double ref = (c * hbm.system().stiffness()).norm() + hbm.system().forcing().norm();
      *rel = r.norm() / std::max(ref, 1e-300);
    }
    return out;
  }
};

struct Corrected {
  bool ok = false;
  Vector y;
  Vector tangent;
  int iterations = 0;
  double rel = 0.0;
};

/// Newton on [F(y); extra . (u - u0) - target] with u = y / scale.
Corrected correct(const Problem& pb, const Vector& y0, const Vector& row, double target,
                  const Vector& anchor, const HbmConfig& cfg) {
  Corrected out;
  Vector y = y0;
  const int m = pb.nunk();
  Matrix J, A(m, m);
  double last = 1e300;
  for (int it = 1; it <= cfg.max_newton; ++it) {
    double rel = 0.0;
    const Vector f = pb.eval(y, &J, &rel);
    A.topRows(pb.neq()) = J;
    A.row(m - 1) = row.transpose();
    Vector rhs(m);
    rhs.head(pb.neq()) = -f;
    rhs[m - 1] = target - row.dot(y.cwiseQuotient(pb.scale) - anchor);
    Eigen::PartialPivLU<Matrix> lu(A);
    const Vector du = lu.solve(rhs);
    if (!du.allFinite()) return out;
    y += du.cwiseProduct(pb.scale);
    const double step = du.norm();
    out.iterations = it;
    if (step > 4.0 * last && it > 2) return out;
    last = step;
    if (step <= cfg.tolerance) {
      double rel_after = 0.0;
      pb.eval(y, nullptr, &rel_after);
      if (rel_after <= std::max(cfg.tolerance, 1e-12) || step == 0.0) {
        Vector e = Vector::Zero(m);
        e[m - 1] = 1.0;
        out.tangent = lu.solve(e);
        out.tangent.normalize();
        out.ok = true;
        out.y = y;
        out.rel = rel_after;
        return out;
      }
    }
  }
  return out;
}

BranchPoint make_point(const Problem& pb, const Vector& y, double rel) {
  BranchPoint p;
  const int n = pb.nz();
  p.z = y.head(n);
  p.omega = y[n];
  p.kappa = pb.backbone ? y[n + 1] : 0.0;
  p.amplitude = pb.hbm.amplitude(p.z, p.omega);
  p.residual = rel;
  return p;
}

Branch trace(Problem pb, Vector y, Vector tangent, double rel0, const HbmConfig& cfg) {
  Branch br;
  br.harmonics = pb.hbm.harmonics();
  br.points.push_back(make_point(pb, y, rel0));
  const int n = pb.nz();
  double ds = cfg.step, last_ds = cfg.step;
  for (int step = 0; step < cfg.max_steps; ++step) {
    Corrected c;
    auto attempt = [&](double h, double min_dot) {
      const Vector up = y.cwiseQuotient(pb.scale) + h * tangent;
      c = correct(pb, up.cwiseProduct(pb.scale), tangent, 0.0, up, cfg);
      if (!c.ok) return false;
      // A corrector that travels further than the step has likely jumped branches.
      if ((c.y.cwiseQuotient(pb.scale) - up).norm() > h) return false;
      if (c.tangent.dot(tangent) < 0) c.tangent = -c.tangent;
      return c.tangent.dot(tangent) > min_dot;
    };
    bool ok = false;
    while (!(ok = attempt(ds, 0.8))) {
      ds *= 0.5;
      if (ds < cfg.step_min) break;
    }
    if (!ok) {
      // Singular Jacobian near a simple branch point: try to step across it.
      for (double f : {1.0, 2.0, 4.0})
        if ((ok = attempt(f * std::max(last_ds, cfg.step), 0.0))) {
          ds = f * std::max(last_ds, cfg.step);
          break;
        }
      if (!ok) {
        br.termination = "step below minimum at omega=" + std::to_string(y[n]);
        return br;
      }
    }
    last_ds = ds;
    if (pb.backbone) pb.anchor_phase(c.y.head(n));
    auto p = make_point(pb, c.y, c.rel);
    p.fold = (c.tangent[n] > 0) != (tangent[n] > 0);
    br.points.push_back(p);
    y = c.y;
    tangent = c.tangent;
    if (c.iterations <= 3) ds = std::min(cfg.step_max, 1.5 * ds);
    if (c.iterations >= 6) ds *= 0.7;
    if (p.omega < cfg.omega_min || p.omega > cfg.omega_max) {
      br.termination = "left frequency window";
      return br;
    }
    if (p.amplitude > cfg.amplitude_max) {
      br.termination = "amplitude cap reached";
      return br;
    }
  }
  br.termination = "maximum number of steps";
  return br;
}

double coefficient_scale(const HbmConfig& cfg, const Vector& z, double amp) {
  if (cfg.coefficient_scale > 0.0) return cfg.coefficient_scale;
  const double nz = z.norm();
  if (nz > 0.0 && amp > 0.0 && cfg.amplitude_max < 1e299) return nz * cfg.amplitude_max / amp;
  return nz > 0.0 ? nz : 1.0;
}

}  // namespace

Branch backbone(const Hbm& hbm, const Vector& mode, double omega0, const HbmConfig& cfg) {
  const auto& sys = hbm.system();
  const int ns = sys.size(), n = hbm.unknowns();
  if (mode.size() != ns) throw ValidationError("mode shape has the wrong size");
  if (!(omega0 > 0.0)) throw ValidationError("backbone needs a positive linear frequency");
  const Vector w = sys.mass() * mode;

  // Scale the mode until the probe shows the requested start amplitude; the probe may be
  // nonlinear in the coordinates (reconstructed ROM output), hence the fixed-point loop.
  Vector z = Vector::Zero(n);
  z.segment(ns, ns) = mode;
  double amp = hbm.amplitude(z, omega0);
  if (!(amp > 0.0)) throw ValidationError("mode shape gives zero probe amplitude");
  const double target = cfg.start_amplitude > 0.0 ? cfg.start_amplitude
                        : cfg.amplitude_max < 1e299 ? 1e-3 * cfg.amplitude_max
                                                    : 1e-3 * amp;
  for (int it = 0; it < 20 && std::abs(amp - target) > 1e-3 * target; ++it) {
    z *= target / amp;
    amp = hbm.amplitude(z, omega0);
    if (!(amp > 0.0)) throw NumericalError("backbone start amplitude could not be set");
  }

  Problem pb{hbm, true, Vector(), Vector()};
  pb.anchor_phase(z);
  pb.scale = Vector::Constant(n + 2, coefficient_scale(cfg, z, target));
  pb.scale[n] = omega0;
  pb.scale[n + 1] = cfg.kick * omega0;

  // Amplitude-fixed start: w . cos-1 block held at its initial value.
  Vector y(n + 2);
  y << z, omega0, 0.0;
  Vector row = Vector::Zero(n + 2);
  row.segment(ns, ns) = w.cwiseProduct(pb.scale.segment(ns, ns));
  const Vector anchor = y.cwiseQuotient(pb.scale);
  auto c = correct(pb, y, row, 0.0, anchor, cfg);
  if (!c.ok)
    throw NumericalError("backbone start did not converge at omega=" + std::to_string(omega0));
  // Initial direction: growing amplitude.
  Vector t = c.tangent;
  if (t.segment(ns, ns).dot(w) < 0) t = -t;
  auto br = trace(pb, c.y, t, c.rel, cfg);
  for (const auto& p : br.points)
    if (std::abs(p.kappa) > 1e-6 * omega0)
      br.termination += " (unfolding parameter drifted from zero)";
  return br;
}

Branch frf(const Hbm& hbm, const HbmConfig& cfg) {
  const int n = hbm.unknowns();
  if (!(cfg.omega_min > 0.0) || !(cfg.omega_max > cfg.omega_min) || cfg.omega_max > 1e299)
    throw ValidationError("FRF needs a bounded positive frequency window");
  Problem pb{hbm, false, Vector(), Vector()};
  pb.scale = Vector::Ones(n + 1);
  pb.scale[n] = cfg.omega_min;
  // Fixed-frequency solve at the window start.
  Vector y = Vector::Zero(n + 1);
  y[n] = cfg.omega_min;
  Vector row = Vector::Zero(n + 1);
  row[n] = 1.0;
  auto c = correct(pb, y, row, 0.0, y.cwiseQuotient(pb.scale), cfg);
  if (!c.ok) throw NumericalError("FRF start did not converge at omega=" + std::to_string(cfg.omega_min));
  const double amp = hbm.amplitude(c.y.head(n), cfg.omega_min);
  pb.scale.head(n).setConstant(coefficient_scale(cfg, c.y.head(n), amp));
  y = c.y;
  // Tangent with the rescaled unknowns, increasing omega.
  Matrix J;
  pb.eval(y, &J, nullptr);
  Matrix A(n + 1, n + 1);
  A.topRows(n) = J;
  A.row(n).setZero();
  A(n, n) = 1.0;
  Vector e = Vector::Zero(n + 1);
  e[n] = 1.0;
  Vector t = A.partialPivLu().solve(e).normalized();
  return trace(pb, y, t, c.rel, cfg);
}

void write_branch_csv(std::ostream& out, const Hbm& hbm, const Branch& branch,
                      double omega_ref) {
  out << "omega_rad_s,omega_over_omega_ref_1,probe_amplitude_m,fold_flag_1";
  for (int k = 0; k <= branch.harmonics; ++k) out << ",probe_h" << k << "_m";
  out << "\n" << std::setprecision(12);
  for (const auto& p : branch.points) {
    out << p.omega << ',' << p.omega / omega_ref << ',' << p.amplitude << ',' << (p.fold ? 1 : 0);
    const Vector h = hbm.probe_harmonics(p.z, p.omega);
    for (int k = 0; k < h.size(); ++k) out << ',' << h[k];
    out << "\n";
  }
}

}  // namespace dnrom
