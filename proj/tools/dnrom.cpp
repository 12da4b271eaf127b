// Command-line front end: eig, step, dnf, rom, backbone, frf, reconstruct, verify.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "dnrom/dnf.hpp"
#include "dnrom/errors.hpp"
#include "dnrom/hbm.hpp"
#include "dnrom/io.hpp"
#include "dnrom/polynomial_model.hpp"
#include "dnrom/rom.hpp"
#include "dnrom/spectrum.hpp"
#include "dnrom/step.hpp"
#include "dnrom/verify.hpp"

namespace fs = std::filesystem;
using namespace dnrom;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::string archive;
  std::string system = "rom";
  // Overrides; negative or empty means "keep the config value".
  int modes = -1;
  std::vector<int> masters;
  int order = -1;
  double eps_res = -1;
  std::vector<std::string> resonances;
  double zeta_m = -1, zeta_k = -1;
  std::string variant, nonlinear_damping;
  int harmonics = -1, samples = -1, max_steps = -1, max_newton = -1, mode = -1;
  double tolerance = -1, step = -1, step_min = -1, step_max = -1, amplitude_max = -1;
  double omega_min_ratio = -1, omega_max_ratio = -1, force = std::nan("");
  bool shapes = false;
  std::vector<double> R, S;
  int rec_order = 2;
  bool damped = false;
  int verify_models = 10;
  std::uint64_t seed = 2024;
};

void add_model_options(CLI::App* app, Options& o) {
  app->add_option("-m,--model,--config", o.config, "TOML settings file (defaults: Table-1 beam)");
  app->add_option("-o,--out", o.out, "Output directory")->capture_default_str();
  app->add_option("--modes", o.modes, "Number of computed modes");
}

void add_dnf_options(CLI::App* app, Options& o, bool with_order = true) {
  app->add_option("--masters", o.masters, "Master mode numbers (1-based)");
  if (with_order) app->add_option("--order", o.order, "Normal-form order, 2 or 3");
  app->add_option("--eps-res", o.eps_res, "Relative resonance tolerance");
  app->add_option("--resonance", o.resonances, "Declared resonance: s,i,j[,k] or p:q(a,b)");
  app->add_option("--zeta-m", o.zeta_m, "Mass-proportional damping [1/s]");
  app->add_option("--zeta-k", o.zeta_k, "Stiffness-proportional damping [s]");
}

void add_rom_options(CLI::App* app, Options& o) {
  app->add_option("--archive", o.archive, "Mapping archive written by dnf (skips the build)");
  app->add_option("--variant", o.variant, "Reduced dynamics: o2 or o3");
  app->add_option("--nonlinear-damping", o.nonlinear_damping, "none, self or full");
}

void add_hbm_options(CLI::App* app, Options& o) {
  app->add_option("--system", o.system, "rom or full")->check(CLI::IsMember({"rom", "full"}));
  app->add_option("--harmonics", o.harmonics, "Number of harmonics H");
  app->add_option("--samples", o.samples, "Time samples per period (0: automatic)");
  app->add_option("--tolerance", o.tolerance, "Corrector tolerance");
  app->add_option("--max-newton", o.max_newton, "Corrector iterations per step");
  app->add_option("--max-steps", o.max_steps, "Continuation steps");
  app->add_option("--step", o.step, "Initial step");
  app->add_option("--step-min", o.step_min, "Minimum step");
  app->add_option("--step-max", o.step_max, "Maximum step");
  app->add_option("--amplitude-max", o.amplitude_max, "Probe amplitude cap [m]");
  app->add_option("--omega-min-ratio", o.omega_min_ratio, "Window start / reference frequency");
  app->add_option("--omega-max-ratio", o.omega_max_ratio, "Window end / reference frequency");
  app->add_option("--mode", o.mode, "Backbone mode (1-based master position or full-model mode)");
}

RunConfig resolve(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.modes > 0) c.modes = o.modes;
  if (!o.masters.empty()) c.masters = o.masters;
  if (o.order > 0) c.order = o.order;
  if (o.eps_res > 0) c.eps_res = o.eps_res;
  for (const auto& r : o.resonances) c.resonances.push_back(r);
  if (o.zeta_m >= 0) c.damping.zeta_m = o.zeta_m;
  if (o.zeta_k >= 0) c.damping.zeta_k = o.zeta_k;
  if (!o.variant.empty() || !o.nonlinear_damping.empty()) {
    std::string t = "[rom]\n";
    t += "variant = \"" + (o.variant.empty() ? std::string(c.variant == RomVariant::o3 ? "o3" : "o2") : o.variant) + "\"\n";
    if (!o.nonlinear_damping.empty()) t += "nonlinear_damping = \"" + o.nonlinear_damping + "\"\n";
    const RunConfig r = parse_config(t);
    c.variant = r.variant;
    if (!o.nonlinear_damping.empty()) c.nonlinear_damping = r.nonlinear_damping;
  }
  auto& h = c.hbm;
  if (o.harmonics > 0) h.harmonics = o.harmonics;
  if (o.samples >= 0) h.samples = o.samples;
  if (o.tolerance > 0) h.tolerance = o.tolerance;
  if (o.max_newton > 0) h.max_newton = o.max_newton;
  if (o.max_steps > 0) h.max_steps = o.max_steps;
  if (o.step > 0) h.step = o.step;
  if (o.step_min > 0) h.step_min = o.step_min;
  if (o.step_max > 0) h.step_max = o.step_max;
  if (o.amplitude_max > 0) h.amplitude_max = o.amplitude_max;
  if (o.omega_min_ratio >= 0) c.omega_min_ratio = o.omega_min_ratio;
  if (o.omega_max_ratio >= 0) c.omega_max_ratio = o.omega_max_ratio;
  if (o.mode > 0) c.backbone_mode = o.mode;
  if (!std::isnan(o.force)) c.force_amplitude = o.force;
  for (int m : c.masters)
    if (m < 1 || m > c.modes) throw ValidationError("master mode out of range");
  c.damping.validate();
  return c;
}

/// Collects output paths; finish() writes the manifest.
struct Run {
  Manifest manifest;
  std::string dir;

  Run(const std::string& command, const Options& o, int argc, char** argv) : dir(o.out) {
    manifest.command = command;
    for (int i = 1; i < argc; ++i) manifest.arguments.emplace_back(argv[i]);
    if (!o.config.empty()) manifest.inputs.push_back(o.config);
    if (!o.archive.empty()) manifest.inputs.push_back(o.archive);
    fs::create_directories(dir);
  }
  std::string path(const std::string& name) {
    const std::string p = (fs::path(dir) / name).string();
    manifest.outputs.push_back(p);
    return p;
  }
  std::ofstream open(const std::string& name) {
    std::ofstream f(path(name));
    if (!f) throw ValidationError("cannot write " + name);
    f << std::setprecision(12);
    return f;
  }
  void finish(int code, const std::string& message) {
    manifest.exit_code = code;
    manifest.message = message;
    write_manifest((fs::path(dir) / (manifest.command + ".manifest.json")).string(), manifest);
  }
};

const char* mode_kind(const StructuralModel& model, const Vector& phi) {
  double t = 0, a = 0, r = 0;
  for (int i = 0; i < model.n_dof(); ++i) {
    const double v = phi[i] * phi[i];
    switch (model.labels().empty() ? DofKind::generic : model.labels()[i].kind) {
      case DofKind::transverse: t += v; break;
      case DofKind::axial: a += v; break;
      case DofKind::rotation: r += v; break;
      default: return "-";
    }
  }
  return a > t ? "axial" : "bending";
}

int cmd_eig(const Options& o, Run& run) {
  const RunConfig cfg = resolve(o);
  run.manifest.settings = config_to_toml(cfg);
  if (cfg.model_kind == "file") run.manifest.inputs.push_back(cfg.model_file);
  const auto model = build_model(cfg);
  const auto sp = solve_modes(model, std::min(cfg.modes, model.n_dof()));
  const double two_pi = 2 * std::numbers::pi;
  std::printf("%-6s %-8s %16s %16s %12s\n", "Mode", "Type", "Frequency (Hz)", "omega (rad/s)",
              "Ratio to 1");
  auto csv = run.open("eig.csv");
  csv << "mode_1,type,frequency_hz,omega_rad_s,ratio_to_mode1_1\n";
  for (int i = 0; i < sp.n_computed(); ++i) {
    const double w = sp.omega(i);
    const char* kind = mode_kind(model, sp.phis.col(i));
    std::printf("%-6d %-8s %16.3f %16.3f %12.3f\n", i + 1, kind, w / two_pi, w, w / sp.omega(0));
    csv << i + 1 << ',' << kind << ',' << w / two_pi << ',' << w << ',' << w / sp.omega(0) << '\n';
  }
  for (const auto& [a, b] : sp.clusters)
    std::printf("warning: modes %d-%d form a near-degenerate cluster\n", a + 1, b + 1);
  if (o.shapes) {
    auto shapes = run.open("modes.csv");
    shapes << "dof_1,node_1,kind";
    for (int i = 0; i < sp.n_computed(); ++i) shapes << ",phi" << i + 1 << "_m_per_sqrt_kg";
    shapes << '\n';
    for (int d = 0; d < model.n_dof(); ++d) {
      const bool labelled = !model.labels().empty();
      shapes << d + 1 << ',' << (labelled ? model.labels()[d].node : 0) << ','
             << (labelled ? to_string(model.labels()[d].kind) : "generic");
      for (int i = 0; i < sp.n_computed(); ++i) shapes << ',' << sp.phis(d, i);
      shapes << '\n';
    }
  }
  return 0;
}

int cmd_step(const Options& o, Run& run) {
  const RunConfig cfg = resolve(o);
  run.manifest.settings = config_to_toml(cfg);
  const auto model = build_model(cfg);
  const auto sp = solve_modes(model, std::min(cfg.modes, model.n_dof()));
  const auto masters = master_indices(cfg);
  const auto t = step_tensors(model, sp, masters);
  // Modal coordinates of the masters as a polynomial model in the same text format.
  const int n = t.n();
  std::vector<PolynomialForce::Quadratic> q;
  std::vector<PolynomialForce::Cubic> c;
  for (int p = 0; p < n; ++p) {
    const Vector phi = sp.phi(masters[p]);
    for (const auto& [k, v] : t.g) {
      const double mult = k[0] == k[1] ? 1 : 2;
      const double g = phi.dot(v);
      if (g != 0.0) q.push_back({p, k[0], k[1], mult * g});
    }
    for (const auto& [k, v] : t.h) {
      const double mult = (k[0] == k[1] && k[1] == k[2]) ? 1 : (k[0] == k[1] || k[1] == k[2]) ? 3 : 6;
      const double h = phi.dot(v);
      if (h != 0.0) c.push_back({p, k[0], k[1], k[2], mult * h});
    }
  }
  Matrix k = Matrix::Zero(n, n);
  for (int p = 0; p < n; ++p) k(p, p) = sp.omega(masters[p]) * sp.omega(masters[p]);
  const StructuralModel modal(Matrix::Identity(n, n), k,
                              std::make_shared<PolynomialForce>(n, std::move(q), std::move(c)));
  auto out = run.open("step_tensors.txt");
  out << std::setprecision(17);
  write_polynomial_model(out, modal);
  std::printf("%d masters, %zu quadratic and %zu cubic tensor vectors, %zu force evaluations\n", n,
              t.g.size(), t.h.size(), t.evaluations);
  return 0;
}

DnfBuild run_dnf(const RunConfig& cfg, const StructuralModel& model, bool undamped = false) {
  const auto sp = solve_modes(model, std::min(cfg.modes, model.n_dof()));
  DnfOptions opt = dnf_options(cfg);
  if (undamped) opt.damping = DampingSpec{};
  auto b = build_dnf(model, sp, master_indices(cfg), opt);
  for (const auto& w : b.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return b;
}

void print_resonances(const MappingTensors& t) {
  for (const auto& r : t.resonances.second_order)
    std::printf("second-order resonance: mode %d, %s of masters %d,%d, sigma %.6g rad/s%s\n", r.s + 1,
                r.sum ? "sum" : "difference", t.masters[r.i] + 1, t.masters[r.j] + 1, r.sigma,
                r.declared ? " (declared)" : "");
  for (const auto& r : t.resonances.third_order)
    if (!r.trivial)
      std::printf("third-order resonance: mode %d, masters %d,%d,%d, sigma %.6g rad/s%s\n", r.s + 1,
                  t.masters[r.triple[0]] + 1, t.masters[r.triple[1]] + 1, t.masters[r.triple[2]] + 1,
                  r.sigma, r.declared ? " (declared)" : "");
}

int cmd_dnf(const Options& o, Run& run) {
  const RunConfig cfg = resolve(o);
  run.manifest.settings = config_to_toml(cfg);
  const auto model = build_model(cfg);
  const auto b = run_dnf(cfg, model);
  print_resonances(b.tensors);
  auto out = run.open("mapping.txt");
  write_archive(out, make_archive(b));
  std::printf("order %d, %d masters, %s, archive written\n", cfg.order, b.tensors.n,
              b.tensors.damped ? "damped" : "undamped");
  return 0;
}

MappingArchive archive_for(const Options& o, const RunConfig& cfg, bool undamped = false) {
  if (!o.archive.empty()) {
    std::ifstream in(o.archive);
    if (!in) throw ValidationError("cannot open archive " + o.archive);
    return read_archive(in);
  }
  const auto model = build_model(cfg);
  return make_archive(run_dnf(cfg, model, undamped));
}

RomOptions rom_options(const RunConfig& cfg) {
  RomOptions r;
  r.variant = cfg.variant;
  r.damping = cfg.nonlinear_damping;
  return r;
}

int cmd_rom(const Options& o, Run& run) {
  const RunConfig cfg = resolve(o);
  run.manifest.settings = config_to_toml(cfg);
  const auto ar = archive_for(o, cfg);
  const auto rom = assemble_rom(ar.tensors, ar.reduced, rom_options(cfg));
  print_rom_equations(std::cout, rom);
  auto out = run.open("rom.txt");
  write_rom(out, rom);
  return 0;
}

/// Window in rad/s from the ratios, relative to the first master frequency.
void set_window(HbmConfig& h, const RunConfig& cfg, double omega_ref) {
  if (cfg.omega_min_ratio > 0) h.omega_min = cfg.omega_min_ratio * omega_ref;
  if (cfg.omega_max_ratio > 0) h.omega_max = cfg.omega_max_ratio * omega_ref;
}

int continuation(const Options& o, Run& run, bool forced) {
  const RunConfig cfg = resolve(o);
  run.manifest.settings = config_to_toml(cfg);
  const auto model = build_model(cfg);
  const int probe = probe_index(cfg, model);
  const auto sp = solve_modes(model, std::min(cfg.modes, model.n_dof()));
  const auto masters = master_indices(cfg);
  HbmConfig h = cfg.hbm;
  std::unique_ptr<HbmSystem> sys;
  MappingArchive ar;
  Vector mode;
  double omega0 = 0, omega_ref = sp.omega(masters[0]);
  const DampingSpec damping = forced ? cfg.damping : DampingSpec{};

  if (o.system == "full") {
    const int m = cfg.backbone_mode - 1;
    if (m < 0 || m >= sp.n_computed()) throw ValidationError("backbone mode out of range");
    mode = sp.phi(m);
    omega0 = sp.omega(m);
    if (forced)
      sys = std::make_unique<FullSystem>(model, damping, probe, force_index(cfg, model),
                                         cfg.force_amplitude);
    else
      sys = std::make_unique<FullSystem>(model, damping, probe);
  } else {
    RunConfig rc = cfg;
    rc.damping = damping;
    ar = archive_for(o, rc, !forced);
    RomModel rom = assemble_rom(ar.tensors, ar.reduced, rom_options(cfg));
    const int n = rom.n;
    if (forced) {
      const int f = force_index(cfg, model);
      for (int r = 0; r < n; ++r) rom.forcing[r] = ar.tensors.phi(f, r) * cfg.force_amplitude;
    }
    const int order = cfg.variant == RomVariant::o3 ? 3 : 2;
    sys = std::make_unique<RomSystem>(rom, &ar.tensors, order, ar.tensors.damped, probe);
    const int m = cfg.backbone_mode - 1;
    if (m < 0 || m >= n) throw ValidationError("backbone mode must index a master");
    mode = Vector::Zero(n);
    mode[m] = 1.0;
    omega0 = rom.omegas[m];
    omega_ref = rom.omegas[0];
  }
  set_window(h, cfg, omega_ref);
  const Hbm hbm(*sys, h.harmonics, h.samples);
  const Branch br = forced ? frf(hbm, h) : backbone(hbm, mode, omega0, h);
  auto out = run.open(forced ? "frf.csv" : "backbone.csv");
  write_branch_csv(out, hbm, br, omega_ref);
  std::printf("%zu points, %zu folds, %s\n", br.points.size(), br.folds().size(),
              br.termination.c_str());
  for (int f : br.folds())
    std::printf("fold at omega/omega_ref %.6f, amplitude %.6g m\n", br.points[f].omega / omega_ref,
                br.points[f].amplitude);
  return 0;
}

int cmd_reconstruct(const Options& o, Run& run) {
  Options oo = o;
  oo.order = o.rec_order;
  const RunConfig cfg = resolve(oo);
  run.manifest.settings = config_to_toml(cfg);
  const auto ar = archive_for(o, cfg);
  const int n = ar.tensors.n;
  Vector R = Vector::Zero(n), S = Vector::Zero(n);
  if (static_cast<int>(o.R.size()) > n || static_cast<int>(o.S.size()) > n)
    throw ValidationError("more normal coordinates than masters");
  for (std::size_t i = 0; i < o.R.size(); ++i) R[i] = o.R[i];
  for (std::size_t i = 0; i < o.S.size(); ++i) S[i] = o.S[i];
  const auto rec = reconstruct(ar.tensors, R, S, o.rec_order, o.damped);
  auto out = run.open("reconstruct.csv");
  out << std::setprecision(17) << "dof_1,X_m,Y_m_s\n";
  for (int d = 0; d < rec.X.size(); ++d) out << d + 1 << ',' << rec.X[d] << ',' << rec.Y[d] << '\n';
  std::printf("|X| = %.6g m, |Y| = %.6g m/s over %d dofs\n", rec.X.norm(), rec.Y.norm(),
              static_cast<int>(rec.X.size()));
  return 0;
}

int cmd_verify(const Options& o, Run& run) {
  run.manifest.settings = "models = " + std::to_string(o.verify_models) + "\nseed = " + std::to_string(o.seed) + "\n";
  auto log = run.open("verify.txt");
  std::ostringstream lines;
  const auto rep = run_verification(o.verify_models, o.seed, &lines);
  log << lines.str();
  std::cout << lines.str();
  std::printf("STEP round trip: max rel %.3e (limit 1e-9) %s\n", rep.step, rep.step_ok() ? "ok" : "FAILED");
  std::printf("direct vs modal: second %.3e third %.3e trivial %.3e (limit 1e-8/1e-8/1e-10)\n",
              rep.worst.second, rep.worst.third, rep.worst.trivial);
  std::printf("second-order forms: split %.3e mass-inverse %.3e (limit 1e-10) %s\n", rep.worst.split,
              rep.worst.mass_inverse, rep.equivalence_ok() ? "ok" : "FAILED");
  return rep.step_ok() && rep.equivalence_ok() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct normal form reduced-order models for geometrically nonlinear structures"};
  app.require_subcommand(1);
  Options o;

  auto* eig = app.add_subcommand("eig", "Eigenfrequencies and mode shapes");
  add_model_options(eig, o);
  eig->add_flag("--shapes", o.shapes, "Also write mode shapes");

  auto* step = app.add_subcommand("step", "Quadratic and cubic tensors on the masters");
  add_model_options(step, o);
  add_dnf_options(step, o);

  auto* dnf = app.add_subcommand("dnf", "Normal-form mapping tensors");
  add_model_options(dnf, o);
  add_dnf_options(dnf, o);

  auto* rom = app.add_subcommand("rom", "Reduced dynamics");
  add_model_options(rom, o);
  add_dnf_options(rom, o);
  add_rom_options(rom, o);

  auto* bb = app.add_subcommand("backbone", "Conservative backbone by harmonic balance");
  auto* fr = app.add_subcommand("frf", "Forced response by harmonic balance");
  for (auto* sc : {bb, fr}) {
    add_model_options(sc, o);
    add_dnf_options(sc, o);
    add_rom_options(sc, o);
    add_hbm_options(sc, o);
  }
  fr->add_option("--force", o.force, "Point force amplitude [N]");

  auto* rec = app.add_subcommand("reconstruct", "Physical displacement and velocity from (R, S)");
  add_model_options(rec, o);
  add_dnf_options(rec, o, false);
  rec->add_option("--archive", o.archive, "Mapping archive written by dnf");
  rec->add_option("--R", o.R, "Normal displacements");
  rec->add_option("--S", o.S, "Normal velocities");
  rec->add_option("--order", o.rec_order, "Mapping order, 2 or 3")->check(CLI::IsMember({2, 3}));
  rec->add_flag("--damped", o.damped, "Include damping corrections");

  auto* ver = app.add_subcommand("verify", "Direct vs modal equivalence suite");
  ver->add_option("-o,--out", o.out, "Output directory")->capture_default_str();
  ver->add_option("--models", o.verify_models, "Random systems per suite")->capture_default_str();
  ver->add_option("--seed", o.seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sc = app.get_subcommands().front();
  const std::string name = sc->get_name();
  std::unique_ptr<Run> run;
  int code = 0;
  std::string message = "ok";
  try {
    run = std::make_unique<Run>(name, o, argc, argv);
    if (name == "eig") code = cmd_eig(o, *run);
    else if (name == "step") code = cmd_step(o, *run);
    else if (name == "dnf") code = cmd_dnf(o, *run);
    else if (name == "rom") code = cmd_rom(o, *run);
    else if (name == "backbone") code = continuation(o, *run, false);
    else if (name == "frf") code = continuation(o, *run, true);
    else if (name == "reconstruct") code = cmd_reconstruct(o, *run);
    else code = cmd_verify(o, *run);
    if (code != 0) message = "checks failed";
  } catch (const ValidationError& e) {
    code = 2, message = e.what();
  } catch (const ResonanceError& e) {
    code = 4, message = e.what();
  } catch (const NumericalError& e) {
    code = 3, message = e.what();
  } catch (const std::exception& e) {
    code = 3, message = e.what();
  }
  if (code != 0) std::fprintf(stderr, "error: %s\n", message.c_str());
  if (run) {
    try {
      run->finish(code, message);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
    }
  }
  return code;
}
