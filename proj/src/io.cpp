#include "dnrom/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

#include "dnrom/errors.hpp"
#include "dnrom/polynomial_model.hpp"

namespace dnrom {

namespace {

template <class T>
T get(const toml::table& tbl, const char* section, const char* key, T fallback) {
  const auto node = tbl[section][key];
  if (!node) return fallback;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node.value<double>()) return *v;
  } else if constexpr (std::is_same_v<T, int>) {
    if (auto v = node.value<int64_t>()) return static_cast<int>(*v);
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = node.value<std::string>()) return *v;
  }
  throw ValidationError(std::string("config: bad value for ") + section + "." + key);
}

RomVariant parse_variant(const std::string& s) {
  if (s == "o2") return RomVariant::o2_full;
  if (s == "o3") return RomVariant::o3;
  throw ValidationError("config: rom.variant must be o2 or o3, got " + s);
}

NonlinearDamping parse_damping(const std::string& s) {
  if (s == "none") return NonlinearDamping::none;
  if (s == "self") return NonlinearDamping::self;
  if (s == "full") return NonlinearDamping::full;
  throw ValidationError("config: rom.nonlinear_damping must be none, self or full, got " + s);
}

const char* variant_name(RomVariant v) { return v == RomVariant::o3 ? "o3" : "o2"; }

const char* damping_name(NonlinearDamping d) {
  return d == NonlinearDamping::none ? "none" : d == NonlinearDamping::self ? "self" : "full";
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: " << e.description() << " at line " << e.source().begin.line;
    throw ValidationError(msg.str());
  }
  RunConfig c;
  c.model_kind = get<std::string>(tbl, "model", "kind", c.model_kind);
  c.model_file = get<std::string>(tbl, "model", "file", c.model_file);
  if (c.model_kind != "beam" && c.model_kind != "file")
    throw ValidationError("config: model.kind must be beam or file");

  auto& b = c.beam;
  b.length = get(tbl, "beam", "length_m", b.length);
  b.width = get(tbl, "beam", "width_m", b.width);
  b.height = get(tbl, "beam", "thickness_m", b.height);
  b.young_modulus = get(tbl, "beam", "young_modulus_pa", b.young_modulus);
  b.density = get(tbl, "beam", "density_kg_m3", b.density);
  b.poisson = get(tbl, "beam", "poisson", b.poisson);
  b.n_elements = get(tbl, "beam", "elements", b.n_elements);

  c.modes = get(tbl, "modes", "count", c.modes);
  if (const auto* arr = tbl["dnf"]["masters"].as_array()) {
    c.masters.clear();
    for (const auto& v : *arr) {
      const auto m = v.value<int64_t>();
      if (!m) throw ValidationError("config: dnf.masters must be integers");
      c.masters.push_back(static_cast<int>(*m));
    }
  }
  c.order = get(tbl, "dnf", "order", c.order);
  c.eps_res = get(tbl, "dnf", "eps_res", c.eps_res);
  if (const auto* arr = tbl["dnf"]["resonances"].as_array())
    for (const auto& v : *arr) {
      const auto s = v.value<std::string>();
      if (!s) throw ValidationError("config: dnf.resonances must be strings");
      c.resonances.push_back(*s);
    }
  c.damping.zeta_m = get(tbl, "damping", "zeta_m_1_s", c.damping.zeta_m);
  c.damping.zeta_k = get(tbl, "damping", "zeta_k_s", c.damping.zeta_k);

  c.variant = parse_variant(get<std::string>(tbl, "rom", "variant", variant_name(c.variant)));
  c.nonlinear_damping =
      parse_damping(get<std::string>(tbl, "rom", "nonlinear_damping", damping_name(c.nonlinear_damping)));

  auto& h = c.hbm;
  h.harmonics = get(tbl, "hbm", "harmonics", h.harmonics);
  h.samples = get(tbl, "hbm", "samples", h.samples);
  h.tolerance = get(tbl, "hbm", "tolerance", h.tolerance);
  h.max_newton = get(tbl, "hbm", "max_newton", h.max_newton);
  h.max_steps = get(tbl, "hbm", "max_steps", h.max_steps);
  h.step = get(tbl, "hbm", "step", h.step);
  h.step_min = get(tbl, "hbm", "step_min", h.step_min);
  h.step_max = get(tbl, "hbm", "step_max", h.step_max);
  h.amplitude_max = get(tbl, "hbm", "amplitude_max_m", h.amplitude_max);
  h.kick = get(tbl, "hbm", "kick", h.kick);
  c.omega_min_ratio = get(tbl, "hbm", "omega_min_ratio", c.omega_min_ratio);
  c.omega_max_ratio = get(tbl, "hbm", "omega_max_ratio", c.omega_max_ratio);
  c.backbone_mode = get(tbl, "hbm", "mode", c.backbone_mode);

  c.probe_position = get(tbl, "probe", "position_m", c.probe_position);
  c.probe_dof = get(tbl, "probe", "dof", c.probe_dof);
  c.force_position = get(tbl, "forcing", "position_m", c.force_position);
  c.force_dof = get(tbl, "forcing", "dof", c.force_dof);
  c.force_amplitude = get(tbl, "forcing", "amplitude_n", c.force_amplitude);

  if (c.modes < 1) throw ValidationError("config: modes.count must be positive");
  if (c.masters.empty()) throw ValidationError("config: dnf.masters is empty");
  for (int m : c.masters)
    if (m < 1 || m > c.modes) throw ValidationError("config: master mode out of range");
  if (c.order != 2 && c.order != 3) throw ValidationError("config: dnf.order must be 2 or 3");
  c.damping.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path);
  std::ostringstream s;
  s << in.rdbuf();
  RunConfig c = parse_config(s.str());
  // Model files are resolved relative to the config.
  if (c.model_kind == "file" && !c.model_file.empty() && c.model_file[0] != '/') {
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos) c.model_file = path.substr(0, slash + 1) + c.model_file;
  }
  return c;
}

std::string config_to_toml(const RunConfig& c) {
  toml::array masters, resonances;
  for (int m : c.masters) masters.push_back(m);
  for (const auto& r : c.resonances) resonances.push_back(r);
  toml::table t{
      {"model", toml::table{{"kind", c.model_kind}, {"file", c.model_file}}},
      {"beam", toml::table{{"length_m", c.beam.length},
                           {"width_m", c.beam.width},
                           {"thickness_m", c.beam.height},
                           {"young_modulus_pa", c.beam.young_modulus},
                           {"density_kg_m3", c.beam.density},
                           {"poisson", c.beam.poisson},
                           {"elements", c.beam.n_elements}}},
      {"modes", toml::table{{"count", c.modes}}},
      {"dnf", toml::table{{"order", c.order},
                          {"eps_res", c.eps_res},
                          {"masters", masters},
                          {"resonances", resonances}}},
      {"damping", toml::table{{"zeta_m_1_s", c.damping.zeta_m}, {"zeta_k_s", c.damping.zeta_k}}},
      {"rom", toml::table{{"variant", variant_name(c.variant)},
                          {"nonlinear_damping", damping_name(c.nonlinear_damping)}}},
      {"hbm", toml::table{{"harmonics", c.hbm.harmonics},
                          {"samples", c.hbm.samples},
                          {"tolerance", c.hbm.tolerance},
                          {"max_newton", c.hbm.max_newton},
                          {"max_steps", c.hbm.max_steps},
                          {"step", c.hbm.step},
                          {"step_min", c.hbm.step_min},
                          {"step_max", c.hbm.step_max},
                          {"amplitude_max_m", c.hbm.amplitude_max},
                          {"kick", c.hbm.kick},
                          {"omega_min_ratio", c.omega_min_ratio},
                          {"omega_max_ratio", c.omega_max_ratio},
                          {"mode", c.backbone_mode}}},
      {"probe", toml::table{{"position_m", c.probe_position}, {"dof", c.probe_dof}}},
      {"forcing", toml::table{{"position_m", c.force_position},
                              {"dof", c.force_dof},
                              {"amplitude_n", c.force_amplitude}}},
  };
  std::ostringstream s;
  s << t << "\n";
  return s.str();
}

StructuralModel build_model(const RunConfig& cfg) {
  if (cfg.model_kind == "beam") return assemble_vk_beam(cfg.beam);
  if (cfg.model_file.empty()) throw ValidationError("config: model.file is required for kind = file");
  return load_polynomial_model(cfg.model_file);
}

namespace {

int located_dof(const RunConfig& cfg, const StructuralModel& model, double position, int dof) {
  if (cfg.model_kind == "beam") return beam_transverse_dof(cfg.beam, position);
  const int d = dof == 0 ? 0 : dof - 1;
  if (d < 0 || d >= model.n_dof()) throw ValidationError("dof index out of range");
  return d;
}

}  // namespace

int probe_index(const RunConfig& cfg, const StructuralModel& model) {
  return located_dof(cfg, model, cfg.probe_position, cfg.probe_dof);
}

int force_index(const RunConfig& cfg, const StructuralModel& model) {
  return located_dof(cfg, model, cfg.force_position, cfg.force_dof);
}

std::vector<int> master_indices(const RunConfig& cfg) {
  std::vector<int> out;
  for (int m : cfg.masters) out.push_back(m - 1);
  return out;
}

DnfOptions dnf_options(const RunConfig& cfg) {
  DnfOptions o;
  o.order = cfg.order;
  o.eps_res = cfg.eps_res;
  o.damping = cfg.damping;
  for (const auto& r : cfg.resonances) o.declared.push_back(parse_resonance(r));
  return o;
}

// ---------------------------------------------------------------------------------------------
// Mapping archive

namespace {

using VectorList = std::vector<Vector>;

std::vector<std::pair<std::string, VectorList*>> vector_fields(MappingTensors& t) {
  return {{"a", &t.a},         {"b", &t.b},       {"gamma", &t.gamma}, {"zs", &t.zs},
          {"zd", &t.zd},       {"c", &t.c},       {"alpha", &t.alpha}, {"beta", &t.beta},
          {"zss", &t.zss},     {"zdd", &t.zdd},   {"r", &t.r},         {"u", &t.u},
          {"mu", &t.mu},       {"nu", &t.nu},     {"z0", &t.z[0]},     {"z1", &t.z[1]},
          {"z2", &t.z[2]},     {"z3", &t.z[3]}};
}

std::vector<std::pair<std::string, std::vector<double>*>> reduced_fields(ReducedTensors& r) {
  return {{"A", &r.A}, {"B", &r.B}, {"C", &r.C}, {"h", &r.h}};
}

void write_values(std::ostream& out, const Vector& v) {
  out << v.size();
  for (double x : v) out << ' ' << num(x);
  out << '\n';
}

Vector read_values(std::istream& in) {
  long n = 0;
  if (!(in >> n) || n < 0) throw ValidationError("archive: bad vector length");
  Vector v(n);
  for (long i = 0; i < n; ++i)
    if (!(in >> v[i])) throw ValidationError("archive: truncated vector");
  return v;
}

}  // namespace

MappingArchive make_archive(const DnfBuild& build) {
  return {build.tensors, reduced_tensors(build)};
}

void write_archive(std::ostream& out, const MappingArchive& archive) {
  MappingTensors t = archive.tensors;
  ReducedTensors rt = archive.reduced;
  out << "# dnrom mapping archive; indices 0-based, pairs i*n+j, triples (i*n+j)*n+k\n";
  out << "format 1\n";
  out << "n_masters " << t.n << "\n";
  out << "masters";
  for (int m : t.masters) out << ' ' << m;
  out << "\nomegas_rad_s ";
  write_values(out, t.omegas);
  out << "damped " << (t.damped ? 1 : 0) << ' ' << num(t.damping.zeta_m) << ' '
      << num(t.damping.zeta_k) << "\n";
  out << "third " << (t.third ? 1 : 0) << "\n";
  out << "tolerance " << num(t.resonances.tolerance) << "\n";
  for (const auto& r : t.resonances.second_order)
    out << "second " << r.s << ' ' << r.i << ' ' << r.j << ' ' << (r.sum ? 1 : 0) << ' '
        << num(r.sigma) << ' ' << (r.declared ? 1 : 0) << "\n";
  for (const auto& r : t.resonances.third_order)
    out << "third_res " << r.s << ' ' << r.triple[0] << ' ' << r.triple[1] << ' ' << r.triple[2]
        << ' ' << r.signs[0] << ' ' << r.signs[1] << ' ' << r.signs[2] << ' ' << num(r.sigma)
        << ' ' << (r.trivial ? 1 : 0) << ' ' << (r.declared ? 1 : 0) << "\n";
  for (const auto& r : t.residuals)
    out << "residual " << r.order << ' ' << r.which << ' ' << r.idx[0] << ' ' << r.idx[1] << ' '
        << r.idx[2] << ' ' << r.s << ' ' << num(r.value) << "\n";
  for (int i = 0; i < t.n; ++i) {
    out << "phi " << i << ' ';
    write_values(out, t.phi.col(i));
  }
  for (const auto& [name, list] : vector_fields(t))
    for (std::size_t p = 0; p < list->size(); ++p) {
      out << name << ' ' << p << ' ';
      write_values(out, (*list)[p]);
    }
  for (const auto& [name, table] : reduced_fields(rt))
    for (std::size_t q = 0; q < table->size(); ++q) {
      if ((*table)[q] == 0.0) continue;
      std::size_t rest = q;
      const std::size_t k = rest % t.n;
      rest /= t.n;
      const std::size_t j = rest % t.n;
      rest /= t.n;
      const std::size_t i = rest % t.n;
      const std::size_t r = rest / t.n;
      out << "reduced " << name << ' ' << r << ' ' << i << ' ' << j << ' ' << k << ' '
          << num((*table)[q]) << "\n";
    }
  out << "end\n";
}

MappingArchive read_archive(std::istream& in) {
  MappingArchive ar;
  auto& t = ar.tensors;
  auto& rt = ar.reduced;
  auto vfields = vector_fields(t);
  auto rfields = reduced_fields(rt);
  std::vector<Vector> phis;
  bool ended = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream s(line);
    std::string key;
    s >> key;
    auto fail = [&] { throw ValidationError("archive: malformed line: " + line); };
    if (key == "format") {
      int f = 0;
      if (!(s >> f) || f != 1) fail();
    } else if (key == "n_masters") {
      if (!(s >> t.n) || t.n < 1) fail();
      t.resonances.masters.clear();
    } else if (key == "masters") {
      int m;
      while (s >> m) t.masters.push_back(m);
      t.resonances.masters = t.masters;
    } else if (key == "omegas_rad_s") {
      t.omegas = read_values(s);
    } else if (key == "damped") {
      int d = 0;
      if (!(s >> d >> t.damping.zeta_m >> t.damping.zeta_k)) fail();
      t.damped = d != 0;
    } else if (key == "third") {
      int d = 0;
      if (!(s >> d)) fail();
      t.third = d != 0;
    } else if (key == "tolerance") {
      if (!(s >> t.resonances.tolerance)) fail();
    } else if (key == "second") {
      SecondOrderResonance r;
      int sum = 0, dec = 0;
      if (!(s >> r.s >> r.i >> r.j >> sum >> r.sigma >> dec)) fail();
      r.sum = sum != 0;
      r.declared = dec != 0;
      t.resonances.second_order.push_back(r);
    } else if (key == "third_res") {
      ThirdOrderResonance r;
      int triv = 0, dec = 0;
      if (!(s >> r.s >> r.triple[0] >> r.triple[1] >> r.triple[2] >> r.signs[0] >> r.signs[1] >>
            r.signs[2] >> r.sigma >> triv >> dec))
        fail();
      r.trivial = triv != 0;
      r.declared = dec != 0;
      t.resonances.third_order.push_back(r);
    } else if (key == "residual") {
      BorderedResidual r;
      if (!(s >> r.order >> r.which >> r.idx[0] >> r.idx[1] >> r.idx[2] >> r.s >> r.value)) fail();
      t.residuals.push_back(r);
    } else if (key == "phi") {
      int i = 0;
      if (!(s >> i) || i < 0 || i >= t.n) fail();
      if (static_cast<int>(phis.size()) <= i) phis.resize(i + 1);
      phis[i] = read_values(s);
    } else if (key == "reduced") {
      std::string name;
      std::size_t r, i, j, k;
      double v;
      if (!(s >> name >> r >> i >> j >> k >> v)) fail();
      const std::size_t n = t.n;
      if (r >= n || i >= n || j >= n || k >= n) fail();
      bool found = false;
      for (auto& [fname, table] : rfields) {
        if (table->size() != n * n * n * n) table->assign(n * n * n * n, 0.0);
        if (fname == name) {
          (*table)[((r * n + i) * n + j) * n + k] = v;
          found = true;
        }
      }
      if (!found) fail();
    } else if (key == "end") {
      ended = true;
      break;
    } else {
      bool found = false;
      for (auto& [name, list] : vfields)
        if (name == key) {
          std::size_t p = 0;
          if (!(s >> p)) fail();
          if (list->size() <= p) list->resize(p + 1);
          (*list)[p] = read_values(s);
          found = true;
          break;
        }
      if (!found) fail();
    }
  }
  if (!ended) throw ValidationError("archive: missing end marker");
  const std::size_t n = t.n;
  if (n == 0 || static_cast<std::size_t>(t.omegas.size()) != n || t.masters.size() != n ||
      phis.size() != n)
    throw ValidationError("archive: inconsistent master count");
  t.phi.resize(phis[0].size(), n);
  for (std::size_t i = 0; i < n; ++i) {
    if (phis[i].size() != t.phi.rows()) throw ValidationError("archive: mode shape size mismatch");
    t.phi.col(i) = phis[i];
  }
  rt.n = t.n;
  for (auto& [name, table] : rfields)
    if (table->size() != n * n * n * n) table->assign(n * n * n * n, 0.0);
  if (t.a.size() != n * n) throw ValidationError("archive: second-order tensors missing");
  if (t.third && t.r.size() != n * n * n) throw ValidationError("archive: third-order tensors missing");
  if (t.damped && t.c.size() != n * n) throw ValidationError("archive: damping tensors missing");
  return ar;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::ostringstream s;
  s << in.rdbuf();
  return fnv1a_hex(s.str());
}

void write_manifest(const std::string& path, const Manifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = "dnrom";
  j["version"] = DNROM_VERSION;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
  j["compiler"] = __VERSION__;
  j["command"] = m.command;
  j["arguments"] = m.arguments;
  auto files = [](const std::vector<std::string>& paths) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : paths) arr.push_back({{"path", p}, {"fnv1a64", file_digest(p)}});
    return arr;
  };
  j["inputs"] = files(m.inputs);
  j["outputs"] = files(m.outputs);
  j["settings_toml"] = m.settings;
  j["exit_code"] = m.exit_code;
  j["message"] = m.message;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write manifest " + path);
  out << j.dump(2) << "\n";
}

}  // namespace dnrom
