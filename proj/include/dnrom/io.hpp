#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dnrom/dnf.hpp"
#include "dnrom/hbm.hpp"
#include "dnrom/rom.hpp"
#include "dnrom/vk_beam.hpp"

namespace dnrom {

/// Settings shared by every command, read from a TOML file. Mode numbers are 1-based.
struct RunConfig {
  std::string model_kind = "beam";  // "beam" or "file"
  std::string model_file;           // polynomial model path (kind = "file")
  BeamConfig beam;
  int modes = 12;
  std::vector<int> masters = {1};
  DampingSpec damping;
  int order = 3;
  double eps_res = 1e-3;
  std::vector<std::string> resonances;
  RomVariant variant = RomVariant::o3;
  NonlinearDamping nonlinear_damping = NonlinearDamping::full;
  HbmConfig hbm;
  double omega_min_ratio = 0.0;  // window relative to the first master frequency
  double omega_max_ratio = 0.0;
  int backbone_mode = 1;  // position in masters for ROMs, spectrum mode for the full model
  double probe_position = 0.5;  // beam, m
  int probe_dof = 0;            // file models, 1-based; 0 = first dof
  double force_position = 0.5;
  int force_dof = 0;
  double force_amplitude = 0.0;  // N
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Resolved settings as TOML, used in manifests.
std::string config_to_toml(const RunConfig& cfg);

StructuralModel build_model(const RunConfig& cfg);
/// 0-based free-dof indices of the probe and of the forced dof.
int probe_index(const RunConfig& cfg, const StructuralModel& model);
int force_index(const RunConfig& cfg, const StructuralModel& model);
std::vector<int> master_indices(const RunConfig& cfg);
DnfOptions dnf_options(const RunConfig& cfg);

/// Mapping and reduced tensors as coordinate text, enough to assemble ROMs and reconstruct.
struct MappingArchive {
  MappingTensors tensors;
  ReducedTensors reduced;
};
MappingArchive make_archive(const DnfBuild& build);
void write_archive(std::ostream& out, const MappingArchive& archive);
MappingArchive read_archive(std::istream& in);

/// Stable 64-bit FNV-1a digest, hex encoded.
std::string fnv1a_hex(const std::string& bytes);
std::string file_digest(const std::string& path);

/// Run record written next to every output.
struct Manifest {
  std::string command;
  std::vector<std::string> arguments;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string settings;  // resolved TOML
  int exit_code = 0;
  std::string message;
};
void write_manifest(const std::string& path, const Manifest& manifest);

}  // namespace dnrom
