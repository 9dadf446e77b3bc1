#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qshadow/field.hpp"
#include "qshadow/montecarlo.hpp"
#include "qshadow/theory.hpp"
#include "qshadow/types.hpp"

namespace qshadow::runner {

namespace fs = std::filesystem;

/// Full experiment description, loaded from a flat JSON file. The squeezing
/// strength comes from exactly one of `anti_squeezing_db` (noise level of the
/// anti-squeezed quadrature in dB) or `squeezing_r` (the squeeze parameter).
struct ExperimentConfig {
  int grid_width = 128;
  int grid_height = 128;
  double pixel_pitch = 1.0;

  double lo_waist_px = 25.0;
  double lo_center_x = -1.0;  // -1: grid centre (w-1)/2
  double lo_center_y = -1.0;
  double sq_waist_px = -1.0;  // -1: same as LO (mode matched)

  int mask_x0 = 64, mask_y0 = 64, mask_x1 = 128, mask_y1 = 128;
  bool mask_inverted = false;

  double squeezing_r = 0.0;  // resolved value; see from_json
  theory::Quadrature quadrature = theory::Quadrature::AntiSqueezed;
  double relative_phase_rad = 0.0;

  double lo_photons_per_frame = 1e6;
  double dark_mean = 0.0;
  double dark_var = 4.0;
  int frames_per_cluster = 4;
  double exposure_s = 2e-6;
  double coherence_s = 2.5e-6;

  std::vector<int> radii = {1, 5, 10, 15};
  std::uint64_t clusters = 5000;
  std::uint64_t sweep_clusters = 1000;
  int sweep_repeats = 5;
  double classical_photons_per_frame = 250.0;
  std::vector<double> photon_budgets_per_frame = {0.8, 8.0, 80.0, 800.0};

  std::uint64_t master_seed = 1;
  int workers = 0;
  bool bit_exact = false;

  double validity_floor_energy_frac = 1e-6;
  double vr_floor = 0.05;
  double classical_ref_floor = 1e-3;
  bool subtract_dark_mean = true;
  bool mean_subtract = false;
  bool poissonize_ports = false;
  bool round_counts = false;

  int cross_section_row = -1;  // -1: midpoint of the left vertical mask edge
  int cross_section_span = 80;

  double far_distance_px = 2e5;
  double wavelength_px = 0.5;

  std::uint64_t dump_clusters = 0;
  std::string out_dir = "out";

  static ExperimentConfig from_json_file(const fs::path& path);
  static ExperimentConfig from_json_text(const std::string& text);

  /// Canonical JSON rendering (sorted keys) used for hashing and manifests.
  std::string canonical_json() const;
  std::string config_hash() const;

  void validate() const;

  theory::SqueezerParams squeezer() const {
    return theory::SqueezerParams(squeezing_r, quadrature, relative_phase_rad);
  }
  double resolved_center_x() const {
    return lo_center_x < 0.0 ? (grid_width - 1) / 2.0 : lo_center_x;
  }
  double resolved_center_y() const {
    return lo_center_y < 0.0 ? (grid_height - 1) / 2.0 : lo_center_y;
  }
  double resolved_sq_waist() const { return sq_waist_px < 0.0 ? lo_waist_px : sq_waist_px; }
  /// Row of the default cross-section: the midpoint of the mask's left
  /// vertical edge, clamped into the grid.
  int resolved_row() const;
  int resolved_x_start() const;
};

/// Derived simulation objects shared by the commands.
struct SceneSetup {
  Grid grid;
  field::ComplexField u2;        // LO mode
  field::ComplexField u1_open;   // squeezed mode, no object
  field::ComplexField u1_probe;  // squeezed mode after the mask
  field::Mask mask;
  bool mode_matched = false;

  static SceneSetup build(const ExperimentConfig& config);

  mc::Scene reference_scene(const ExperimentConfig& config) const;
  mc::Scene probe_scene(const ExperimentConfig& config) const;
  mc::CameraParams camera(const ExperimentConfig& config) const;
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  double wall_clock_ms = 0.0;
  std::vector<std::string> files;

  void add(const fs::path& out_dir, const fs::path& file);
  void write(const fs::path& out_dir, const std::string& canonical_config) const;
};

RunManifest run_theory(const ExperimentConfig& config);
RunManifest run_simulate(const ExperimentConfig& config);
RunManifest run_classical(const ExperimentConfig& config);
RunManifest run_sweep(const ExperimentConfig& config);

}  // namespace qshadow::runner
