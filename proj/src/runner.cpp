#include "qshadow/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qshadow/analysis.hpp"
#include "qshadow/io.hpp"
#include "qshadow/log.hpp"
#include "qshadow/parallel.hpp"

namespace qshadow::runner {

namespace {

using json = nlohmann::json;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

template <class T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + key + ": " + e.what());
  }
}

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw ConfigError("config: " + field + ": " + why);
}

constexpr std::size_t kReduceBlock = 128;

}  // namespace

ExperimentConfig ExperimentConfig::from_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");

  static const std::vector<std::string> known = {
      "grid_width", "grid_height", "pixel_pitch", "lo_waist_px", "lo_center_x", "lo_center_y",
      "sq_waist_px", "mask_x0", "mask_y0", "mask_x1", "mask_y1", "mask_inverted",
      "anti_squeezing_db", "squeezing_r", "quadrature", "relative_phase_rad",
      "lo_photons_per_frame", "dark_mean", "dark_var", "frames_per_cluster", "exposure_s",
      "coherence_s", "radii", "clusters", "sweep_clusters", "sweep_repeats",
      "classical_photons_per_frame", "photon_budgets_per_frame", "master_seed", "workers",
      "bit_exact", "validity_floor_energy_frac", "vr_floor", "classical_ref_floor",
      "subtract_dark_mean", "mean_subtract", "poissonize_ports", "round_counts",
      "cross_section_row", "cross_section_span", "far_distance_px", "wavelength_px",
      "dump_clusters", "out_dir"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      bad_field(key, "unknown key");
    }
  }

  ExperimentConfig c;
  read_key(j, "grid_width", c.grid_width);
  read_key(j, "grid_height", c.grid_height);
  read_key(j, "pixel_pitch", c.pixel_pitch);
  read_key(j, "lo_waist_px", c.lo_waist_px);
  read_key(j, "lo_center_x", c.lo_center_x);
  read_key(j, "lo_center_y", c.lo_center_y);
  read_key(j, "sq_waist_px", c.sq_waist_px);
  read_key(j, "mask_x0", c.mask_x0);
  read_key(j, "mask_y0", c.mask_y0);
  read_key(j, "mask_x1", c.mask_x1);
  read_key(j, "mask_y1", c.mask_y1);
  read_key(j, "mask_inverted", c.mask_inverted);

  const bool has_db = j.contains("anti_squeezing_db");
  const bool has_r = j.contains("squeezing_r");
  if (has_db && has_r) bad_field("anti_squeezing_db", "give either this or squeezing_r, not both");
  if (has_db) {
    double db = 0.0;
    read_key(j, "anti_squeezing_db", db);
    if (!(db >= 0.0)) bad_field("anti_squeezing_db", "must be >= 0");
    c.squeezing_r = db * std::numbers::ln10 / 20.0;
  } else if (has_r) {
    read_key(j, "squeezing_r", c.squeezing_r);
  } else {
    c.squeezing_r = 7.5 * std::numbers::ln10 / 20.0;  // 7.5 dB default
  }

  std::string quad = "anti_squeezed";
  read_key(j, "quadrature", quad);
  if (quad == "anti_squeezed") {
    c.quadrature = theory::Quadrature::AntiSqueezed;
  } else if (quad == "squeezed") {
    c.quadrature = theory::Quadrature::Squeezed;
  } else {
    bad_field("quadrature", "must be \"anti_squeezed\" or \"squeezed\"");
  }
  read_key(j, "relative_phase_rad", c.relative_phase_rad);

  read_key(j, "lo_photons_per_frame", c.lo_photons_per_frame);
  read_key(j, "dark_mean", c.dark_mean);
  read_key(j, "dark_var", c.dark_var);
  read_key(j, "frames_per_cluster", c.frames_per_cluster);
  read_key(j, "exposure_s", c.exposure_s);
  read_key(j, "coherence_s", c.coherence_s);
  read_key(j, "radii", c.radii);
  read_key(j, "clusters", c.clusters);
  read_key(j, "sweep_clusters", c.sweep_clusters);
  read_key(j, "sweep_repeats", c.sweep_repeats);
  read_key(j, "classical_photons_per_frame", c.classical_photons_per_frame);
  read_key(j, "photon_budgets_per_frame", c.photon_budgets_per_frame);
  read_key(j, "master_seed", c.master_seed);
  read_key(j, "workers", c.workers);
  read_key(j, "bit_exact", c.bit_exact);
  read_key(j, "validity_floor_energy_frac", c.validity_floor_energy_frac);
  read_key(j, "vr_floor", c.vr_floor);
  read_key(j, "classical_ref_floor", c.classical_ref_floor);
  read_key(j, "subtract_dark_mean", c.subtract_dark_mean);
  read_key(j, "mean_subtract", c.mean_subtract);
  read_key(j, "poissonize_ports", c.poissonize_ports);
  read_key(j, "round_counts", c.round_counts);
  read_key(j, "cross_section_row", c.cross_section_row);
  read_key(j, "cross_section_span", c.cross_section_span);
  read_key(j, "far_distance_px", c.far_distance_px);
  read_key(j, "wavelength_px", c.wavelength_px);
  read_key(j, "dump_clusters", c.dump_clusters);
  read_key(j, "out_dir", c.out_dir);

  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (grid_width < 2 || grid_height < 2) bad_field("grid_width/grid_height", "must be >= 2");
  if (!(pixel_pitch > 0.0)) bad_field("pixel_pitch", "must be > 0");
  if (!(lo_waist_px > 0.0)) bad_field("lo_waist_px", "must be > 0");
  if (sq_waist_px >= 0.0 && !(sq_waist_px > 0.0)) bad_field("sq_waist_px", "must be > 0");
  const Grid g(grid_width, grid_height, pixel_pitch);
  if (!g.contains(resolved_center_x(), resolved_center_y())) {
    bad_field("lo_center_x/lo_center_y", "centre must lie inside the grid");
  }
  if (mask_x0 < 0 || mask_y0 < 0 || mask_x1 > grid_width || mask_y1 > grid_height ||
      mask_x0 > mask_x1 || mask_y0 > mask_y1) {
    bad_field("mask_x0..mask_y1", "must satisfy 0 <= lo <= hi <= grid size");
  }
  if (!(squeezing_r >= 0.0)) bad_field("squeezing_r", "must be >= 0");
  if (!(lo_photons_per_frame >= 0.0)) bad_field("lo_photons_per_frame", "must be >= 0");
  if (!(dark_var >= 0.0)) bad_field("dark_var", "must be >= 0");
  if (frames_per_cluster < 2) bad_field("frames_per_cluster", "must be >= 2");
  if (!(exposure_s > 0.0)) bad_field("exposure_s", "must be > 0");
  if (!(coherence_s > 0.0)) bad_field("coherence_s", "must be > 0");
  if (radii.empty()) bad_field("radii", "need at least one radius");
  for (int r : radii) {
    if (r < 1) bad_field("radii", "radii must be >= 1");
  }
  if (clusters == 0) bad_field("clusters", "must be >= 1");
  if (sweep_clusters == 0) bad_field("sweep_clusters", "must be >= 1");
  if (sweep_repeats < 1) bad_field("sweep_repeats", "must be >= 1");
  if (!(classical_photons_per_frame >= 0.0)) bad_field("classical_photons_per_frame", "must be >= 0");
  if (photon_budgets_per_frame.empty()) bad_field("photon_budgets_per_frame", "need >= 1 budget");
  for (double b : photon_budgets_per_frame) {
    if (!(b >= 0.0)) bad_field("photon_budgets_per_frame", "budgets must be >= 0");
  }
  if (workers < 0) bad_field("workers", "must be >= 0");
  if (!(validity_floor_energy_frac > 0.0)) bad_field("validity_floor_energy_frac", "must be > 0");
  if (!(vr_floor > 0.0)) bad_field("vr_floor", "must be > 0");
  if (!(classical_ref_floor > 0.0)) bad_field("classical_ref_floor", "must be > 0");
  if (cross_section_span < 1) bad_field("cross_section_span", "must be >= 1");
  if (cross_section_span > grid_width) bad_field("cross_section_span", "wider than the grid");
  if (cross_section_row >= grid_height) bad_field("cross_section_row", "outside the grid");
  if (!(wavelength_px > 0.0)) bad_field("wavelength_px", "must be > 0");
}

int ExperimentConfig::resolved_row() const {
  if (cross_section_row >= 0) return cross_section_row;
  const int mid = (mask_y0 + mask_y1) / 2;
  return std::clamp(mid, 0, grid_height - 1);
}

int ExperimentConfig::resolved_x_start() const {
  const int start = mask_x0 - cross_section_span / 2;
  return std::clamp(start, 0, grid_width - cross_section_span);
}

std::string ExperimentConfig::canonical_json() const {
  json j{
      {"grid_width", grid_width},
      {"grid_height", grid_height},
      {"pixel_pitch", pixel_pitch},
      {"lo_waist_px", lo_waist_px},
      {"lo_center_x", resolved_center_x()},
      {"lo_center_y", resolved_center_y()},
      {"sq_waist_px", resolved_sq_waist()},
      {"mask_x0", mask_x0},
      {"mask_y0", mask_y0},
      {"mask_x1", mask_x1},
      {"mask_y1", mask_y1},
      {"mask_inverted", mask_inverted},
      {"squeezing_r", squeezing_r},
      {"quadrature", quadrature == theory::Quadrature::AntiSqueezed ? "anti_squeezed" : "squeezed"},
      {"relative_phase_rad", relative_phase_rad},
      {"lo_photons_per_frame", lo_photons_per_frame},
      {"dark_mean", dark_mean},
      {"dark_var", dark_var},
      {"frames_per_cluster", frames_per_cluster},
      {"exposure_s", exposure_s},
      {"coherence_s", coherence_s},
      {"radii", radii},
      {"clusters", clusters},
      {"sweep_clusters", sweep_clusters},
      {"sweep_repeats", sweep_repeats},
      {"classical_photons_per_frame", classical_photons_per_frame},
      {"photon_budgets_per_frame", photon_budgets_per_frame},
      {"master_seed", master_seed},
      {"workers", workers},
      {"bit_exact", bit_exact},
      {"validity_floor_energy_frac", validity_floor_energy_frac},
      {"vr_floor", vr_floor},
      {"classical_ref_floor", classical_ref_floor},
      {"subtract_dark_mean", subtract_dark_mean},
      {"mean_subtract", mean_subtract},
      {"poissonize_ports", poissonize_ports},
      {"round_counts", round_counts},
      {"cross_section_row", resolved_row()},
      {"cross_section_span", cross_section_span},
      {"far_distance_px", far_distance_px},
      {"wavelength_px", wavelength_px},
      {"dump_clusters", dump_clusters},
  };
  return j.dump();
}

std::string ExperimentConfig::config_hash() const { return io::fnv1a_hex(canonical_json()); }

SceneSetup SceneSetup::build(const ExperimentConfig& config) {
  SceneSetup s;
  s.grid = Grid(config.grid_width, config.grid_height, config.pixel_pitch);
  const double cx = config.resolved_center_x();
  const double cy = config.resolved_center_y();
  s.u2 = field::gaussian_mode(s.grid, config.lo_waist_px, cx, cy);
  s.mode_matched = config.resolved_sq_waist() == config.lo_waist_px;
  s.u1_open = s.mode_matched ? s.u2 : field::gaussian_mode(s.grid, config.resolved_sq_waist(), cx, cy);
  s.mask = field::rect_mask(s.grid, config.mask_x0, config.mask_y0, config.mask_x1, config.mask_y1,
                            config.mask_inverted);
  s.u1_probe = field::apply_mask(s.u1_open, s.mask);
  return s;
}

mc::Scene SceneSetup::reference_scene(const ExperimentConfig& config) const {
  return mc::Scene{u1_open, u2, config.squeezer(), config.lo_photons_per_frame};
}

mc::Scene SceneSetup::probe_scene(const ExperimentConfig& config) const {
  return mc::Scene{u1_probe, u2, config.squeezer(), config.lo_photons_per_frame};
}

mc::CameraParams SceneSetup::camera(const ExperimentConfig& config) const {
  mc::CameraParams cam;
  cam.grid = grid;
  cam.dark_mean = config.dark_mean;
  cam.dark_var = config.dark_var;
  cam.frames_per_cluster = config.frames_per_cluster;
  cam.exposure_s = config.exposure_s;
  cam.poissonize_ports = config.poissonize_ports;
  cam.round_counts = config.round_counts;
  return cam;
}

void RunManifest::add(const fs::path& out_dir, const fs::path& file) {
  files.push_back(fs::relative(file, out_dir).string());
}

void RunManifest::write(const fs::path& out_dir, const std::string& canonical_config) const {
  json j{
      {"command", command},
      {"config_hash", config_hash},
      {"master_seed", master_seed},
      {"wall_clock_ms", wall_clock_ms},
      {"files", files},
      {"config", json::parse(canonical_config)},
  };
  std::ofstream out(out_dir / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + out_dir.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("manifest write failed in " + out_dir.string());
}

namespace {

fs::path prepare_out_dir(const ExperimentConfig& config) {
  fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void emit_map(RunManifest& manifest, const fs::path& out_dir, const ScalarMap& map,
              const std::string& stem, const std::string& config_hash) {
  const fs::path csv = out_dir / (stem + ".csv");
  const fs::path pgm = out_dir / (stem + ".pgm");
  io::write_map_csv(map, csv);
  io::write_map_pgm16(map, pgm, config_hash);
  manifest.add(out_dir, csv);
  manifest.add(out_dir, pgm);
  manifest.add(out_dir, fs::path(pgm.string() + ".json"));
}

void emit_profile(RunManifest& manifest, const fs::path& out_dir, const CrossSection& cs,
                  const std::string& stem) {
  const fs::path csv = out_dir / (stem + ".csv");
  io::write_cross_section_csv(cs, csv);
  manifest.add(out_dir, csv);
}

/// True-object transmission profile along the configured cross-section.
CrossSection object_profile(const ExperimentConfig& config, const SceneSetup& setup) {
  CrossSection cs;
  cs.row = config.resolved_row();
  cs.x_start = config.resolved_x_start();
  cs.values.resize(config.cross_section_span);
  cs.valid.assign(config.cross_section_span, 1);
  for (int i = 0; i < config.cross_section_span; ++i) {
    cs.values[i] = setup.mask.at(cs.x_start + i, cs.row);
  }
  return cs;
}

struct QuantumMaps {
  std::vector<ScalarMap> v_ref;    // per radius
  std::vector<ScalarMap> v_probe;  // per radius
};

/// Synthesize and reduce both scenes with the fixed-block ordered reduction.
QuantumMaps estimate_quantum_maps(const ExperimentConfig& config, const SceneSetup& setup,
                                  std::uint64_t ref_seed, std::uint64_t probe_seed,
                                  RunManifest* manifest, const fs::path* out_dir) {
  std::vector<DetectionDisc> discs;
  for (int r : config.radii) discs.emplace_back(r);
  analysis::VarianceOptions options;
  options.mean_subtract = config.mean_subtract;
  options.denominator_floor =
      config.validity_floor_energy_frac * config.lo_photons_per_frame;

  const mc::CameraParams cam = setup.camera(config);
  QuantumMaps out;
  for (int side = 0; side < 2; ++side) {
    const bool is_ref = side == 0;
    const mc::SceneSampler sampler(is_ref ? setup.reference_scene(config)
                                          : setup.probe_scene(config),
                                   cam);
    const std::uint64_t seed = is_ref ? ref_seed : probe_seed;
    analysis::VarianceMapEstimator total(setup.grid, discs, options);
    util::ordered_block_reduce<analysis::VarianceMapEstimator>(
        config.clusters, kReduceBlock, config.workers,
        [&] { return std::make_unique<analysis::VarianceMapEstimator>(setup.grid, discs, options); },
        [&](analysis::VarianceMapEstimator& partial, std::size_t begin, std::size_t end) {
          for (std::size_t k = begin; k < end; ++k) {
            const mc::KineticCluster cluster = sampler.synthesize(seed, k);
            partial.add_cluster(cluster);
            if (!is_ref && manifest != nullptr && k < config.dump_clusters) {
              const fs::path path = *out_dir / ("cluster_" + std::to_string(k) + ".qsclu");
              io::write_cluster(cluster, path, config.config_hash());
            }
          }
        },
        [&](analysis::VarianceMapEstimator&& partial) { total.merge(partial); });
    for (std::size_t d = 0; d < discs.size(); ++d) {
      (is_ref ? out.v_ref : out.v_probe).push_back(total.mean_map(d));
    }
  }
  if (manifest != nullptr && config.dump_clusters > 0) {
    for (std::uint64_t k = 0; k < std::min(config.dump_clusters, config.clusters); ++k) {
      manifest->add(*out_dir, *out_dir / ("cluster_" + std::to_string(k) + ".qsclu"));
      manifest->add(*out_dir, *out_dir / ("cluster_" + std::to_string(k) + ".qsclu.json"));
    }
  }
  return out;
}

/// Mean count map over all frames of `n_clusters` classical clusters.
ScalarMap classical_mean_map(const ExperimentConfig& config, const SceneSetup& setup,
                             const ScalarMap& intensity, std::uint64_t seed,
                             std::uint64_t n_clusters) {
  const mc::CameraParams cam = setup.camera(config);
  const std::size_t n = setup.grid.size();

  struct Partial {
    std::vector<double> sum;
    std::uint64_t frames = 0;
  };
  Partial total{std::vector<double>(n, 0.0), 0};
  util::ordered_block_reduce<Partial>(
      n_clusters, kReduceBlock, config.workers,
      [&] { return std::make_unique<Partial>(Partial{std::vector<double>(n, 0.0), 0}); },
      [&](Partial& partial, std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          const mc::FrameStack frames = mc::synthesize_classical_cluster(intensity, cam, seed, k);
          for (int f = 0; f < frames.frames; ++f) {
            const double* src = frames.frame(f);
            for (std::size_t i = 0; i < n; ++i) partial.sum[i] += src[i];
          }
          partial.frames += frames.frames;
        }
      },
      [&](Partial&& partial) {
        for (std::size_t i = 0; i < n; ++i) total.sum[i] += partial.sum[i];
        total.frames += partial.frames;
      });

  ScalarMap mean(setup.grid, MapRole::Intensity);
  const double inv = 1.0 / static_cast<double>(total.frames);
  for (std::size_t i = 0; i < n; ++i) mean.values[i] = total.sum[i] * inv;
  if (config.subtract_dark_mean && config.dark_mean != 0.0) {
    for (auto& v : mean.values) v -= config.dark_mean;
  }
  return mean;
}

std::string radius_tag(int r) { return "R" + std::to_string(r); }

}  // namespace

RunManifest run_theory(const ExperimentConfig& config) {
  Stopwatch watch;
  const fs::path out_dir = prepare_out_dir(config);
  const SceneSetup setup = SceneSetup::build(config);
  const theory::SqueezerParams sq = config.squeezer();
  const std::string hash = config.config_hash();

  RunManifest manifest;
  manifest.command = "theory";
  manifest.config_hash = hash;
  manifest.master_seed = config.master_seed;

  const field::Mask open_mask(setup.grid, 1.0);
  const field::ComplexField u1_scrambled =
      field::propagate(setup.u1_probe, config.far_distance_px, config.wavelength_px);

  emit_map(manifest, out_dir, theory::pixel_variance_map(setup.u1_open, sq), "theory_vref_pixel",
           hash);
  emit_map(manifest, out_dir, theory::pixel_variance_map(setup.u1_probe, sq), "theory_vprobe_pixel",
           hash);

  io::write_field(setup.u2, out_dir / "lo_mode.qsfld");
  manifest.add(out_dir, out_dir / "lo_mode.qsfld");
  io::write_field(setup.u1_probe, out_dir / "probe_mode.qsfld");
  manifest.add(out_dir, out_dir / "probe_mode.qsfld");
  io::write_field_csv(setup.u1_probe, out_dir / "probe_mode_re.csv", out_dir / "probe_mode_im.csv");
  manifest.add(out_dir, out_dir / "probe_mode_re.csv");
  manifest.add(out_dir, out_dir / "probe_mode_im.csv");

  const CrossSection t_obj = object_profile(config, setup);
  emit_profile(manifest, out_dir, t_obj, "object_profile");

  for (int radius : config.radii) {
    const DetectionDisc disc(radius);
    ScalarMap v_ref, v_probe;
    if (setup.mode_matched) {
      v_ref = theory::binned_variance_mode_matched(open_mask, setup.u2, sq, disc,
                                                   config.validity_floor_energy_frac);
      v_probe = theory::binned_variance_mode_matched(setup.mask, setup.u2, sq, disc,
                                                     config.validity_floor_energy_frac);
    } else {
      v_ref = theory::binned_variance_general(setup.u1_open, setup.u2, sq, disc,
                                              config.validity_floor_energy_frac);
      v_probe = theory::binned_variance_general(setup.u1_probe, setup.u2, sq, disc,
                                                config.validity_floor_energy_frac);
    }
    const ScalarMap v_unmatched = theory::binned_variance_general(
        u1_scrambled, setup.u2, sq, disc, config.validity_floor_energy_frac);
    const ScalarMap t_ideal =
        theory::ideal_transmission_map(setup.mask, setup.u2, sq, disc, config.vr_floor);

    const std::string tag = radius_tag(radius);
    emit_map(manifest, out_dir, v_ref, "theory_vref_" + tag, hash);
    emit_map(manifest, out_dir, v_probe, "theory_vprobe_" + tag, hash);
    emit_map(manifest, out_dir, analysis::to_decibels(v_ref), "theory_vref_db_" + tag, hash);
    emit_map(manifest, out_dir, analysis::to_decibels(v_probe), "theory_vprobe_db_" + tag, hash);
    emit_map(manifest, out_dir, v_unmatched, "theory_vunmatched_" + tag, hash);
    emit_map(manifest, out_dir, t_ideal, "theory_tideal_" + tag, hash);
    emit_profile(manifest, out_dir,
                 analysis::cross_section(t_ideal, config.resolved_row(), config.resolved_x_start(),
                                         config.cross_section_span),
                 "theory_tideal_profile_" + tag);
  }

  manifest.wall_clock_ms = watch.elapsed_ms();
  manifest.write(out_dir, config.canonical_json());
  return manifest;
}

RunManifest run_simulate(const ExperimentConfig& config) {
  Stopwatch watch;
  const fs::path out_dir = prepare_out_dir(config);
  const SceneSetup setup = SceneSetup::build(config);
  const std::string hash = config.config_hash();

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.config_hash = hash;
  manifest.master_seed = config.master_seed;

  const std::uint64_t ref_seed = util::derive_stream_seed(config.master_seed, 1, 0);
  const std::uint64_t probe_seed = util::derive_stream_seed(config.master_seed, 2, 0);
  QuantumMaps maps =
      estimate_quantum_maps(config, setup, ref_seed, probe_seed, &manifest, &out_dir);

  const CrossSection t_obj = object_profile(config, setup);
  emit_profile(manifest, out_dir, t_obj, "object_profile");

  for (std::size_t d = 0; d < config.radii.size(); ++d) {
    const std::string tag = radius_tag(config.radii[d]);
    emit_map(manifest, out_dir, maps.v_ref[d], "sim_vref_" + tag, hash);
    emit_map(manifest, out_dir, maps.v_probe[d], "sim_vprobe_" + tag, hash);
    emit_map(manifest, out_dir, analysis::to_decibels(maps.v_ref[d]), "sim_vref_db_" + tag, hash);
    emit_map(manifest, out_dir, analysis::to_decibels(maps.v_probe[d]), "sim_vprobe_db_" + tag,
             hash);
    const ScalarMap t_q =
        analysis::transmission_quantum(maps.v_probe[d], maps.v_ref[d], config.vr_floor);
    emit_map(manifest, out_dir, t_q, "sim_tq_" + tag, hash);
    emit_profile(manifest, out_dir,
                 analysis::cross_section(t_q, config.resolved_row(), config.resolved_x_start(),
                                         config.cross_section_span),
                 "sim_tq_profile_" + tag);
  }

  manifest.wall_clock_ms = watch.elapsed_ms();
  manifest.write(out_dir, config.canonical_json());
  return manifest;
}

RunManifest run_classical(const ExperimentConfig& config) {
  Stopwatch watch;
  const fs::path out_dir = prepare_out_dir(config);
  const SceneSetup setup = SceneSetup::build(config);
  const std::string hash = config.config_hash();

  RunManifest manifest;
  manifest.command = "classical";
  manifest.config_hash = hash;
  manifest.master_seed = config.master_seed;

  ScalarMap intensity_ref(setup.grid, MapRole::Intensity);
  ScalarMap intensity_probe(setup.grid, MapRole::Intensity);
  for (std::size_t i = 0; i < setup.grid.size(); ++i) {
    const double base = config.classical_photons_per_frame * std::norm(setup.u2.amp[i]);
    intensity_ref.values[i] = base;
    intensity_probe.values[i] = base * setup.mask.t[i];
  }

  const std::uint64_t ref_seed = util::derive_stream_seed(config.master_seed, 3, 0);
  const std::uint64_t probe_seed = util::derive_stream_seed(config.master_seed, 4, 0);
  const ScalarMap mean_ref =
      classical_mean_map(config, setup, intensity_ref, ref_seed, config.clusters);
  const ScalarMap mean_probe =
      classical_mean_map(config, setup, intensity_probe, probe_seed, config.clusters);

  const CrossSection t_obj = object_profile(config, setup);
  emit_profile(manifest, out_dir, t_obj, "object_profile");

  for (int radius : config.radii) {
    const DetectionDisc disc(radius);
    const ScalarMap binned_ref = analysis::bin_counts(mean_ref, disc);
    const ScalarMap binned_probe = analysis::bin_counts(mean_probe, disc);
    const ScalarMap t_t = analysis::transmission_traditional(binned_probe, binned_ref,
                                                             config.classical_ref_floor);
    const std::string tag = radius_tag(radius);
    emit_map(manifest, out_dir, binned_ref, "cls_nref_" + tag, hash);
    emit_map(manifest, out_dir, binned_probe, "cls_nprobe_" + tag, hash);
    emit_map(manifest, out_dir, t_t, "cls_tt_" + tag, hash);
    emit_profile(manifest, out_dir,
                 analysis::cross_section(t_t, config.resolved_row(), config.resolved_x_start(),
                                         config.cross_section_span),
                 "cls_tt_profile_" + tag);
  }

  manifest.wall_clock_ms = watch.elapsed_ms();
  manifest.write(out_dir, config.canonical_json());
  return manifest;
}

namespace {

struct SweepRow {
  std::string method;
  double budget_per_frame = 0.0;
  double total_photons = 0.0;
  bool has_budget = true;
  int radius = 0;
  double similarity_mean = 0.0;
  double similarity_stderr = 0.0;
  int repeats = 0;
};

/// Mean and standard error over the repeats that produced a defined
/// similarity; NaN when none did.
void aggregate_repeats(const std::vector<double>& sims, SweepRow& row) {
  double mean = 0.0;
  int n = 0;
  for (double v : sims) {
    if (!std::isnan(v)) {
      mean += v;
      ++n;
    }
  }
  if (n == 0) {
    row.similarity_mean = std::numeric_limits<double>::quiet_NaN();
    row.similarity_stderr = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  mean /= n;
  double var = 0.0;
  for (double v : sims) {
    if (!std::isnan(v)) var += (v - mean) * (v - mean);
  }
  row.similarity_mean = mean;
  row.similarity_stderr = n > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
}

std::string format_cell(double v) {
  std::ostringstream ss;
  ss.precision(12);
  ss << v;
  return ss.str();
}

/// Similarity, or NaN when the valid overlap is empty or degenerate (sparse
/// radius-1 profiles at small cluster counts can leave nothing to compare).
double safe_similarity(const CrossSection& t_exp, const CrossSection& t_obj) {
  try {
    return analysis::similarity(t_exp, t_obj);
  } catch (const ParameterError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/// Quantum similarity per radius for one repeat, estimated on the
/// cross-section band only.
std::vector<double> quantum_sweep_similarities(const ExperimentConfig& config,
                                               const SceneSetup& setup, const CrossSection& t_obj,
                                               std::uint64_t repeat_seed) {
  const mc::CameraParams cam = setup.camera(config);
  analysis::VarianceOptions options;
  options.mean_subtract = config.mean_subtract;
  options.denominator_floor =
      config.validity_floor_energy_frac * config.lo_photons_per_frame;

  std::vector<analysis::VariancePointEstimator::Point> points;
  const int row = config.resolved_row();
  const int x_start = config.resolved_x_start();
  for (int i = 0; i < config.cross_section_span; ++i) points.push_back({x_start + i, row});

  // estimators indexed [side][radius]
  std::vector<std::vector<analysis::VariancePointEstimator>> est(2);
  for (int side = 0; side < 2; ++side) {
    for (int r : config.radii) {
      est[side].emplace_back(setup.grid, DetectionDisc(r), points, options);
    }
  }

  for (int side = 0; side < 2; ++side) {
    const bool is_ref = side == 0;
    const mc::SceneSampler sampler(is_ref ? setup.reference_scene(config)
                                          : setup.probe_scene(config),
                                   cam);
    const std::uint64_t seed = util::derive_stream_seed(repeat_seed, is_ref ? 10 : 11, 0);
    struct Partial {
      std::vector<analysis::VariancePointEstimator> est;
    };
    util::ordered_block_reduce<Partial>(
        config.sweep_clusters, kReduceBlock, config.workers,
        [&] {
          auto p = std::make_unique<Partial>();
          for (int r : config.radii) {
            p->est.emplace_back(setup.grid, DetectionDisc(r), points, options);
          }
          return p;
        },
        [&](Partial& partial, std::size_t begin, std::size_t end) {
          for (std::size_t k = begin; k < end; ++k) {
            const mc::KineticCluster cluster = sampler.synthesize(seed, k);
            for (auto& e : partial.est) e.add_cluster(cluster);
          }
        },
        [&](Partial&& partial) {
          for (std::size_t d = 0; d < est[side].size(); ++d) est[side][d].merge(partial.est[d]);
        });
  }

  std::vector<double> sims;
  for (std::size_t d = 0; d < config.radii.size(); ++d) {
    CrossSection profile;
    profile.row = row;
    profile.x_start = x_start;
    profile.values.resize(points.size());
    profile.valid.assign(points.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (est[0][d].count(i) == 0 || est[1][d].count(i) == 0) continue;
      const double v_ref = est[0][d].mean(i);
      const double v_probe = est[1][d].mean(i);
      if (std::abs(v_ref - 1.0) < config.vr_floor) continue;
      profile.values[i] = (v_probe - 1.0) / (v_ref - 1.0);
      profile.valid[i] = 1;
    }
    sims.push_back(safe_similarity(profile, t_obj));
  }
  return sims;
}

std::vector<double> classical_sweep_similarities(const ExperimentConfig& config,
                                                 const SceneSetup& setup,
                                                 const CrossSection& t_obj, double budget,
                                                 std::uint64_t repeat_seed) {
  ScalarMap intensity_ref(setup.grid, MapRole::Intensity);
  ScalarMap intensity_probe(setup.grid, MapRole::Intensity);
  for (std::size_t i = 0; i < setup.grid.size(); ++i) {
    const double base = budget * std::norm(setup.u2.amp[i]);
    intensity_ref.values[i] = base;
    intensity_probe.values[i] = base * setup.mask.t[i];
  }
  const ScalarMap mean_ref = classical_mean_map(
      config, setup, intensity_ref, util::derive_stream_seed(repeat_seed, 20, 0),
      config.sweep_clusters);
  const ScalarMap mean_probe = classical_mean_map(
      config, setup, intensity_probe, util::derive_stream_seed(repeat_seed, 21, 0),
      config.sweep_clusters);

  std::vector<double> sims;
  for (int radius : config.radii) {
    const DetectionDisc disc(radius);
    const ScalarMap t_t =
        analysis::transmission_traditional(analysis::bin_counts(mean_probe, disc),
                                           analysis::bin_counts(mean_ref, disc),
                                           config.classical_ref_floor);
    sims.push_back(safe_similarity(
        analysis::cross_section(t_t, config.resolved_row(), config.resolved_x_start(),
                                config.cross_section_span),
        t_obj));
  }
  return sims;
}

}  // namespace

RunManifest run_sweep(const ExperimentConfig& config) {
  Stopwatch watch;
  const fs::path out_dir = prepare_out_dir(config);
  const SceneSetup setup = SceneSetup::build(config);
  const theory::SqueezerParams sq = config.squeezer();
  const std::string hash = config.config_hash();

  RunManifest manifest;
  manifest.command = "sweep";
  manifest.config_hash = hash;
  manifest.master_seed = config.master_seed;

  const CrossSection t_obj = object_profile(config, setup);
  emit_profile(manifest, out_dir, t_obj, "object_profile");

  const double frames = static_cast<double>(config.frames_per_cluster);
  const double total_frames = frames * static_cast<double>(config.sweep_clusters);
  std::vector<SweepRow> rows;

  // Quantum method: one physical per-frame budget set by the squeezer.
  {
    const double per_frame =
        theory::photon_budget(sq.mean_photons(), config.exposure_s, config.coherence_s, 1);
    std::vector<std::vector<double>> sims(config.radii.size());
    for (int rep = 0; rep < config.sweep_repeats; ++rep) {
      const std::uint64_t repeat_seed =
          util::derive_stream_seed(config.master_seed, 100, static_cast<std::uint64_t>(rep));
      const auto s = quantum_sweep_similarities(config, setup, t_obj, repeat_seed);
      for (std::size_t d = 0; d < s.size(); ++d) sims[d].push_back(s[d]);
    }
    for (std::size_t d = 0; d < config.radii.size(); ++d) {
      SweepRow row;
      row.method = "quantum";
      row.budget_per_frame = per_frame;
      row.total_photons = per_frame * total_frames;
      row.radius = config.radii[d];
      row.repeats = config.sweep_repeats;
      aggregate_repeats(sims[d], row);
      rows.push_back(row);
    }
  }

  // Classical method: one curve per photon budget.
  for (std::size_t b = 0; b < config.photon_budgets_per_frame.size(); ++b) {
    const double budget = config.photon_budgets_per_frame[b];
    std::vector<std::vector<double>> sims(config.radii.size());
    for (int rep = 0; rep < config.sweep_repeats; ++rep) {
      const std::uint64_t repeat_seed = util::derive_stream_seed(
          config.master_seed, 200 + static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(rep));
      const auto s = classical_sweep_similarities(config, setup, t_obj, budget, repeat_seed);
      for (std::size_t d = 0; d < s.size(); ++d) sims[d].push_back(s[d]);
    }
    for (std::size_t d = 0; d < config.radii.size(); ++d) {
      SweepRow row;
      row.method = "classical";
      row.budget_per_frame = budget;
      row.total_photons = budget * total_frames;
      row.radius = config.radii[d];
      row.repeats = config.sweep_repeats;
      aggregate_repeats(sims[d], row);
      rows.push_back(row);
    }
  }

  // Noiseless ceiling: the ideal reconstruction sampled with the same discs.
  for (std::size_t d = 0; d < config.radii.size(); ++d) {
    const DetectionDisc disc(config.radii[d]);
    const ScalarMap t_ideal =
        theory::ideal_transmission_map(setup.mask, setup.u2, sq, disc, config.vr_floor);
    SweepRow row;
    row.method = "ceiling";
    row.has_budget = false;
    row.radius = config.radii[d];
    row.repeats = 0;
    row.similarity_mean = safe_similarity(
        analysis::cross_section(t_ideal, config.resolved_row(), config.resolved_x_start(),
                                config.cross_section_span),
        t_obj);
    rows.push_back(row);
  }

  const fs::path csv_path = out_dir / "similarity_sweep.csv";
  {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + csv_path.string());
    out << "method,budget_per_frame,total_photons,radius,similarity,stderr,repeats\n";
    for (const auto& row : rows) {
      out << row.method << ',';
      if (row.has_budget) {
        out << format_cell(row.budget_per_frame) << ',' << format_cell(row.total_photons);
      } else {
        out << ',';
      }
      out << ',' << row.radius << ',' << format_cell(row.similarity_mean) << ','
          << format_cell(row.similarity_stderr) << ',' << row.repeats << '\n';
    }
    if (!out) throw IoError("write failed: " + csv_path.string());
  }
  manifest.add(out_dir, csv_path);

  // compact table variant keyed by radius and total photons
  const fs::path table_path = out_dir / "similarity_table.csv";
  {
    std::ofstream out(table_path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + table_path.string());
    out << "radius,photons,similarity\n";
    for (const auto& row : rows) {
      out << row.radius << ',';
      if (row.has_budget) out << format_cell(row.total_photons);
      out << ',' << format_cell(row.similarity_mean) << '\n';
    }
    if (!out) throw IoError("write failed: " + table_path.string());
  }
  manifest.add(out_dir, table_path);

  manifest.wall_clock_ms = watch.elapsed_ms();
  manifest.write(out_dir, config.canonical_json());
  return manifest;
}

}  // namespace qshadow::runner
