#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qshadow/field.hpp"
#include "qshadow/rng.hpp"
#include "qshadow/theory.hpp"
#include "qshadow/types.hpp"

namespace qshadow::mc {

using field::ComplexField;
using theory::SqueezerParams;

struct CameraParams {
  Grid grid;
  double dark_mean = 0.0;       // counts / pixel / frame
  double dark_var = 0.0;        // counts^2 / pixel / frame
  int frames_per_cluster = 4;
  double exposure_s = 0.0;      // metadata only
  /// Replace the deterministic per-pixel LO intensity in the port sum with a
  /// Poisson draw (sensitivity knob for finite LO photon statistics); the
  /// difference signal keeps its exact covariance.
  bool poissonize_ports = false;
  bool round_counts = false;

  void validate() const {
    if (!(dark_var >= 0.0)) throw ParameterError("CameraParams: dark_var must be >= 0");
    if (frames_per_cluster < 2) {
      throw ParameterError("CameraParams: frames_per_cluster must be >= 2");
    }
  }
};

/// Frames of one detector port, stacked row-major per frame.
struct FrameStack {
  Grid grid;
  int frames = 0;
  std::vector<double> data;

  FrameStack() = default;
  FrameStack(const Grid& g, int f) : grid(g), frames(f), data(g.size() * f, 0.0) {}

  double* frame(int f) { return data.data() + static_cast<std::size_t>(f) * grid.size(); }
  const double* frame(int f) const { return data.data() + static_cast<std::size_t>(f) * grid.size(); }
};

struct SeedLineage {
  std::uint64_t master_seed = 0;
  std::uint64_t cluster_index = 0;
};

/// One acquisition unit: a burst of frames on both homodyne output ports.
struct KineticCluster {
  FrameStack port1;
  FrameStack port2;
  SeedLineage lineage;
};

/// Everything the quantum sampler needs: probe mode after the object (u1),
/// LO mode (u2), squeezer settings and LO strength.
struct Scene {
  ComplexField u1;
  ComplexField u2;
  SqueezerParams sq;
  double lo_photons_per_frame = 0.0;

  void validate() const;
};

/// Per-scene precomputation for cluster synthesis. The squeezed mode only
/// touches the two directions {f_a, f_b} of the per-pixel noise space, so a
/// frame is sampled as i.i.d. unit normals with the span of {f_a, f_b}
/// re-drawn under the 2x2 squeezed covariance; cost stays linear in pixels.
/// Immutable after construction and safe to share across threads.
class SceneSampler {
 public:
  SceneSampler(Scene scene, CameraParams cam);

  const Scene& scene() const { return scene_; }
  const CameraParams& camera() const { return cam_; }

  KineticCluster synthesize(std::uint64_t master_seed, std::uint64_t cluster_index) const;

  /// Ensemble covariance factors along the replaced directions, in the
  /// orthonormal basis (diagnostics and tests).
  int span_rank() const { return rank_; }
  const std::vector<double>& basis_vector(int i) const { return q_[i]; }
  std::array<double, 4> span_covariance() const;  // row-major 2x2 (rank-padded)

 private:
  void sample_frame(util::Rng& rng, double* port1, double* port2) const;

  Scene scene_;
  CameraParams cam_;
  std::vector<double> lo_amp_;        // sqrt(N_LO) |u2|
  std::vector<double> lo_intensity_;  // N_LO |u2|^2
  std::array<std::vector<double>, 2> q_;
  int rank_ = 0;
  double chol_[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double cov_[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  bool dark_enabled_ = false;
};

/// Paired homodyne port frames whose ensemble statistics follow the binned
/// variance law of the squeezed scene.
KineticCluster synthesize_quantum_cluster(const Scene& scene, const CameraParams& cam,
                                          std::uint64_t master_seed, std::uint64_t cluster_index);

/// Direct-detection frames: Poisson counts of `intensity` photons per pixel
/// plus additive Gaussian dark noise.
FrameStack synthesize_classical_cluster(const ScalarMap& intensity, const CameraParams& cam,
                                        std::uint64_t master_seed, std::uint64_t cluster_index);

using util::derive_stream_seed;

}  // namespace qshadow::mc
