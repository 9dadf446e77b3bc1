#include "qshadow/montecarlo.hpp"

#include <cmath>

#include "qshadow/log.hpp"

namespace qshadow::mc {

namespace {
constexpr double kSpanTol = 1e-12;
}

void Scene::validate() const {
  require_same_grid(u1.grid, u2.grid, "Scene");
  if (!(lo_photons_per_frame >= 0.0)) {
    throw ParameterError("Scene: lo_photons_per_frame must be >= 0");
  }
  if (!u2.is_normalized()) throw ParameterError("Scene: LO mode must be normalized");
  if (u1.energy() > 1.0 + 1e-9) {
    throw PhysicalityError("Scene: probe mode energy exceeds 1");
  }
}

SceneSampler::SceneSampler(Scene scene, CameraParams cam)
    : scene_(std::move(scene)), cam_(std::move(cam)) {
  scene_.validate();
  cam_.validate();
  require_same_grid(scene_.u1.grid, cam_.grid, "SceneSampler");
  dark_enabled_ = cam_.dark_mean != 0.0 || cam_.dark_var > 0.0;

  const std::size_t n = scene_.u1.grid.size();
  const double n_lo = scene_.lo_photons_per_frame;
  lo_amp_.resize(n);
  lo_intensity_.resize(n);

  const double phase = scene_.sq.effective_phase();
  const field::Complex rot{std::cos(phase), std::sin(phase)};
  std::vector<double> f_a(n, 0.0), f_b(n, 0.0);
  double peak_intensity = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::abs(scene_.u2.amp[i]);
    lo_intensity_[i] = n_lo * mag * mag;
    lo_amp_[i] = std::sqrt(n_lo) * mag;
    peak_intensity = std::max(peak_intensity, lo_intensity_[i]);
    if (mag > 0.0) {
      const field::Complex w = std::conj(scene_.u2.amp[i]) * scene_.u1.amp[i] * rot;
      f_a[i] = w.real() / mag;
      f_b[i] = w.imag() / mag;
    }
  }
  if (n_lo > 0.0 && peak_intensity < 10.0) {
    util::log_warn("LO below ~10 photons per pixel at the beam peak; the Gaussian "
                   "shot-noise model becomes approximate");
  }

  // Gram-Schmidt over {f_a, f_b}; directions below kSpanTol are dropped.
  auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  };
  const double norm_a = std::sqrt(dot(f_a, f_a));
  if (norm_a >= kSpanTol) {
    q_[0] = f_a;
    for (auto& v : q_[0]) v /= norm_a;
    rank_ = 1;
  }
  std::vector<double> g = f_b;
  if (rank_ == 1) {
    const double proj = dot(q_[0], f_b);
    for (std::size_t i = 0; i < n; ++i) g[i] -= proj * q_[0][i];
  }
  const double norm_g = std::sqrt(dot(g, g));
  if (std::sqrt(dot(f_b, f_b)) >= kSpanTol && norm_g >= kSpanTol) {
    q_[rank_] = g;
    for (auto& v : q_[rank_]) v /= norm_g;
    ++rank_;
  }

  if (rank_ > 0) {
    // Covariance of the replaced span: I + (e^{2r}-1) a a^T + (e^{-2r}-1) b b^T
    // with a, b the coordinates of f_a, f_b in the q basis.
    double a_c[2] = {0.0, 0.0}, b_c[2] = {0.0, 0.0};
    for (int i = 0; i < rank_; ++i) {
      a_c[i] = dot(q_[i], f_a);
      b_c[i] = dot(q_[i], f_b);
    }
    const double ka = std::exp(2.0 * scene_.sq.r) - 1.0;
    const double kb = std::exp(-2.0 * scene_.sq.r) - 1.0;
    for (int i = 0; i < rank_; ++i) {
      for (int j = 0; j < rank_; ++j) {
        cov_[i][j] = (i == j ? 1.0 : 0.0) + ka * a_c[i] * a_c[j] + kb * b_c[i] * b_c[j];
      }
    }
    // Cholesky; positive definiteness is guaranteed while sum|u1|^2 <= 1.
    chol_[0][0] = std::sqrt(cov_[0][0]);
    if (rank_ == 2) {
      chol_[1][0] = cov_[1][0] / chol_[0][0];
      const double d = cov_[1][1] - chol_[1][0] * chol_[1][0];
      if (!(d > 0.0)) throw PhysicalityError("SceneSampler: span covariance not positive definite");
      chol_[1][1] = std::sqrt(d);
    }
  }
}

std::array<double, 4> SceneSampler::span_covariance() const {
  return {cov_[0][0], cov_[0][1], cov_[1][0], cov_[1][1]};
}

void SceneSampler::sample_frame(util::Rng& rng, double* port1, double* port2) const {
  const std::size_t n = lo_amp_.size();
  std::vector<double> eta(n);
  rng.fill_normal(eta.data(), n);

  if (rank_ > 0) {
    double p[2] = {0.0, 0.0};
    for (int i = 0; i < rank_; ++i) {
      const double* q = q_[i].data();
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q[k] * eta[k];
      p[i] = s;
    }
    // Re-draw the span component under the squeezed covariance. Reusing the
    // projections through the Cholesky factor keeps the map linear in eta.
    double zeta[2] = {0.0, 0.0};
    zeta[0] = chol_[0][0] * p[0];
    if (rank_ == 2) zeta[1] = chol_[1][0] * p[0] + chol_[1][1] * p[1];
    for (int i = 0; i < rank_; ++i) {
      const double delta = zeta[i] - p[i];
      const double* q = q_[i].data();
      for (std::size_t k = 0; k < n; ++k) eta[k] += delta * q[k];
    }
  }

  if (cam_.poissonize_ports) {
    // Poisson statistics on the total port sum; the difference keeps its
    // exact covariance (independent per-port Poisson draws would stack a
    // second shot-noise floor on top of the one already carried by eta).
    for (std::size_t k = 0; k < n; ++k) {
      const double d = lo_amp_[k] * eta[k];
      const double total = static_cast<double>(rng.poisson(lo_intensity_[k]));
      port1[k] = 0.5 * (total + d);
      port2[k] = 0.5 * (total - d);
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      const double d = lo_amp_[k] * eta[k];
      const double i_lo = lo_intensity_[k];
      port1[k] = 0.5 * (i_lo + d);
      port2[k] = 0.5 * (i_lo - d);
    }
  }
  if (dark_enabled_) {
    const double sigma = std::sqrt(cam_.dark_var);
    for (std::size_t k = 0; k < n; ++k) port1[k] += cam_.dark_mean + sigma * rng.normal();
    for (std::size_t k = 0; k < n; ++k) port2[k] += cam_.dark_mean + sigma * rng.normal();
  }
  if (cam_.round_counts) {
    for (std::size_t k = 0; k < n; ++k) port1[k] = std::nearbyint(port1[k]);
    for (std::size_t k = 0; k < n; ++k) port2[k] = std::nearbyint(port2[k]);
  }
}

KineticCluster SceneSampler::synthesize(std::uint64_t master_seed,
                                        std::uint64_t cluster_index) const {
  KineticCluster out;
  out.port1 = FrameStack(cam_.grid, cam_.frames_per_cluster);
  out.port2 = FrameStack(cam_.grid, cam_.frames_per_cluster);
  out.lineage = {master_seed, cluster_index};
  for (int f = 0; f < cam_.frames_per_cluster; ++f) {
    util::Rng rng(util::derive_stream_seed(master_seed, cluster_index, static_cast<std::uint64_t>(f)));
    sample_frame(rng, out.port1.frame(f), out.port2.frame(f));
  }
  return out;
}

KineticCluster synthesize_quantum_cluster(const Scene& scene, const CameraParams& cam,
                                          std::uint64_t master_seed, std::uint64_t cluster_index) {
  SceneSampler sampler(scene, cam);
  return sampler.synthesize(master_seed, cluster_index);
}

FrameStack synthesize_classical_cluster(const ScalarMap& intensity, const CameraParams& cam,
                                        std::uint64_t master_seed, std::uint64_t cluster_index) {
  cam.validate();
  require_same_grid(intensity.grid, cam.grid, "synthesize_classical_cluster");
  for (double v : intensity.values) {
    if (!(v >= 0.0)) throw ParameterError("synthesize_classical_cluster: negative intensity");
  }
  const std::size_t n = intensity.grid.size();
  const bool dark = cam.dark_mean != 0.0 || cam.dark_var > 0.0;
  const double sigma = std::sqrt(cam.dark_var);

  FrameStack out(cam.grid, cam.frames_per_cluster);
  for (int f = 0; f < cam.frames_per_cluster; ++f) {
    util::Rng rng(util::derive_stream_seed(master_seed, cluster_index, static_cast<std::uint64_t>(f)));
    double* frame = out.frame(f);
    for (std::size_t k = 0; k < n; ++k) {
      frame[k] = static_cast<double>(rng.poisson(intensity.values[k]));
    }
    if (dark) {
      for (std::size_t k = 0; k < n; ++k) frame[k] += cam.dark_mean + sigma * rng.normal();
    }
    if (cam.round_counts) {
      for (std::size_t k = 0; k < n; ++k) frame[k] = std::nearbyint(frame[k]);
    }
  }
  return out;
}

}  // namespace qshadow::mc
