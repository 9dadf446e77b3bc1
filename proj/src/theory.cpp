#include "qshadow/theory.hpp"

#include <cmath>
#include <numbers>

#include "qshadow/binning.hpp"

namespace qshadow::theory {

SqueezerParams SqueezerParams::from_db(double db, Quadrature q, double phase) {
  if (!(db >= 0.0)) throw ParameterError("SqueezerParams::from_db: dB level must be >= 0");
  return SqueezerParams(db * std::numbers::ln10 / 20.0, q, phase);
}

double SqueezerParams::variance_factor() const {
  return quadrature == Quadrature::AntiSqueezed ? std::exp(2.0 * r) : std::exp(-2.0 * r);
}

double SqueezerParams::effective_phase() const {
  return quadrature == Quadrature::AntiSqueezed ? phase : phase + std::numbers::pi / 2.0;
}

double SqueezerParams::mean_photons() const {
  const double s = std::sinh(r);
  return s * s;
}

ScalarMap pixel_variance_map(const ComplexField& u1, const SqueezerParams& sq) {
  if (u1.energy() > 1.0 + 1e-9) throw PhysicalityError("pixel_variance_map: mode energy > 1");
  const double excess = sq.variance_factor() - 1.0;
  ScalarMap v(u1.grid, MapRole::Variance);
  for (std::size_t i = 0; i < u1.amp.size(); ++i) v.values[i] = 1.0 + excess * std::norm(u1.amp[i]);
  return v;
}

ScalarMap binned_variance_general(const ComplexField& u1, const ComplexField& u2,
                                  const SqueezerParams& sq, const DetectionDisc& disc,
                                  double floor_frac) {
  require_same_grid(u1.grid, u2.grid, "binned_variance_general");
  const Grid& g = u1.grid;
  const std::size_t n = g.size();

  const double phase = sq.effective_phase();
  const field::Complex rot{std::cos(phase), std::sin(phase)};
  std::vector<double> w_re(n), w_im(n), lo_int(n);
  double total_energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const field::Complex w = std::conj(u2.amp[i]) * u1.amp[i] * rot;
    w_re[i] = w.real();
    w_im[i] = w.imag();
    lo_int[i] = std::norm(u2.amp[i]);
    total_energy += lo_int[i];
  }

  analysis::DiscBinner binner(g, disc);
  std::vector<double> z_re(n), z_im(n), energy(n);
  binner.bin(w_re.data(), z_re.data());
  binner.bin(w_im.data(), z_im.data());
  binner.bin(lo_int.data(), energy.data());

  const double s = std::sinh(sq.r);
  const double c = std::cosh(sq.r);
  const double floor = floor_frac * total_energy;
  ScalarMap v(g, MapRole::Variance, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(energy[i] > floor)) {
      v.valid[i] = 0;
      v.values[i] = 0.0;
      continue;
    }
    const double zr = z_re[i];
    const double zi = z_im[i];
    const double abs2 = zr * zr + zi * zi;
    const double re_z2 = zr * zr - zi * zi;
    v.values[i] = 1.0 + (2.0 * s * s * abs2 + 2.0 * s * c * re_z2) / energy[i];
  }
  return v;
}

ScalarMap binned_variance_mode_matched(const Mask& mask, const ComplexField& u2,
                                       const SqueezerParams& sq, const DetectionDisc& disc,
                                       double floor_frac) {
  require_same_grid(mask.grid, u2.grid, "binned_variance_mode_matched");
  const Grid& g = u2.grid;
  const std::size_t n = g.size();

  std::vector<double> lo_int(n), transmitted(n);
  double total_energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lo_int[i] = std::norm(u2.amp[i]);
    transmitted[i] = mask.t[i] * lo_int[i];
    total_energy += lo_int[i];
  }

  analysis::DiscBinner binner(g, disc);
  std::vector<double> energy(n), overlap(n);
  binner.bin(lo_int.data(), energy.data());
  binner.bin(transmitted.data(), overlap.data());

  const double excess = sq.variance_factor() - 1.0;
  const double floor = floor_frac * total_energy;
  ScalarMap v(g, MapRole::Variance, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(energy[i] > floor)) {
      v.valid[i] = 0;
      v.values[i] = 0.0;
      continue;
    }
    v.values[i] = 1.0 + excess * overlap[i] * overlap[i] / energy[i];
  }
  return v;
}

ScalarMap expected_variance(const ScalarMap& t_map, const ScalarMap& overlap_sq,
                            const SqueezerParams& sq) {
  require_same_grid(t_map.grid, overlap_sq.grid, "expected_variance");
  const double excess = sq.variance_factor() - 1.0;
  ScalarMap v(t_map.grid, MapRole::Variance, 1.0);
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (t_map.valid[i] == 0 || overlap_sq.valid[i] == 0) {
      v.valid[i] = 0;
      v.values[i] = 0.0;
      continue;
    }
    const double t = t_map.values[i];
    const double o2 = overlap_sq.values[i];
    if (t < 0.0 || t > 1.0) throw ParameterError("expected_variance: T outside [0,1]");
    if (o2 < 0.0 || o2 > 1.0) throw ParameterError("expected_variance: |O|^2 outside [0,1]");
    v.values[i] = 1.0 + excess * o2 * t;
  }
  return v;
}

ScalarMap ideal_transmission_map(const Mask& mask, const ComplexField& u2,
                                 const SqueezerParams& sq, const DetectionDisc& disc,
                                 double vr_floor) {
  require_same_grid(mask.grid, u2.grid, "ideal_transmission_map");
  if (!(vr_floor > 0.0)) throw ParameterError("ideal_transmission_map: floor must be > 0");
  const Grid& g = u2.grid;
  const std::size_t n = g.size();

  std::vector<double> lo_int(n), transmitted(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo_int[i] = std::norm(u2.amp[i]);
    transmitted[i] = mask.t[i] * lo_int[i];
  }
  analysis::DiscBinner binner(g, disc);
  std::vector<double> energy(n), overlap(n);
  binner.bin(lo_int.data(), energy.data());
  binner.bin(transmitted.data(), overlap.data());

  const double excess = std::abs(sq.variance_factor() - 1.0);
  ScalarMap t(g, MapRole::Transmission, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(excess * energy[i] >= vr_floor)) {
      t.valid[i] = 0;
      continue;
    }
    const double frac = overlap[i] / energy[i];
    t.values[i] = frac * frac;
  }
  return t;
}

double snr_traditional(double n_mean, double dark_var) {
  if (!(n_mean >= 0.0)) throw ParameterError("snr_traditional: mean photons must be >= 0");
  if (!(dark_var >= 0.0)) throw ParameterError("snr_traditional: dark variance must be >= 0");
  if (n_mean == 0.0) return 0.0;
  return n_mean / std::sqrt(n_mean + 2.0 * dark_var);
}

double snr_quantum(double variance) {
  if (!(variance >= 0.0)) throw ParameterError("snr_quantum: variance must be >= 0");
  return (variance - 1.0) / std::sqrt(2.0 + 2.0 * variance * variance);
}

SnrRatio snr_ratio(double r, double dark_var) {
  if (!(r > 0.0)) throw ParameterError("snr_ratio: r must be > 0");
  if (!(dark_var >= 0.0)) throw ParameterError("snr_ratio: dark variance must be >= 0");
  const double e2r = std::exp(2.0 * r);
  const double n_mean = std::sinh(r) * std::sinh(r);
  SnrRatio out;
  out.exact = (e2r - 1.0) / std::sqrt(2.0 + 2.0 * e2r * e2r) *
              std::sqrt(n_mean + 2.0 * dark_var) / n_mean;
  out.approximate = std::sqrt(1.0 + 2.0 * dark_var / n_mean);
  return out;
}

double photon_budget(double n_sq, double t_expo, double t_coh, std::uint64_t frames) {
  if (!(n_sq >= 0.0)) throw ParameterError("photon_budget: n_sq must be >= 0");
  if (!(t_expo > 0.0) || !(t_coh > 0.0)) {
    throw ParameterError("photon_budget: exposure and coherence times must be > 0");
  }
  return n_sq * (t_expo / t_coh) * static_cast<double>(frames);
}

}  // namespace qshadow::theory
