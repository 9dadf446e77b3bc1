#pragma once

#include "qshadow/field.hpp"
#include "qshadow/types.hpp"

namespace qshadow::theory {

using field::ComplexField;
using field::Mask;

enum class Quadrature : std::uint8_t {
  Squeezed,      // measured noise variance e^{-2r} at full overlap
  AntiSqueezed,  // measured noise variance e^{+2r} at full overlap
};

/// Squeeze-transformation strength plus the detection geometry: which
/// quadrature the homodyne phase selects and the residual relative phase
/// between squeezed mode and local oscillator (0 = phase matched).
struct SqueezerParams {
  double r = 0.0;
  Quadrature quadrature = Quadrature::AntiSqueezed;
  double phase = 0.0;

  SqueezerParams() = default;
  SqueezerParams(double r_, Quadrature q, double phase_ = 0.0) : r(r_), quadrature(q), phase(phase_) {
    if (!(r >= 0.0)) throw ParameterError("SqueezerParams: r must be >= 0");
  }

  /// r from a noise level in dB, using 10*log10(e^{2r}) = dB.
  static SqueezerParams from_db(double db, Quadrature q, double phase = 0.0);

  /// e^{+2r} or e^{-2r} according to the selected quadrature.
  double variance_factor() const;

  /// Relative phase including the quadrature selection (the squeezed
  /// quadrature sits a quarter period away from the anti-squeezed one).
  double effective_phase() const;

  double mean_photons() const;  // sinh^2 r
};

/// Noise variance relative to shot noise observed pixel by pixel:
/// V(x) = 1 + (e^{+-2r} - 1) |u1(x)|^2.
ScalarMap pixel_variance_map(const ComplexField& u1, const SqueezerParams& sq);

/// Normalized variance of disc-summed difference counts for arbitrary probe
/// and LO modes. With Z = sum_disc conj(u2) u1 e^{i phase} and E the disc LO
/// intensity, V = 1 + [2 sinh^2(r) |Z|^2 + 2 sinh(r) cosh(r) Re(Z^2)] / E.
/// Discs whose LO energy falls below `floor_frac` of the total are invalid.
ScalarMap binned_variance_general(const ComplexField& u1, const ComplexField& u2,
                                  const SqueezerParams& sq, const DetectionDisc& disc,
                                  double floor_frac = 1e-6);

/// Mode-matched special case (u1 = T u2 with a real intensity mask):
/// V = 1 + (e^{+-2r} - 1) (sum_disc T |u2|^2)^2 / sum_disc |u2|^2.
ScalarMap binned_variance_mode_matched(const Mask& mask, const ComplexField& u2,
                                       const SqueezerParams& sq, const DetectionDisc& disc,
                                       double floor_frac = 1e-6);

/// Variance from transmission and mode-overlap maps:
/// V = 1 + (e^{+-2r} - 1) |O|^2 T, with overlap_sq holding |O|^2 in [0,1].
ScalarMap expected_variance(const ScalarMap& t_map, const ScalarMap& overlap_sq,
                            const SqueezerParams& sq);

/// Transmission map an ideal noiseless run would reconstruct: the
/// probe/reference ratio of binned variance excesses, which reduces to the
/// squared energy-weighted disc average of the mask. Pixels where the
/// reference excess falls below `vr_floor` are invalid.
ScalarMap ideal_transmission_map(const Mask& mask, const ComplexField& u2,
                                 const SqueezerParams& sq, const DetectionDisc& disc,
                                 double vr_floor = 0.05);

/// Signal-to-noise of a mean-photon-count measurement against shot noise and
/// camera dark noise: n / sqrt(n + 2 dark_var); 0 when n is 0.
double snr_traditional(double n_mean, double dark_var);

/// Signal-to-noise of a variance measurement: (V - 1) / sqrt(2 + 2 V^2).
double snr_quantum(double variance);

struct SnrRatio {
  double exact = 0.0;
  double approximate = 0.0;  // sqrt(1 + 2 dark_var / sinh^2 r)
};

/// Ratio of the variance-based SNR (at V = e^{2r}) to the intensity SNR of a
/// coherent beam carrying the same mean photon number sinh^2 r.
SnrRatio snr_ratio(double r, double dark_var);

/// Total illumination photons: n_sq * (t_expo / t_coh) per frame, times the
/// frame count.
double photon_budget(double n_sq, double t_expo, double t_coh, std::uint64_t frames);

}  // namespace qshadow::theory
