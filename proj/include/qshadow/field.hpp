#pragma once

#include <complex>
#include <vector>

#include "qshadow/types.hpp"

namespace qshadow::field {

using Complex = std::complex<double>;

/// Complex amplitude map of one spatial mode. A normalized mode has unit
/// total intensity; a mode that passed an absorber may have less.
struct ComplexField {
  Grid grid;
  std::vector<Complex> amp;

  ComplexField() = default;
  explicit ComplexField(const Grid& g, Complex fill = {0.0, 0.0}) : grid(g), amp(g.size(), fill) {}

  Complex& at(int x, int y) { return amp[grid.index(x, y)]; }
  Complex at(int x, int y) const { return amp[grid.index(x, y)]; }

  /// Total intensity sum(|amp|^2).
  double energy() const;

  /// sum(|amp|^2) == 1 within tol.
  bool is_normalized(double tol = 1e-9) const;

  /// Scale amplitudes so that energy() == 1. Throws on an all-zero field.
  void normalize();

  ScalarMap intensity_map() const;
};

/// Per-pixel intensity transmission in [0, 1]; binary for opaque objects.
struct Mask {
  Grid grid;
  std::vector<double> t;

  Mask() = default;
  explicit Mask(const Grid& g, double fill = 1.0) : grid(g), t(g.size(), fill) {}

  double& at(int x, int y) { return t[grid.index(x, y)]; }
  double at(int x, int y) const { return t[grid.index(x, y)]; }
};

/// Unit-normalized Gaussian mode with amplitude exp(-|x-c|^2 / waist^2) and
/// zero phase. `waist` is the 1/e amplitude radius in pixels; `center` may be
/// fractional but must lie inside the grid.
ComplexField gaussian_mode(const Grid& grid, double waist_px, double center_x, double center_y);

/// Binary mask blocking the half-open pixel rectangle [x0,x1) x [y0,y1)
/// (t = 0 inside, 1 outside; swapped when inverted). A zero-area rectangle
/// yields an all-open mask. Corners must satisfy 0 <= lo <= hi <= grid size.
Mask rect_mask(const Grid& grid, int x0, int y0, int x1, int y1, bool inverted = false);

/// amp' = sqrt(t) * amp, so the intensity transmission equals t.
ComplexField apply_mask(const ComplexField& f, const Mask& m);

/// Angular-spectrum propagation over `distance` with periodic boundaries.
/// The transfer function is pure phase (spatial frequencies beyond 1/lambda
/// pass unchanged), so total energy is conserved and propagate(-d) inverts
/// propagate(d). `pad_factor` >= 1 embeds the field in an enlarged frame
/// before transforming to push the wraparound further out.
ComplexField propagate(const ComplexField& f, double distance, double wavelength,
                       int pad_factor = 1);

}  // namespace qshadow::field
