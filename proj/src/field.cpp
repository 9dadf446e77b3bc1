#include "qshadow/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace qshadow::field {

double ComplexField::energy() const {
  double e = 0.0;
  for (const auto& a : amp) e += std::norm(a);
  return e;
}

bool ComplexField::is_normalized(double tol) const { return std::abs(energy() - 1.0) <= tol; }

void ComplexField::normalize() {
  const double e = energy();
  if (e <= 0.0) throw ParameterError("normalize: field has zero energy");
  const double s = 1.0 / std::sqrt(e);
  for (auto& a : amp) a *= s;
}

ScalarMap ComplexField::intensity_map() const {
  ScalarMap m(grid, MapRole::Intensity);
  for (std::size_t i = 0; i < amp.size(); ++i) m.values[i] = std::norm(amp[i]);
  return m;
}

ComplexField gaussian_mode(const Grid& grid, double waist_px, double center_x, double center_y) {
  if (!(waist_px > 0.0)) throw ParameterError("gaussian_mode: waist must be > 0");
  if (!grid.contains(center_x, center_y)) {
    throw ParameterError("gaussian_mode: center outside grid");
  }
  ComplexField f(grid);
  const double inv_w2 = 1.0 / (waist_px * waist_px);
  double energy = 0.0;
  for (int y = 0; y < grid.height; ++y) {
    const double dy = y - center_y;
    for (int x = 0; x < grid.width; ++x) {
      const double dx = x - center_x;
      const double a = std::exp(-(dx * dx + dy * dy) * inv_w2);
      f.amp[grid.index(x, y)] = a;
      energy += a * a;
    }
  }
  const double s = 1.0 / std::sqrt(energy);
  for (auto& a : f.amp) a *= s;
  return f;
}

Mask rect_mask(const Grid& grid, int x0, int y0, int x1, int y1, bool inverted) {
  if (x0 < 0 || y0 < 0 || x1 > grid.width || y1 > grid.height || x0 > x1 || y0 > y1) {
    throw ParameterError("rect_mask: corners must satisfy 0 <= lo <= hi <= grid size");
  }
  const double inside = inverted ? 1.0 : 0.0;
  const double outside = inverted ? 0.0 : 1.0;
  Mask m(grid, outside);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) m.t[grid.index(x, y)] = inside;
  }
  return m;
}

ComplexField apply_mask(const ComplexField& f, const Mask& m) {
  require_same_grid(f.grid, m.grid, "apply_mask");
  ComplexField out(f.grid);
  for (std::size_t i = 0; i < f.amp.size(); ++i) {
    const double t = m.t[i];
    if (t < 0.0 || t > 1.0) throw ParameterError("apply_mask: transmission outside [0,1]");
    out.amp[i] = f.amp[i] * std::sqrt(t);
  }
  return out;
}

namespace {

// FFTW plan creation is not thread-safe; execution on distinct buffers is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

void fft2_inplace(std::vector<Complex>& data, int w, int h, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_2d(h, w, ptr, ptr, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
}

double fft_freq(int i, int n, double pitch) {
  const int k = (i <= n / 2) ? i : i - n;
  return static_cast<double>(k) / (n * pitch);
}

}  // namespace

ComplexField propagate(const ComplexField& f, double distance, double wavelength, int pad_factor) {
  if (!(wavelength > 0.0)) throw ParameterError("propagate: wavelength must be > 0");
  if (pad_factor < 1) throw ParameterError("propagate: pad_factor must be >= 1");
  if (distance == 0.0 && pad_factor == 1) return f;

  const Grid& g = f.grid;
  const int w = g.width * pad_factor;
  const int h = g.height * pad_factor;
  const int x_off = (w - g.width) / 2;
  const int y_off = (h - g.height) / 2;

  std::vector<Complex> buf(static_cast<std::size_t>(w) * h, Complex{0.0, 0.0});
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      buf[static_cast<std::size_t>(y + y_off) * w + (x + x_off)] = f.amp[g.index(x, y)];
    }
  }

  fft2_inplace(buf, w, h, FFTW_FORWARD);

  const double inv_lambda2 = 1.0 / (wavelength * wavelength);
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> fy2(h);
  for (int y = 0; y < h; ++y) {
    const double fy = fft_freq(y, h, g.pitch);
    fy2[y] = fy * fy;
  }
  for (int x = 0; x < w; ++x) {
    const double fx = fft_freq(x, w, g.pitch);
    const double fx2 = fx * fx;
    for (int y = 0; y < h; ++y) {
      const double kz2 = inv_lambda2 - fx2 - fy2[y];
      // Evanescent components keep unit magnitude so the transform stays
      // unitary on the periodic frame.
      const double phase = kz2 > 0.0 ? two_pi * distance * std::sqrt(kz2) : 0.0;
      buf[static_cast<std::size_t>(y) * w + x] *= Complex{std::cos(phase), std::sin(phase)};
    }
  }

  fft2_inplace(buf, w, h, FFTW_BACKWARD);
  const double scale = 1.0 / (static_cast<double>(w) * h);

  ComplexField out(g);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      out.amp[g.index(x, y)] = buf[static_cast<std::size_t>(y + y_off) * w + (x + x_off)] * scale;
    }
  }
  return out;
}

}  // namespace qshadow::field
