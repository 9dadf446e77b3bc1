#include "qshadow/binning.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace qshadow::analysis {

DiscBinner::DiscBinner(const Grid& grid, const DetectionDisc& disc)
    : grid_(grid), radius_(disc.radius), footprint_(0) {
  const int R = radius_;
  strips_.reserve(2 * R - 1);
  for (int dy = -(R - 1); dy <= R - 1; ++dy) {
    const int lim = R * R - dy * dy - 1;  // widest dx with dx^2 <= lim (strict dx^2 < R^2 - dy^2)
    int k = static_cast<int>(std::floor(std::sqrt(static_cast<double>(lim))));
    while ((k + 1) * (k + 1) <= lim) ++k;
    while (k > 0 && k * k > lim) --k;
    strips_.push_back({dy, k});
    footprint_ += 2 * k + 1;
  }
}

void DiscBinner::build_prefix(const Grid& grid, const double* src, double* prefix) {
  const int w = grid.width;
  for (int y = 0; y < grid.height; ++y) {
    const double* s = src + static_cast<std::size_t>(y) * w;
    double* p = prefix + static_cast<std::size_t>(y) * w;
    double run = 0.0;
    for (int x = 0; x < w; ++x) {
      run += s[x];
      p[x] = run;
    }
  }
}

void DiscBinner::bin_from_prefix(const double* prefix, double* dst) const {
  const int w = grid_.width;
  const int h = grid_.height;
  std::memset(dst, 0, grid_.size() * sizeof(double));
  for (int y = 0; y < h; ++y) {
    double* out = dst + static_cast<std::size_t>(y) * w;
    for (const auto& strip : strips_) {
      const int yy = y + strip.dy;
      if (yy < 0 || yy >= h) continue;
      const double* p = prefix + static_cast<std::size_t>(yy) * w;
      const int k = strip.half;
      const int left_end = std::min(k + 1, w);  // x below this needs a clipped low edge
      const int right_begin = std::max(w - 1 - k, left_end);
      for (int x = 0; x < left_end; ++x) {
        out[x] += p[std::min(x + k, w - 1)];
      }
      // interior: both edges in range
      for (int x = left_end; x < right_begin; ++x) {
        out[x] += p[x + k] - p[x - k - 1];
      }
      for (int x = right_begin; x < w; ++x) {
        out[x] += p[w - 1] - p[x - k - 1];
      }
    }
  }
}

void DiscBinner::bin(const double* src, double* dst) const {
  if (radius_ == 1) {  // no binning: exact copy, not a prefix difference
    std::memcpy(dst, src, grid_.size() * sizeof(double));
    return;
  }
  std::vector<double> prefix(grid_.size());
  build_prefix(grid_, src, prefix.data());
  bin_from_prefix(prefix.data(), dst);
}

double DiscBinner::sum_at(const double* src, int cx, int cy) const {
  const int w = grid_.width;
  const int h = grid_.height;
  double sum = 0.0;
  for (const auto& strip : strips_) {
    const int yy = cy + strip.dy;
    if (yy < 0 || yy >= h) continue;
    const int x0 = std::max(cx - strip.half, 0);
    const int x1 = std::min(cx + strip.half, w - 1);
    const double* row = src + static_cast<std::size_t>(yy) * w;
    for (int x = x0; x <= x1; ++x) sum += row[x];
  }
  return sum;
}

ScalarMap bin_counts(const ScalarMap& map, const DetectionDisc& disc) {
  DiscBinner binner(map.grid, disc);
  ScalarMap out(map.grid, map.role);
  binner.bin(map.values.data(), out.values.data());
  return out;
}

}  // namespace qshadow::analysis
