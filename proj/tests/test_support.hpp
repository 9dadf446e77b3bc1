#pragma once

#include <cmath>
#include <vector>

#include "qshadow/field.hpp"
#include "qshadow/rng.hpp"
#include "qshadow/types.hpp"

namespace qshadow::testing {

/// Brute-force disc sum: the independent oracle for the fast binning path.
/// Strict membership |p - q| < R, truncated at borders.
inline ScalarMap brute_force_bin(const ScalarMap& map, int radius) {
  ScalarMap out(map.grid, map.role);
  const int w = map.grid.width;
  const int h = map.grid.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      for (int dy = -radius + 1; dy <= radius - 1; ++dy) {
        for (int dx = -radius + 1; dx <= radius - 1; ++dx) {
          if (dx * dx + dy * dy >= radius * radius) continue;
          const int xx = x + dx;
          const int yy = y + dy;
          if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
          sum += map.at(xx, yy);
        }
      }
      out.at(x, y) = sum;
    }
  }
  return out;
}

/// Number of lattice points at strict Euclidean distance < R from a point.
inline int brute_force_disc_count(int radius) {
  int n = 0;
  for (int dy = -radius + 1; dy <= radius - 1; ++dy) {
    for (int dx = -radius + 1; dx <= radius - 1; ++dx) {
      if (dx * dx + dy * dy < radius * radius) ++n;
    }
  }
  return n;
}

inline ScalarMap random_map(const Grid& grid, std::uint64_t seed, bool integer_valued) {
  ScalarMap m(grid, MapRole::Intensity);
  util::Rng rng(seed);
  for (auto& v : m.values) {
    v = integer_valued ? static_cast<double>(rng.next_u64() % 1000) : rng.uniform() * 10.0 - 5.0;
  }
  return m;
}

inline field::ComplexField random_field(const Grid& grid, std::uint64_t seed) {
  field::ComplexField f(grid);
  util::Rng rng(seed);
  for (auto& a : f.amp) a = {rng.uniform() - 0.5, rng.uniform() - 0.5};
  f.normalize();
  return f;
}

/// Intensity-weighted RMS width per axis; 2x the standard deviation of the
/// intensity profile, which for a Gaussian mode equals its 1/e amplitude
/// radius.
inline double measured_waist(const field::ComplexField& f) {
  double total = 0.0, mx = 0.0, my = 0.0;
  for (int y = 0; y < f.grid.height; ++y) {
    for (int x = 0; x < f.grid.width; ++x) {
      const double i = std::norm(f.at(x, y));
      total += i;
      mx += i * x;
      my += i * y;
    }
  }
  mx /= total;
  my /= total;
  double var = 0.0;
  for (int y = 0; y < f.grid.height; ++y) {
    for (int x = 0; x < f.grid.width; ++x) {
      const double i = std::norm(f.at(x, y));
      var += i * ((x - mx) * (x - mx) + (y - my) * (y - my));
    }
  }
  var /= 2.0 * total;  // per-axis variance
  return 2.0 * std::sqrt(var);
}

}  // namespace qshadow::testing
