#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qshadow {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid argument values (out-of-range parameters, bad enum values, ...).
struct ParameterError : Error {
  using Error::Error;
};

/// Operands live on mismatched grids.
struct ShapeError : Error {
  using Error::Error;
};

/// Inputs violate a physical constraint (e.g. mode energy above unity).
struct PhysicalityError : Error {
  using Error::Error;
};

/// Configuration file / CLI errors. Mapped to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

/// Filesystem and format errors. Mapped to exit code 3.
struct IoError : Error {
  using Error::Error;
};

/// Pixel lattice shared by all 2D maps. `pitch` is the physical length of
/// one pixel in arbitrary units; it only matters for propagation.
struct Grid {
  int width = 0;
  int height = 0;
  double pitch = 1.0;

  Grid() = default;
  Grid(int w, int h, double p = 1.0) : width(w), height(h), pitch(p) {
    if (w < 2 || h < 2) throw ParameterError("Grid: width and height must be >= 2");
    if (!(p > 0.0)) throw ParameterError("Grid: pitch must be > 0");
  }

  std::size_t size() const { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  bool contains(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  bool contains(double x, double y) const { return x >= 0.0 && x < width && y >= 0.0 && y < height; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.width == b.width && a.height == b.height && a.pitch == b.pitch;
  }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw ShapeError(std::string(what) + ": grid mismatch");
}

enum class MapRole : std::uint8_t { Intensity, Variance, Transmission, Decibels };

const char* to_string(MapRole role);
MapRole map_role_from_string(const std::string& s);

/// 2D real-valued map with a per-pixel validity flag. Invalid pixels are
/// gaps: they carry no value and are skipped by downstream statistics.
struct ScalarMap {
  Grid grid;
  MapRole role = MapRole::Intensity;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  ScalarMap() = default;
  ScalarMap(const Grid& g, MapRole r, double fill = 0.0)
      : grid(g), role(r), values(g.size(), fill), valid(g.size(), 1) {}

  double& at(int x, int y) { return values[grid.index(x, y)]; }
  double at(int x, int y) const { return values[grid.index(x, y)]; }
  bool is_valid(int x, int y) const { return valid[grid.index(x, y)] != 0; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto v : valid) n += v != 0;
    return n;
  }

  /// Mean over valid pixels. Throws if no pixel is valid.
  double valid_mean() const;
};

/// Disc-shaped detection area. A pixel q belongs to the disc centred at p
/// iff |p - q| < radius (strict), so radius 1 is the single centre pixel.
struct DetectionDisc {
  int radius = 1;

  DetectionDisc() = default;
  explicit DetectionDisc(int r) : radius(r) {
    if (r < 1) throw ParameterError("DetectionDisc: radius must be >= 1");
  }
};

/// 1D slice of a map row; invalid source pixels stay flagged as gaps.
struct CrossSection {
  int row = 0;
  int x_start = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return values.size(); }
};

}  // namespace qshadow
