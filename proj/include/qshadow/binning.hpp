#pragma once

#include <vector>

#include "qshadow/types.hpp"

namespace qshadow::analysis {

/// Sliding-disc sums over a pixel grid. The disc of radius R centred at p is
/// decomposed into row strips [x-k(dy), x+k(dy)] with k(dy) the widest offset
/// satisfying dx^2 + dy^2 < R^2; strip sums come from per-row running sums,
/// so results are exact (bitwise so for integer-valued inputs). Discs
/// truncate at the frame borders with no wraparound and no renormalization.
class DiscBinner {
 public:
  DiscBinner(const Grid& grid, const DetectionDisc& disc);

  const Grid& grid() const { return grid_; }
  int radius() const { return radius_; }

  /// Number of lattice points in an untruncated disc.
  int footprint() const { return footprint_; }

  /// Build the per-row running-sum table for `src` into `prefix`
  /// (both grid-sized). One table serves any number of radii.
  static void build_prefix(const Grid& grid, const double* src, double* prefix);

  /// Accumulate disc sums from a prefix table into `dst` (grid-sized,
  /// caller-zeroed; overwritten, not accumulated).
  void bin_from_prefix(const double* prefix, double* dst) const;

  /// Convenience: disc-sum a full map (allocates scratch).
  void bin(const double* src, double* dst) const;

  /// Direct disc sum at a single centre, truncated at borders.
  double sum_at(const double* src, int cx, int cy) const;

 private:
  struct Strip {
    int dy;
    int half;  // strip spans [x - half, x + half]
  };

  Grid grid_;
  int radius_;
  int footprint_;
  std::vector<Strip> strips_;
};

/// Disc sums of a scalar map: out(p) = sum of map over the disc at p.
/// Input maps must be fully valid (count maps are); output keeps the role.
ScalarMap bin_counts(const ScalarMap& map, const DetectionDisc& disc);

}  // namespace qshadow::analysis
