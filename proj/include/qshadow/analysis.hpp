#pragma once

#include <memory>
#include <vector>

#include "qshadow/binning.hpp"
#include "qshadow/montecarlo.hpp"
#include "qshadow/types.hpp"

namespace qshadow::analysis {

struct VarianceOptions {
  /// Per-cluster denominators at or below this count are treated as invalid
  /// for that cluster (the pixel stays valid if other clusters contribute).
  double denominator_floor = 1e-9;
  /// Subtract the within-cluster mean of the binned difference before
  /// squaring (off: the plain mean square over the frames of a cluster).
  bool mean_subtract = false;
};

/// Streaming per-pixel estimator of the normalized quadrature variance
///   V = <(N1_R - N2_R)^2> / <N1_R + N2_R>,
/// frame-averaged inside each cluster, then averaged over clusters. Several
/// radii share the per-frame running-sum tables, so add one cluster once and
/// read one map per radius.
class VarianceMapEstimator {
 public:
  VarianceMapEstimator(const Grid& grid, std::vector<DetectionDisc> discs,
                       VarianceOptions options = {});

  void add_cluster(const mc::KineticCluster& cluster);

  /// Merge accumulators from a sibling estimator (same grid/discs/options).
  void merge(const VarianceMapEstimator& other);

  std::size_t clusters_seen() const { return clusters_; }
  const std::vector<DetectionDisc>& discs() const { return discs_; }

  /// Mean V per pixel for disc index `which`; pixels never above the
  /// denominator floor are invalid.
  ScalarMap mean_map(std::size_t which) const;

  /// Standard error of the per-pixel mean (sample SD / sqrt(count));
  /// requires >= 2 contributing clusters at a pixel.
  ScalarMap stderr_map(std::size_t which) const;

 private:
  Grid grid_;
  std::vector<DetectionDisc> discs_;
  std::vector<DiscBinner> binners_;
  VarianceOptions options_;
  std::size_t clusters_ = 0;
  // per disc: sum V, sum V^2, contributing-cluster count
  std::vector<std::vector<double>> sum_;
  std::vector<std::vector<double>> sum_sq_;
  std::vector<std::vector<std::uint32_t>> count_;
  // scratch reused across clusters
  std::vector<std::vector<double>> diff_prefix_;
  std::vector<double> prefix_sum_, binned_num_, binned_den_, scratch_;
};

/// Same estimator restricted to a list of centre pixels (cross-section rows,
/// single probe points); avoids full-map binning when only a few pixels
/// matter.
class VariancePointEstimator {
 public:
  struct Point {
    int x;
    int y;
  };

  VariancePointEstimator(const Grid& grid, const DetectionDisc& disc, std::vector<Point> points,
                         VarianceOptions options = {});

  void add_cluster(const mc::KineticCluster& cluster);

  /// Merge accumulators from a sibling estimator (same grid/disc/points).
  void merge(const VariancePointEstimator& other);

  std::size_t clusters_seen() const { return clusters_; }
  std::size_t point_count() const { return points_.size(); }

  double mean(std::size_t i) const;
  double stderr_of_mean(std::size_t i) const;
  std::size_t count(std::size_t i) const { return count_[i]; }

 private:
  Grid grid_;
  DiscBinner binner_;
  std::vector<Point> points_;
  VarianceOptions options_;
  std::size_t clusters_ = 0;
  std::vector<double> sum_, sum_sq_;
  std::vector<std::size_t> count_;
  std::vector<double> diff_, summ_;
};

/// Convenience wrapper over VarianceMapEstimator for a materialized cluster
/// list.
ScalarMap estimate_variance_map(const std::vector<mc::KineticCluster>& clusters,
                                const DetectionDisc& disc, VarianceOptions options = {});

/// T = (V_probe - 1) / (V_ref - 1) where |V_ref - 1| >= floor; other pixels
/// are invalid. Optionally clamps to [0, 1].
ScalarMap transmission_quantum(const ScalarMap& v_probe, const ScalarMap& v_ref, double floor,
                               bool clamp = false);

/// T = N_probe / N_ref where N_ref >= floor; dark-mean subtraction happens
/// upstream.
ScalarMap transmission_traditional(const ScalarMap& n_probe, const ScalarMap& n_ref, double floor);

/// Normalized cross-correlation of two profiles over their common valid
/// pixels: sum(a b) / sqrt(sum(a^2) sum(b^2)).
double similarity(const CrossSection& t_exp, const CrossSection& t_obj);

/// 10 log10(V); invalid where V <= 0 or the input pixel is invalid.
ScalarMap to_decibels(const ScalarMap& v);

/// Horizontal slice of `span` pixels starting at x_start on `row`; validity
/// gaps propagate.
CrossSection cross_section(const ScalarMap& map, int row, int x_start, int span);

}  // namespace qshadow::analysis
