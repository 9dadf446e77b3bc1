#include "qshadow/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace qshadow::analysis {

namespace {

// Per-cluster numerator/denominator of the variance estimator from binned
// difference and sum frames, accumulated into the running sums.
struct ClusterStats {
  double num = 0.0;
  double den = 0.0;
};

void accumulate_cluster_pixel(double num, double den, double floor, double& sum, double& sum_sq,
                              auto& count) {
  if (!(den > floor)) return;
  const double v = num / den;
  sum += v;
  sum_sq += v * v;
  ++count;
}

}  // namespace

VarianceMapEstimator::VarianceMapEstimator(const Grid& grid, std::vector<DetectionDisc> discs,
                                           VarianceOptions options)
    : grid_(grid), discs_(std::move(discs)), options_(options) {
  if (discs_.empty()) throw ParameterError("VarianceMapEstimator: need at least one disc");
  const std::size_t n = grid_.size();
  for (const auto& d : discs_) binners_.emplace_back(grid_, d);
  sum_.assign(discs_.size(), std::vector<double>(n, 0.0));
  sum_sq_.assign(discs_.size(), std::vector<double>(n, 0.0));
  count_.assign(discs_.size(), std::vector<std::uint32_t>(n, 0));
  prefix_sum_.resize(n);
  binned_num_.resize(n);
  binned_den_.resize(n);
  scratch_.resize(n);
}

void VarianceMapEstimator::add_cluster(const mc::KineticCluster& cluster) {
  require_same_grid(cluster.port1.grid, grid_, "VarianceMapEstimator");
  const int frames = cluster.port1.frames;
  if (frames < 2) throw ParameterError("VarianceMapEstimator: clusters need >= 2 frames");
  const std::size_t n = grid_.size();

  // Sum of ports is binned once per cluster (binning is linear in frames).
  std::vector<double>& total = scratch_;
  std::fill(total.begin(), total.end(), 0.0);
  for (int f = 0; f < frames; ++f) {
    const double* p1 = cluster.port1.frame(f);
    const double* p2 = cluster.port2.frame(f);
    for (std::size_t i = 0; i < n; ++i) total[i] += p1[i] + p2[i];
  }
  DiscBinner::build_prefix(grid_, total.data(), prefix_sum_.data());

  if (diff_prefix_.size() != static_cast<std::size_t>(frames)) {
    diff_prefix_.assign(frames, std::vector<double>(n));
  }
  std::vector<double> diff(n);
  std::vector<double> diff_mean;
  if (options_.mean_subtract) diff_mean.assign(n, 0.0);
  for (int f = 0; f < frames; ++f) {
    const double* p1 = cluster.port1.frame(f);
    const double* p2 = cluster.port2.frame(f);
    for (std::size_t i = 0; i < n; ++i) diff[i] = p1[i] - p2[i];
    if (options_.mean_subtract) {
      for (std::size_t i = 0; i < n; ++i) diff_mean[i] += diff[i];
    }
    DiscBinner::build_prefix(grid_, diff.data(), diff_prefix_[f].data());
  }

  const double inv_frames = 1.0 / frames;
  std::vector<double> bd(n);
  for (std::size_t d = 0; d < discs_.size(); ++d) {
    binners_[d].bin_from_prefix(prefix_sum_.data(), binned_den_.data());
    std::fill(binned_num_.begin(), binned_num_.end(), 0.0);
    std::vector<double> binned_mean;
    if (options_.mean_subtract) {
      std::vector<double> mean_prefix(n);
      DiscBinner::build_prefix(grid_, diff_mean.data(), mean_prefix.data());
      binned_mean.resize(n);
      binners_[d].bin_from_prefix(mean_prefix.data(), binned_mean.data());
      for (auto& v : binned_mean) v *= inv_frames;
    }
    for (int f = 0; f < frames; ++f) {
      binners_[d].bin_from_prefix(diff_prefix_[f].data(), bd.data());
      if (options_.mean_subtract) {
        for (std::size_t i = 0; i < n; ++i) {
          const double c = bd[i] - binned_mean[i];
          binned_num_[i] += c * c;
        }
      } else {
        for (std::size_t i = 0; i < n; ++i) binned_num_[i] += bd[i] * bd[i];
      }
    }
    // Mean square over frames; with mean subtraction the frame count drops
    // by one so shot noise still reads V = 1.
    const double norm = options_.mean_subtract ? 1.0 / (frames - 1) : inv_frames;
    double* sums = sum_[d].data();
    double* sums_sq = sum_sq_[d].data();
    std::uint32_t* counts = count_[d].data();
    for (std::size_t i = 0; i < n; ++i) {
      const double den = binned_den_[i] * inv_frames;
      accumulate_cluster_pixel(binned_num_[i] * norm, den, options_.denominator_floor, sums[i],
                               sums_sq[i], counts[i]);
    }
  }
  ++clusters_;
}

void VarianceMapEstimator::merge(const VarianceMapEstimator& other) {
  if (!(other.grid_ == grid_) || other.discs_.size() != discs_.size()) {
    throw ShapeError("VarianceMapEstimator::merge: incompatible estimators");
  }
  for (std::size_t d = 0; d < discs_.size(); ++d) {
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      sum_[d][i] += other.sum_[d][i];
      sum_sq_[d][i] += other.sum_sq_[d][i];
      count_[d][i] += other.count_[d][i];
    }
  }
  clusters_ += other.clusters_;
}

ScalarMap VarianceMapEstimator::mean_map(std::size_t which) const {
  const auto& sums = sum_.at(which);
  const auto& counts = count_.at(which);
  ScalarMap out(grid_, MapRole::Variance, 0.0);
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (counts[i] == 0) {
      out.valid[i] = 0;
    } else {
      out.values[i] = sums[i] / counts[i];
    }
  }
  return out;
}

ScalarMap VarianceMapEstimator::stderr_map(std::size_t which) const {
  const auto& sums = sum_.at(which);
  const auto& sums_sq = sum_sq_.at(which);
  const auto& counts = count_.at(which);
  ScalarMap out(grid_, MapRole::Variance, 0.0);
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (counts[i] < 2) {
      out.valid[i] = 0;
      continue;
    }
    const double n = counts[i];
    const double mean = sums[i] / n;
    const double var = std::max(0.0, (sums_sq[i] - n * mean * mean) / (n - 1.0));
    out.values[i] = std::sqrt(var / n);
  }
  return out;
}

VariancePointEstimator::VariancePointEstimator(const Grid& grid, const DetectionDisc& disc,
                                               std::vector<Point> points, VarianceOptions options)
    : grid_(grid), binner_(grid, disc), points_(std::move(points)), options_(options) {
  if (points_.empty()) throw ParameterError("VariancePointEstimator: need at least one point");
  for (const auto& p : points_) {
    if (!grid_.contains(p.x, p.y)) throw ParameterError("VariancePointEstimator: point outside grid");
  }
  sum_.assign(points_.size(), 0.0);
  sum_sq_.assign(points_.size(), 0.0);
  count_.assign(points_.size(), 0);
  diff_.resize(grid_.size());
  summ_.resize(grid_.size());
}

void VariancePointEstimator::add_cluster(const mc::KineticCluster& cluster) {
  require_same_grid(cluster.port1.grid, grid_, "VariancePointEstimator");
  const int frames = cluster.port1.frames;
  if (frames < 2) throw ParameterError("VariancePointEstimator: clusters need >= 2 frames");
  const std::size_t n = grid_.size();
  const std::size_t m = points_.size();

  std::vector<double> num(m, 0.0), den(m, 0.0);
  std::vector<double> bd(m);
  std::vector<double> bd_mean;
  std::vector<std::vector<double>> bd_frames;
  if (options_.mean_subtract) {
    bd_mean.assign(m, 0.0);
    bd_frames.assign(frames, std::vector<double>(m, 0.0));
  }
  for (int f = 0; f < frames; ++f) {
    const double* p1 = cluster.port1.frame(f);
    const double* p2 = cluster.port2.frame(f);
    for (std::size_t i = 0; i < n; ++i) {
      diff_[i] = p1[i] - p2[i];
      summ_[i] = p1[i] + p2[i];
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double b = binner_.sum_at(diff_.data(), points_[j].x, points_[j].y);
      bd[j] = b;
      den[j] += binner_.sum_at(summ_.data(), points_[j].x, points_[j].y);
      if (options_.mean_subtract) {
        bd_mean[j] += b;
        bd_frames[f][j] = b;
      } else {
        num[j] += b * b;
      }
    }
  }
  if (options_.mean_subtract) {
    for (std::size_t j = 0; j < m; ++j) bd_mean[j] /= frames;
    for (int f = 0; f < frames; ++f) {
      for (std::size_t j = 0; j < m; ++j) {
        const double c = bd_frames[f][j] - bd_mean[j];
        num[j] += c * c;
      }
    }
  }
  const double norm = options_.mean_subtract ? 1.0 / (frames - 1) : 1.0 / frames;
  for (std::size_t j = 0; j < m; ++j) {
    accumulate_cluster_pixel(num[j] * norm, den[j] / frames, options_.denominator_floor, sum_[j],
                             sum_sq_[j], count_[j]);
  }
  ++clusters_;
}

void VariancePointEstimator::merge(const VariancePointEstimator& other) {
  if (!(other.grid_ == grid_) || other.points_.size() != points_.size() ||
      other.binner_.radius() != binner_.radius()) {
    throw ShapeError("VariancePointEstimator::merge: incompatible estimators");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    sum_[i] += other.sum_[i];
    sum_sq_[i] += other.sum_sq_[i];
    count_[i] += other.count_[i];
  }
  clusters_ += other.clusters_;
}

double VariancePointEstimator::mean(std::size_t i) const {
  if (count_.at(i) == 0) throw ParameterError("VariancePointEstimator: no valid clusters at point");
  return sum_[i] / static_cast<double>(count_[i]);
}

double VariancePointEstimator::stderr_of_mean(std::size_t i) const {
  if (count_.at(i) < 2) throw ParameterError("VariancePointEstimator: need >= 2 clusters");
  const double n = static_cast<double>(count_[i]);
  const double mean = sum_[i] / n;
  const double var = std::max(0.0, (sum_sq_[i] - n * mean * mean) / (n - 1.0));
  return std::sqrt(var / n);
}

ScalarMap estimate_variance_map(const std::vector<mc::KineticCluster>& clusters,
                                const DetectionDisc& disc, VarianceOptions options) {
  if (clusters.empty()) throw ParameterError("estimate_variance_map: need >= 1 cluster");
  VarianceMapEstimator est(clusters.front().port1.grid, {disc}, options);
  for (const auto& c : clusters) est.add_cluster(c);
  return est.mean_map(0);
}

ScalarMap transmission_quantum(const ScalarMap& v_probe, const ScalarMap& v_ref, double floor,
                               bool clamp) {
  require_same_grid(v_probe.grid, v_ref.grid, "transmission_quantum");
  if (!(floor > 0.0)) throw ParameterError("transmission_quantum: floor must be > 0");
  ScalarMap out(v_probe.grid, MapRole::Transmission, 0.0);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double excess_ref = v_ref.values[i] - 1.0;
    if (v_probe.valid[i] == 0 || v_ref.valid[i] == 0 || std::abs(excess_ref) < floor) {
      out.valid[i] = 0;
      continue;
    }
    double t = (v_probe.values[i] - 1.0) / excess_ref;
    if (clamp) t = std::clamp(t, 0.0, 1.0);
    out.values[i] = t;
  }
  return out;
}

ScalarMap transmission_traditional(const ScalarMap& n_probe, const ScalarMap& n_ref, double floor) {
  require_same_grid(n_probe.grid, n_ref.grid, "transmission_traditional");
  if (!(floor > 0.0)) throw ParameterError("transmission_traditional: floor must be > 0");
  ScalarMap out(n_probe.grid, MapRole::Transmission, 0.0);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (n_probe.valid[i] == 0 || n_ref.valid[i] == 0 || !(n_ref.values[i] >= floor)) {
      out.valid[i] = 0;
      continue;
    }
    out.values[i] = n_probe.values[i] / n_ref.values[i];
  }
  return out;
}

double similarity(const CrossSection& t_exp, const CrossSection& t_obj) {
  if (t_exp.size() != t_obj.size()) throw ShapeError("similarity: profiles differ in length");
  double dot = 0.0, norm_e = 0.0, norm_o = 0.0;
  for (std::size_t i = 0; i < t_exp.size(); ++i) {
    if (t_exp.valid[i] == 0 || t_obj.valid[i] == 0) continue;
    dot += t_exp.values[i] * t_obj.values[i];
    norm_e += t_exp.values[i] * t_exp.values[i];
    norm_o += t_obj.values[i] * t_obj.values[i];
  }
  if (norm_e <= 0.0 || norm_o <= 0.0) {
    throw ParameterError("similarity: zero-norm profile");
  }
  return dot / std::sqrt(norm_e * norm_o);
}

ScalarMap to_decibels(const ScalarMap& v) {
  ScalarMap out(v.grid, MapRole::Decibels, 0.0);
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (v.valid[i] == 0 || !(v.values[i] > 0.0)) {
      out.valid[i] = 0;
      continue;
    }
    out.values[i] = 10.0 * std::log10(v.values[i]);
  }
  return out;
}

CrossSection cross_section(const ScalarMap& map, int row, int x_start, int span) {
  if (span <= 0) throw ParameterError("cross_section: span must be > 0");
  if (row < 0 || row >= map.grid.height || x_start < 0 || x_start + span > map.grid.width) {
    throw ParameterError("cross_section: slice outside grid");
  }
  CrossSection cs;
  cs.row = row;
  cs.x_start = x_start;
  cs.values.resize(span);
  cs.valid.resize(span);
  for (int i = 0; i < span; ++i) {
    cs.values[i] = map.at(x_start + i, row);
    cs.valid[i] = map.valid[map.grid.index(x_start + i, row)];
  }
  return cs;
}

}  // namespace qshadow::analysis
