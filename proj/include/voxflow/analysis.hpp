#pragma once

// Dataset and motion-field structure analyses.

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "voxflow/grid.hpp"

namespace voxflow {

using Matrix = Grid2<double>;

/// Pearson correlation; empty when either input has zero variance or fewer
/// than two samples.
std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b);

/// Fraction of valid cells strictly above each threshold, per level, over all
/// frames. Result is Z x thresholds.
Matrix rainy_ratio(const RadarVolume& vol, const std::vector<double>& thresholds_dbz);

/// Mean pixel-wise Pearson correlation between every pair of levels over all
/// qualifying frames (echo above `echo_dbz` present on every level).
/// Symmetric with a unit diagonal. `samples` receives the number of frames
/// used.
Matrix reflectivity_corr_matrix(const std::vector<RadarVolume>& vols, double echo_dbz = 0.0,
                                std::size_t* samples = nullptr);

struct MotionCorrResult {
  Matrix combined;  // u and v concatenated
  Matrix u_only;
  Matrix v_only;
  Grid2<int> pairs_used;  // samples contributing to each entry
};

/// For each level pair, cells where the summed rain of both input slices
/// (over all input frames, mm/h) exceeds `precip_mmh` form the mask; the
/// masked u and v of both levels are concatenated and correlated. Averaged
/// over samples. inputs[s] are the frames the field mfs[s] was estimated from.
MotionCorrResult motion_corr_matrix(const std::vector<MotionField>& mfs,
                                    const std::vector<std::vector<RainField>>& inputs, double precip_mmh = 0.0);

/// Correlation between two levels of one sample with the same masking rule.
std::optional<double> motion_level_corr(const MotionField& mf, const std::vector<RainField>& inputs, int a, int b,
                                        double precip_mmh = 0.0);

// ---------------------------------------------------------------------------

struct TimedValue {
  std::chrono::sys_seconds time;
  double value = 0.0;
};

struct BoxStats {
  std::size_t n = 0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;   // most extreme value within 1.5 IQR of the box
  double whisker_high = 0.0;
  std::vector<double> outliers;
};

/// Linear-interpolation quantile of sorted data (p in [0,1]).
double quantile_sorted(const std::vector<double>& sorted, double p);

BoxStats box_stats(std::vector<double> values);

/// Tukey box statistics per calendar month (1..12).
std::map<int, BoxStats> monthwise_boxstats(const std::vector<TimedValue>& values);

// ---------------------------------------------------------------------------

struct CoverageSample {
  std::string id;
  std::chrono::sys_seconds time{};
  double coverage = 0.0;     // fraction of column-maximum cells above 20 dBZ
  double correlation = 0.0;  // motion correlation between the configured level pair
};

struct Histogram2D {
  std::vector<double> x_edges;  // coverage
  std::vector<double> y_edges;  // correlation
  Grid2<int> counts;            // (y bin, x bin)
  std::size_t dropped = 0;      // non-finite samples
};

/// Values outside the edge range land in the nearest edge bin, so the total
/// count equals the number of finite samples.
Histogram2D coverage_vs_corr_histogram(const std::vector<CoverageSample>& samples, std::vector<double> x_edges,
                                       std::vector<double> y_edges);

std::vector<double> linspace_edges(double lo, double hi, int bins);

struct OutlierSelection {
  std::vector<std::string> ids;
  bool truncated = false;  // fewer than k samples survived
};

/// Ranks coverage descending and correlation ascending, sums the ranks and
/// returns the best k. Ties in the sum go to the earlier timestamp, then the
/// smaller id. A sample closer than `min_gap` to an already selected one is
/// skipped.
OutlierSelection rank_outliers(const std::vector<CoverageSample>& samples, std::size_t k,
                               std::chrono::seconds min_gap = std::chrono::minutes(60));

/// Fraction of column-maximum cells above `threshold_dbz` in frame t.
double cmax_coverage(const RadarVolume& vol, int t, double threshold_dbz = 20.0);

// ---------------------------------------------------------------------------

/// 4-connected components of cells >= threshold (valid cells only).
int count_components(const Field2& field, const Mask2& mask, double threshold);

struct SplitLead {
  int lead = 0;
  int cmax_components = 0;
  std::vector<int> level_components;
  std::size_t cmax_rainy_cells = 0;
};

struct SplitDiagnostic {
  std::vector<SplitLead> leads;
  bool artifact = false;  // CMAX count grew while every level count stayed constant
};

/// Connected-component counts of the column-maximum composite and of every
/// level, for each lead of a volumetric nowcast (mm/h or dBR; the threshold is
/// in mm/h).
SplitDiagnostic cell_split_diagnostic(const std::vector<RainField>& nowcast, double threshold_mmh = 1.0);

}  // namespace voxflow
