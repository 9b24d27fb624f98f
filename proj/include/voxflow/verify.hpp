#pragma once

// Continuous and categorical verification per lead time.

#include <cstdint>
#include <optional>
#include <vector>

#include "voxflow/grid.hpp"

namespace voxflow {

struct ContingencyTable {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t false_alarms = 0;
  std::uint64_t correct_negatives = 0;
  double threshold = 0.0;  // mm/h
  int lead = 0;

  std::uint64_t total() const { return hits + misses + false_alarms + correct_negatives; }
  ContingencyTable& operator+=(const ContingencyTable& o);
};

struct ContinuousMetrics {
  double me = 0.0;
  double mae = 0.0;
  double mse = 0.0;
  std::uint64_t count = 0;
};

/// Undefined scores (zero denominators) are empty optionals and are left out
/// of any aggregation.
struct CategoricalScores {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> ets;
};

/// ME, MAE and MSE over jointly valid cells of every level. NoOverlap if none.
ContinuousMetrics continuous_metrics(const RainField& pred, const RainField& obs);

/// Binarizes at value >= threshold and counts the four outcomes over jointly
/// valid cells.
ContingencyTable contingency(const RainField& pred, const RainField& obs, double threshold, int lead = 0);

CategoricalScores precision_recall_ets(const ContingencyTable& t);

struct LeadScores {
  int lead = 0;
  ContinuousMetrics continuous;
  std::vector<ContingencyTable> tables;   // one per threshold
  std::vector<CategoricalScores> scores;  // one per threshold
};

struct VerificationReport {
  std::vector<double> thresholds;
  std::vector<LeadScores> leads;  // leads[i].lead == i + 1
  std::size_t samples = 0;
};

inline const std::vector<double> kDefaultThresholds{1.0, 5.0, 10.0};

/// Scores forecasts against observations, per lead, micro-averaged over
/// samples: sums and counts are pooled before any score is formed.
/// outputs[s][l] and observations[s][l] are lead l + 1 of sample s. Inputs
/// with more than one level are collapsed to their column maximum first.
/// Fields are converted to mm/h before scoring.
VerificationReport verify_nowcast(const std::vector<std::vector<RainField>>& outputs,
                                  const std::vector<std::vector<RainField>>& observations,
                                  const std::vector<double>& thresholds = kDefaultThresholds);

}  // namespace voxflow
