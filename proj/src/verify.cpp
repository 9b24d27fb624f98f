#include "voxflow/verify.hpp"

#include <cmath>

#include "voxflow/transform.hpp"

namespace voxflow {

ContingencyTable& ContingencyTable::operator+=(const ContingencyTable& o) {
  hits += o.hits;
  misses += o.misses;
  false_alarms += o.false_alarms;
  correct_negatives += o.correct_negatives;
  return *this;
}

namespace {

struct ErrorSums {
  double err = 0.0;
  double abs_err = 0.0;
  double sq_err = 0.0;
  std::uint64_t count = 0;

  void add(const ErrorSums& o) {
    err += o.err;
    abs_err += o.abs_err;
    sq_err += o.sq_err;
    count += o.count;
  }

  ContinuousMetrics metrics() const {
    if (count == 0) throw NoOverlap("continuous metrics: no jointly valid cells");
    const double n = static_cast<double>(count);
    return {err / n, abs_err / n, sq_err / n, count};
  }
};

void check_pair(const RainField& pred, const RainField& obs) {
  if (pred.nz() != obs.nz() || pred.ny() != obs.ny() || pred.nx() != obs.nx())
    throw InvalidArgument("verification: forecast and observation shapes differ");
  if (pred.space != obs.space) throw InvalidArgument("verification: forecast and observation spaces differ");
}

ErrorSums error_sums(const RainField& pred, const RainField& obs) {
  check_pair(pred, obs);
  ErrorSums s;
  for (int z = 0; z < pred.nz(); ++z)
    for (std::size_t i = 0; i < pred.levels[z].size(); ++i) {
      if (!pred.masks[z][i] || !obs.masks[z][i]) continue;
      const double d = pred.levels[z][i] - obs.levels[z][i];
      s.err += d;
      s.abs_err += std::abs(d);
      s.sq_err += d * d;
      ++s.count;
    }
  return s;
}

RainField scoring_field(const RainField& f) {
  RainField mmh = to_space(f, RainSpace::MMH);
  return mmh.nz() > 1 ? cmax(mmh) : mmh;
}

}  // namespace

ContinuousMetrics continuous_metrics(const RainField& pred, const RainField& obs) {
  return error_sums(pred, obs).metrics();
}

ContingencyTable contingency(const RainField& pred, const RainField& obs, double threshold, int lead) {
  check_pair(pred, obs);
  ContingencyTable t;
  t.threshold = threshold;
  t.lead = lead;
  for (int z = 0; z < pred.nz(); ++z)
    for (std::size_t i = 0; i < pred.levels[z].size(); ++i) {
      if (!pred.masks[z][i] || !obs.masks[z][i]) continue;
      const bool p = pred.levels[z][i] >= threshold;
      const bool o = obs.levels[z][i] >= threshold;
      if (p && o)
        ++t.hits;
      else if (!p && o)
        ++t.misses;
      else if (p && !o)
        ++t.false_alarms;
      else
        ++t.correct_negatives;
    }
  return t;
}

CategoricalScores precision_recall_ets(const ContingencyTable& t) {
  const double h = static_cast<double>(t.hits);
  const double m = static_cast<double>(t.misses);
  const double fa = static_cast<double>(t.false_alarms);
  const double n = static_cast<double>(t.total());
  CategoricalScores s;
  if (h + fa > 0) s.precision = h / (h + fa);
  if (h + m > 0) s.recall = h / (h + m);
  if (n > 0) {
    const double hits_rand = (h + fa) * (h + m) / n;
    const double denom = h + m + fa - hits_rand;
    if (denom != 0.0) s.ets = (h - hits_rand) / denom;
  }
  return s;
}

VerificationReport verify_nowcast(const std::vector<std::vector<RainField>>& outputs,
                                  const std::vector<std::vector<RainField>>& observations,
                                  const std::vector<double>& thresholds) {
  if (outputs.size() != observations.size())
    throw InvalidArgument("verify_nowcast: sample counts of forecasts and observations differ");
  if (outputs.empty()) throw InvalidArgument("verify_nowcast: no samples");
  std::size_t n_leads = outputs.front().size();
  for (std::size_t s = 0; s < outputs.size(); ++s)
    if (outputs[s].size() != n_leads || observations[s].size() != n_leads)
      throw InvalidArgument("verify_nowcast: every sample needs the same number of leads");

  VerificationReport rep;
  rep.thresholds = thresholds;
  rep.samples = outputs.size();
  for (std::size_t l = 0; l < n_leads; ++l) {
    LeadScores ls;
    ls.lead = static_cast<int>(l + 1);
    ErrorSums sums;
    ls.tables.resize(thresholds.size());
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      ls.tables[k].threshold = thresholds[k];
      ls.tables[k].lead = ls.lead;
    }
    for (std::size_t s = 0; s < outputs.size(); ++s) {
      const RainField pred = scoring_field(outputs[s][l]);
      const RainField obs = scoring_field(observations[s][l]);
      sums.add(error_sums(pred, obs));
      for (std::size_t k = 0; k < thresholds.size(); ++k)
        ls.tables[k] += contingency(pred, obs, thresholds[k], ls.lead);
    }
    ls.continuous = sums.metrics();
    for (const auto& t : ls.tables) ls.scores.push_back(precision_recall_ets(t));
    rep.leads.push_back(std::move(ls));
  }
  return rep;
}

}  // namespace voxflow
