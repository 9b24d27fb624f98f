#include "voxflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "voxflow/transform.hpp"

namespace voxflow {

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidArgument("pearson: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) return std::nullopt;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  // Relative guard: a constant vector leaves only rounding noise in saa.
  const double tiny = 1e-24 * static_cast<double>(n);
  if (saa <= tiny * (1.0 + ma * ma) || sbb <= tiny * (1.0 + mb * mb)) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

Matrix rainy_ratio(const RadarVolume& vol, const std::vector<double>& thresholds_dbz) {
  Matrix out(vol.nz(), static_cast<int>(thresholds_dbz.size()));
  for (int z = 0; z < vol.nz(); ++z) {
    const Mask2& m = vol.level_mask(z);
    std::vector<std::size_t> above(thresholds_dbz.size(), 0);
    std::size_t valid = 0;
    for (int t = 0; t < vol.nt(); ++t)
      for (int y = 0; y < vol.ny(); ++y)
        for (int x = 0; x < vol.nx(); ++x) {
          if (!m(y, x)) continue;
          ++valid;
          const double v = vol.at(t, z, y, x);
          for (std::size_t k = 0; k < thresholds_dbz.size(); ++k)
            if (v > thresholds_dbz[k]) ++above[k];
        }
    for (std::size_t k = 0; k < thresholds_dbz.size(); ++k)
      out(z, static_cast<int>(k)) = valid ? static_cast<double>(above[k]) / static_cast<double>(valid) : 0.0;
  }
  return out;
}

namespace {

Matrix finish_mean(const Matrix& sum, const Grid2<int>& count) {
  Matrix out(sum.ny(), sum.nx());
  for (int i = 0; i < sum.ny(); ++i)
    for (int j = 0; j < sum.nx(); ++j) {
      if (i == j)
        out(i, j) = 1.0;
      else
        out(i, j) = count(i, j) > 0 ? sum(i, j) / count(i, j) : std::nan("");
    }
  return out;
}

}  // namespace

Matrix reflectivity_corr_matrix(const std::vector<RadarVolume>& vols, double echo_dbz, std::size_t* samples) {
  if (vols.empty()) throw InvalidArgument("reflectivity_corr_matrix: no volumes");
  const int nz = vols.front().nz();
  Matrix sum(nz, nz);
  Grid2<int> count(nz, nz, 0);
  std::size_t used = 0;
  for (const auto& vol : vols) {
    if (vol.nz() != nz) throw InvalidArgument("reflectivity_corr_matrix: volumes differ in depth");
    // Cells valid on every level.
    Mask2 joint = vol.level_mask(0);
    for (int z = 1; z < nz; ++z)
      for (std::size_t i = 0; i < joint.size(); ++i) joint[i] = joint[i] && vol.level_mask(z)[i];
    for (int t = 0; t < vol.nt(); ++t) {
      std::vector<std::vector<double>> levels(static_cast<std::size_t>(nz));
      bool qualifies = true;
      for (int z = 0; z < nz; ++z) {
        bool echo = false;
        for (int y = 0; y < vol.ny(); ++y)
          for (int x = 0; x < vol.nx(); ++x) {
            if (!joint(y, x)) continue;
            const double v = vol.at(t, z, y, x);
            levels[z].push_back(v);
            echo = echo || v > echo_dbz;
          }
        qualifies = qualifies && echo;
      }
      if (!qualifies) continue;
      ++used;
      for (int i = 0; i < nz; ++i)
        for (int j = i + 1; j < nz; ++j)
          if (auto r = pearson(levels[i], levels[j])) {
            sum(i, j) += *r;
            sum(j, i) += *r;
            ++count(i, j);
            ++count(j, i);
          }
    }
  }
  if (samples) *samples = used;
  return finish_mean(sum, count);
}

namespace {

Field2 summed_rain(const std::vector<RainField>& inputs, int z) {
  Field2 s(inputs.front().ny(), inputs.front().nx());
  for (const auto& f : inputs) {
    const RainField r = to_space(f, RainSpace::MMH);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (r.masks[z][i]) s[i] += r.levels[z][i];
  }
  return s;
}

struct LevelPairVectors {
  std::vector<double> ua, va, ub, vb;
};

LevelPairVectors masked_vectors(const MotionField& mf, const Field2& rain_a, const Field2& rain_b, int a, int b,
                                double precip_mmh) {
  LevelPairVectors out;
  for (std::size_t i = 0; i < rain_a.size(); ++i) {
    if (!(rain_a[i] + rain_b[i] > precip_mmh)) continue;
    out.ua.push_back(mf.levels[a].u[i]);
    out.va.push_back(mf.levels[a].v[i]);
    out.ub.push_back(mf.levels[b].u[i]);
    out.vb.push_back(mf.levels[b].v[i]);
  }
  return out;
}

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> c = a;
  c.insert(c.end(), b.begin(), b.end());
  return c;
}

void check_motion_inputs(const MotionField& mf, const std::vector<RainField>& inputs) {
  if (inputs.empty()) throw InvalidArgument("motion correlation: no input frames");
  for (const auto& f : inputs)
    if (f.nz() != mf.nz() || f.ny() != mf.ny() || f.nx() != mf.nx())
      throw InvalidArgument("motion correlation: inputs do not match the motion field");
}

}  // namespace

std::optional<double> motion_level_corr(const MotionField& mf, const std::vector<RainField>& inputs, int a, int b,
                                        double precip_mmh) {
  check_motion_inputs(mf, inputs);
  if (a < 0 || b < 0 || a >= mf.nz() || b >= mf.nz()) throw InvalidArgument("motion correlation: level out of range");
  const auto v = masked_vectors(mf, summed_rain(inputs, a), summed_rain(inputs, b), a, b, precip_mmh);
  return pearson(concat(v.ua, v.va), concat(v.ub, v.vb));
}

MotionCorrResult motion_corr_matrix(const std::vector<MotionField>& mfs,
                                    const std::vector<std::vector<RainField>>& inputs, double precip_mmh) {
  if (mfs.empty() || mfs.size() != inputs.size())
    throw InvalidArgument("motion_corr_matrix: need one input sequence per motion field");
  const int nz = mfs.front().nz();
  Matrix sc(nz, nz), su(nz, nz), sv(nz, nz);
  Grid2<int> cc(nz, nz, 0), cu(nz, nz, 0), cv(nz, nz, 0);
  for (std::size_t s = 0; s < mfs.size(); ++s) {
    const MotionField& mf = mfs[s];
    if (mf.nz() != nz) throw InvalidArgument("motion_corr_matrix: fields differ in depth");
    check_motion_inputs(mf, inputs[s]);
    std::vector<Field2> rain;
    for (int z = 0; z < nz; ++z) rain.push_back(summed_rain(inputs[s], z));
    for (int i = 0; i < nz; ++i)
      for (int j = i + 1; j < nz; ++j) {
        const auto v = masked_vectors(mf, rain[i], rain[j], i, j, precip_mmh);
        auto add = [&](Matrix& sum, Grid2<int>& cnt, std::optional<double> r) {
          if (!r) return;
          sum(i, j) += *r;
          sum(j, i) += *r;
          ++cnt(i, j);
          ++cnt(j, i);
        };
        add(sc, cc, pearson(concat(v.ua, v.va), concat(v.ub, v.vb)));
        add(su, cu, pearson(v.ua, v.ub));
        add(sv, cv, pearson(v.va, v.vb));
      }
  }
  return {finish_mean(sc, cc), finish_mean(su, cu), finish_mean(sv, cv), cc};
}

// ---------------------------------------------------------------------------

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile: empty data");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile: p outside [0,1]");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("box_stats: empty data");
  std::sort(values.begin(), values.end());
  BoxStats b;
  b.n = values.size();
  b.q1 = quantile_sorted(values, 0.25);
  b.median = quantile_sorted(values, 0.5);
  b.q3 = quantile_sorted(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo = b.q1 - 1.5 * iqr, hi = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (double v : values) {
    if (v < lo || v > hi) {
      b.outliers.push_back(v);
      continue;
    }
    b.whisker_low = std::min(b.whisker_low, v);
    b.whisker_high = std::max(b.whisker_high, v);
  }
  return b;
}

std::map<int, BoxStats> monthwise_boxstats(const std::vector<TimedValue>& values) {
  std::map<int, std::vector<double>> by_month;
  for (const auto& tv : values) {
    const std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(tv.time)};
    by_month[static_cast<int>(static_cast<unsigned>(ymd.month()))].push_back(tv.value);
  }
  std::map<int, BoxStats> out;
  for (auto& [m, v] : by_month) out[m] = box_stats(std::move(v));
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> linspace_edges(double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw InvalidArgument("linspace_edges: need bins >= 1 and hi > lo");
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * i / bins;
  return e;
}

namespace {

int bin_of(const std::vector<double>& edges, double v) {
  const int bins = static_cast<int>(edges.size()) - 1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  const int idx = static_cast<int>(it - edges.begin()) - 1;
  return std::clamp(idx, 0, bins - 1);
}

}  // namespace

Histogram2D coverage_vs_corr_histogram(const std::vector<CoverageSample>& samples, std::vector<double> x_edges,
                                       std::vector<double> y_edges) {
  for (const auto* e : {&x_edges, &y_edges}) {
    if (e->size() < 2) throw InvalidArgument("histogram: need at least two edges per axis");
    for (std::size_t i = 1; i < e->size(); ++i)
      if (!((*e)[i] > (*e)[i - 1])) throw InvalidArgument("histogram: edges must increase");
  }
  Histogram2D h;
  h.counts = Grid2<int>(static_cast<int>(y_edges.size()) - 1, static_cast<int>(x_edges.size()) - 1, 0);
  for (const auto& s : samples) {
    if (!std::isfinite(s.coverage) || !std::isfinite(s.correlation)) {
      ++h.dropped;
      continue;
    }
    ++h.counts(bin_of(y_edges, s.correlation), bin_of(x_edges, s.coverage));
  }
  h.x_edges = std::move(x_edges);
  h.y_edges = std::move(y_edges);
  return h;
}

OutlierSelection rank_outliers(const std::vector<CoverageSample>& samples, std::size_t k,
                               std::chrono::seconds min_gap) {
  const std::size_t n = samples.size();
  // Competition ranks: equal values share the best rank.
  std::vector<std::size_t> by_cov(n), by_corr(n);
  std::iota(by_cov.begin(), by_cov.end(), 0);
  std::iota(by_corr.begin(), by_corr.end(), 0);
  std::sort(by_cov.begin(), by_cov.end(),
            [&](std::size_t a, std::size_t b) { return samples[a].coverage > samples[b].coverage; });
  std::sort(by_corr.begin(), by_corr.end(),
            [&](std::size_t a, std::size_t b) { return samples[a].correlation < samples[b].correlation; });
  std::vector<std::size_t> rank_sum(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t rc = r;
    while (rc > 0 && samples[by_cov[rc - 1]].coverage == samples[by_cov[r]].coverage) --rc;
    rank_sum[by_cov[r]] += rc + 1;
    std::size_t rr = r;
    while (rr > 0 && samples[by_corr[rr - 1]].correlation == samples[by_corr[r]].correlation) --rr;
    rank_sum[by_corr[r]] += rr + 1;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rank_sum[a] != rank_sum[b]) return rank_sum[a] < rank_sum[b];
    if (samples[a].time != samples[b].time) return samples[a].time < samples[b].time;
    return samples[a].id < samples[b].id;
  });

  OutlierSelection sel;
  std::vector<std::chrono::sys_seconds> taken;
  for (std::size_t i : order) {
    if (sel.ids.size() == k) break;
    bool near = false;
    for (const auto& t : taken) {
      const auto gap = samples[i].time > t ? samples[i].time - t : t - samples[i].time;
      near = near || gap < min_gap;
    }
    if (near) continue;
    sel.ids.push_back(samples[i].id);
    taken.push_back(samples[i].time);
  }
  sel.truncated = sel.ids.size() < k;
  return sel;
}

double cmax_coverage(const RadarVolume& vol, int t, double threshold_dbz) {
  std::size_t valid = 0, above = 0;
  for (int y = 0; y < vol.ny(); ++y)
    for (int x = 0; x < vol.nx(); ++x) {
      bool any = false;
      double best = kNoEchoDbz;
      for (int z = 0; z < vol.nz(); ++z)
        if (vol.level_mask(z)(y, x)) {
          any = true;
          best = std::max(best, vol.at(t, z, y, x));
        }
      if (!any) continue;
      ++valid;
      if (best > threshold_dbz) ++above;
    }
  return valid ? static_cast<double>(above) / static_cast<double>(valid) : 0.0;
}

// ---------------------------------------------------------------------------

int count_components(const Field2& field, const Mask2& mask, double threshold) {
  if (!field.same_shape(mask)) throw InvalidArgument("count_components: shape mismatch");
  Mask2 seen(field.ny(), field.nx(), 0);
  int count = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < field.ny(); ++y)
    for (int x = 0; x < field.nx(); ++x) {
      if (seen(y, x) || !mask(y, x) || !(field(y, x) >= threshold)) continue;
      ++count;
      seen(y, x) = 1;
      stack.emplace_back(y, x);
      while (!stack.empty()) {
        const auto [cy, cx] = stack.back();
        stack.pop_back();
        const int ys[4] = {cy - 1, cy + 1, cy, cy};
        const int xs[4] = {cx, cx, cx - 1, cx + 1};
        for (int k = 0; k < 4; ++k) {
          if (!field.inside(ys[k], xs[k]) || seen(ys[k], xs[k])) continue;
          if (!mask(ys[k], xs[k]) || !(field(ys[k], xs[k]) >= threshold)) continue;
          seen(ys[k], xs[k]) = 1;
          stack.emplace_back(ys[k], xs[k]);
        }
      }
    }
  return count;
}

SplitDiagnostic cell_split_diagnostic(const std::vector<RainField>& nowcast, double threshold_mmh) {
  SplitDiagnostic d;
  for (std::size_t l = 0; l < nowcast.size(); ++l) {
    const RainField r = to_space(nowcast[l], RainSpace::MMH);
    SplitLead sl;
    sl.lead = static_cast<int>(l + 1);
    for (int z = 0; z < r.nz(); ++z) sl.level_components.push_back(count_components(r.levels[z], r.masks[z], threshold_mmh));
    const RainField c = cmax(r);
    sl.cmax_components = count_components(c.levels[0], c.masks[0], threshold_mmh);
    for (std::size_t i = 0; i < c.levels[0].size(); ++i)
      if (c.masks[0][i] && c.levels[0][i] >= threshold_mmh) ++sl.cmax_rainy_cells;
    d.leads.push_back(std::move(sl));
  }
  if (!d.leads.empty()) {
    bool levels_constant = true;
    int max_cmax = d.leads.front().cmax_components;
    for (const auto& sl : d.leads) {
      levels_constant = levels_constant && sl.level_components == d.leads.front().level_components;
      max_cmax = std::max(max_cmax, sl.cmax_components);
    }
    d.artifact = levels_constant && max_cmax > d.leads.front().cmax_components;
  }
  return d;
}

}  // namespace voxflow
