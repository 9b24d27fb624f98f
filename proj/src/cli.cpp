#include "voxflow/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "voxflow/advect.hpp"
#include "voxflow/analysis.hpp"
#include "voxflow/denoise.hpp"
#include "voxflow/flow.hpp"
#include "voxflow/io.hpp"
#include "voxflow/parallel.hpp"
#include "voxflow/report.hpp"
#include "voxflow/synth.hpp"
#include "voxflow/transform.hpp"
#include "voxflow/verify.hpp"

namespace fs = std::filesystem;

namespace voxflow {

namespace {

// Flags shared by every subcommand (and settable from the config file).
struct Common {
  std::uint64_t seed = 42;
  double beta = LossConfig{}.beta;
  std::vector<int> scales = LossConfig{}.scales;
  int iters = OptimizerConfig{}.max_iters;
  double step = OptimizerConfig{}.step_size;
  int levels = OptimizerConfig{}.coarse_to_fine_levels;
  std::vector<double> thresholds = kDefaultThresholds;
  double gap_minutes = 60.0;
  bool seed_given = false;
};

struct SynthArgs {
  std::string preset;
  std::string scenario;
  std::string output;
  int frames = 0;
  bool crop = false;
  std::string dtype = "f32";
};

struct EstimateArgs {
  std::string input;
  std::string mode = "3d";
  std::string output;
  std::string trace;
  std::string init = "pyramid";
  int inputs = 8;
  int start = 0;
  int future = 0;
  int window = 15;
  bool denoise = false;
  bool grad_check = false;
};

struct NowcastArgs {
  std::string input;
  std::string motion;
  std::string output;
  int leads = 0;
  int inputs = 8;
  int start = 0;
  bool denoise = false;
};

struct VerifyArgs {
  std::string forecast;
  std::string truth;
  std::string output;
  std::string sample_id;
  int offset = -1;
};

struct AnalyzeArgs {
  std::string dir;
  std::string which;
  std::string output;
  std::vector<double> dbz{0.0, 20.0};
  std::vector<int> pair{0, 1};
  int inputs = 8;
  int leads = 16;
  int top = 3;
  int bins = 10;
  double precip = 0.0;
  double coverage_dbz = 20.0;
};

std::string strip_rvol(const fs::path& p) {
  std::string s = p.string();
  if (s.size() > 5 && s.substr(s.size() - 5) == ".rvol") s.resize(s.size() - 5);
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

RvolDtype parse_dtype(const std::string& s) {
  if (s == "f32") return RvolDtype::F32;
  if (s == "u8") return RvolDtype::U8;
  throw UsageError("--dtype must be f32 or u8");
}

LossConfig loss_config(const Common& c) {
  LossConfig cfg;
  cfg.beta = c.beta;
  cfg.scales = c.scales;
  return cfg;
}

OptimizerConfig optimizer_config(const Common& c, const std::string& init) {
  OptimizerConfig opt;
  opt.max_iters = c.iters;
  opt.step_size = c.step;
  opt.coarse_to_fine_levels = c.levels;
  if (init == "zero")
    opt.init = InitMode::ZERO;
  else if (init == "pyramid")
    opt.init = InitMode::PYRAMID;
  else
    throw UsageError("--init must be zero or pyramid");
  return opt;
}

RadarVolume maybe_denoise(RadarVolume vol, bool denoise) {
  if (!denoise) return vol;
  if (vol.has_rho_hv()) vol = polarimetric_filter(vol);
  return morphological_clean(vol);
}

// Frames [start, start + n) clipped to the volume.
std::vector<RainField> frames(const RadarVolume& vol, int start, int n) {
  if (start < 0 || start >= vol.nt()) throw UsageError("--start outside the volume");
  std::vector<RainField> out;
  for (int t = start; t < std::min(vol.nt(), start + n); ++t) out.push_back(volume_frame_to_rain(vol, t));
  return out;
}

// ---------------------------------------------------------------------------
// synth

GaussianCell cell_from_json(const nlohmann::json& j) {
  GaussianCell c;
  c.x = j.at("x").get<double>();
  c.y = j.at("y").get<double>();
  c.amplitude_dbz = j.value("amplitude_dbz", c.amplitude_dbz);
  c.sigma = j.value("sigma", c.sigma);
  return c;
}

LevelMotion motion_from_json(const nlohmann::json& j) {
  return {j.value("u", 0.0), j.value("v", 0.0), j.value("omega", 0.0)};
}

SyntheticScenario scenario_from_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scenario " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("scenario: ") + e.what());
  }
  SyntheticScenario s;
  try {
    if (j.contains("preset")) {
      const auto p = parse_preset(j.at("preset").get<std::string>());
      if (!p) throw InvalidArgument("scenario: unknown preset");
      s = preset(*p);
    }
    s.name = j.value("name", s.name);
    if (j.contains("dims")) {
      const auto d = j.at("dims").get<std::vector<int>>();
      if (d.size() != 4) throw InvalidArgument("scenario: dims needs [T, Z, Y, X]");
      s.dims = {d[0], d[1], d[2], d[3]};
    }
    s.dt = j.value("dt", s.dt);
    if (j.contains("cells")) {
      s.cells.clear();
      for (const auto& c : j.at("cells")) s.cells.push_back(cell_from_json(c));
    }
    if (j.contains("motion")) {
      s.motion.clear();
      for (const auto& m : j.at("motion")) s.motion.push_back(motion_from_json(m));
    }
    if (j.contains("artifact_motion")) {
      s.artifact_motion.clear();
      for (const auto& m : j.at("artifact_motion")) s.artifact_motion.push_back(motion_from_json(m));
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      s.noise.speckle_prob = n.value("speckle_prob", s.noise.speckle_prob);
      s.noise.speckle_min_dbz = n.value("speckle_min_dbz", s.noise.speckle_min_dbz);
      s.noise.speckle_max_dbz = n.value("speckle_max_dbz", s.noise.speckle_max_dbz);
      if (n.contains("clutter")) {
        s.noise.clutter.clear();
        for (const auto& b : n.at("clutter"))
          s.noise.clutter.push_back({b.at("x").get<double>(), b.at("y").get<double>(), b.value("radius", 4.0),
                                     b.value("dbz", 30.0), b.value("rho_hv", 0.3)});
      }
    }
    s.background_dbz = j.value("background_dbz", s.background_dbz);
    s.echo_floor_dbz = j.value("echo_floor_dbz", s.echo_floor_dbz);
    s.amplitude_trend_dbz = j.value("amplitude_trend_dbz", s.amplitude_trend_dbz);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("scenario: ") + e.what());
  }
  return s;
}

int cmd_synth(const Common& c, const SynthArgs& a, std::ostream& out, std::ostream& err) {
  if (a.preset.empty() == a.scenario.empty()) throw UsageError("synth needs exactly one of --preset or --scenario");
  SyntheticScenario s;
  if (!a.preset.empty()) {
    const auto p = parse_preset(a.preset);
    if (!p) throw UsageError("unknown preset '" + a.preset + "'");
    s = preset(*p);
  } else {
    s = scenario_from_json(a.scenario);
  }
  if (a.crop) s = crop_scale(s);
  if (a.frames > 0) s.dims.t = a.frames;
  if (c.seed_given || !a.preset.empty()) s.seed = c.seed;
  const RvolDtype dtype = parse_dtype(a.dtype);

  const SyntheticOutput g = generate(s);
  for (const auto& w : g.warnings) err << "warning: " << w << '\n';
  const std::string stem = strip_rvol(a.output);
  const fs::path rvol = stem + ".rvol";
  const fs::path truth = stem + ".truth.rmf";
  write_rvol(rvol, g.volume, dtype);
  write_motion(truth, g.truth);
  out << "scenario " << s.name << " seed " << s.seed << '\n';
  out << "dims T=" << s.dims.t << " Z=" << s.dims.z << " Y=" << s.dims.y << " X=" << s.dims.x << " dt=" << s.dt
      << "s\n";
  out << "cells " << s.cells.size() << '\n';
  for (int z = 0; z < s.dims.z; ++z) {
    const LevelMotion m = s.level_motion(z);
    out << "level " << z << " u=" << format_number(m.u) << " v=" << format_number(m.v)
        << " omega=" << format_number(m.omega) << '\n';
  }
  out << "wrote " << rvol.string() << '\n' << "wrote " << truth.string() << '\n';
  if (g.artifact) {
    const fs::path art = stem + ".rmf";
    write_motion(art, *g.artifact);
    out << "wrote " << art.string() << " (artifact motion)\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// estimate

int cmd_estimate(const Common& c, const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.inputs < 2) throw UsageError("--inputs must be >= 2");
  if (a.future < 0) throw UsageError("--future must be >= 0");
  const RadarVolume vol = maybe_denoise(read_rvol(a.input), a.denoise);
  std::vector<RainField> inputs = frames(vol, a.start, a.inputs);
  if (inputs.size() < 2) throw InvalidArgument("estimate: fewer than two input frames in the volume");
  std::vector<RainField> future;
  if (a.future > 0 && a.start + a.inputs < vol.nt()) future = frames(vol, a.start + a.inputs, a.future);

  MotionField mf;
  std::vector<TraceEntry> trace;
  if (a.mode == "lk") {
    if (a.window < 3 || a.window % 2 == 0) throw UsageError("--window must be odd and >= 3");
    const RainField first = rain_to_dbr(cmax(inputs[inputs.size() - 2]));
    const RainField second = rain_to_dbr(cmax(inputs.back()));
    LucasKanadeResult r = estimate_lucas_kanade(first.levels[0], second.levels[0], a.window);
    if (r.all_rejected) err << "warning: every Lucas-Kanade window was rejected; zero field written\n";
    mf = std::move(r.field);
  } else if (a.mode == "3d" || a.mode == "2d-cmax") {
    if (a.mode == "2d-cmax") {
      for (auto& f : inputs) f = cmax(f);
      for (auto& f : future) f = cmax(f);
    }
    LossConfig cfg = loss_config(c);
    cfg.n_inputs = static_cast<int>(inputs.size());
    cfg.m_future = static_cast<int>(future.size());
    OptimizerConfig opt = optimizer_config(c, a.init);
    opt.grad_check = a.grad_check;
    EstimateResult r = estimate_variational(inputs, future.empty() ? nullptr : &future, cfg, opt);
    for (std::size_t z = 0; z < r.status.size(); ++z)
      if (r.status[z] == EstimateStatus::NO_SIGNAL) err << "warning: level " << z << " has no precipitation\n";
    for (std::size_t z = 0; z < r.grad_check_error.size(); ++z)
      out << "level " << z << " gradient check max relative error " << format_number(r.grad_check_error[z]) << '\n';
    mf = std::move(r.field);
    trace = std::move(r.trace);
  } else {
    throw UsageError("--mode must be 2d-cmax, 3d or lk");
  }

  write_motion(a.output, mf);
  for (int z = 0; z < mf.nz(); ++z) {
    double su = 0.0, sv = 0.0;
    for (std::size_t i = 0; i < mf.levels[z].u.size(); ++i) {
      su += mf.levels[z].u[i];
      sv += mf.levels[z].v[i];
    }
    const double n = static_cast<double>(mf.levels[z].u.size());
    out << "level " << z << " mean u=" << format_number(su / n) << " v=" << format_number(sv / n) << '\n';
  }
  if (!a.trace.empty()) {
    std::ostringstream os;
    write_trace_csv(os, trace);
    write_text(a.trace, os.str());
    out << "wrote " << a.trace << '\n';
  }
  out << "wrote " << a.output << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// nowcast

int cmd_nowcast(const NowcastArgs& a, std::ostream& out) {
  if (a.leads < 1) throw UsageError("--leads must be >= 1");
  if (a.inputs < 1) throw UsageError("--inputs must be >= 1");
  const RadarVolume vol = maybe_denoise(read_rvol(a.input), a.denoise);
  const MotionField mf = read_motion(a.motion);
  if (mf.ny() != vol.ny() || mf.nx() != vol.nx())
    throw InvalidArgument("nowcast: motion field and volume differ in horizontal shape");
  if (mf.nz() != 1 && mf.nz() != vol.nz())
    throw InvalidArgument("nowcast: motion field needs 1 level or one per volume level");
  if (a.start < 0 || a.start >= vol.nt()) throw UsageError("--start outside the volume");
  const int base = a.start + std::min(a.inputs, vol.nt() - a.start) - 1;

  const RainField last = rain_to_dbr(volume_frame_to_rain(vol, base));
  const std::vector<RainField> leads = extrapolate(last, mf, a.leads);

  RadarVolume fc(Shape4{a.leads, vol.nz(), vol.ny(), vol.nx()}, vol.z_levels(), vol.dt());
  for (int z = 0; z < vol.nz(); ++z) fc.level_mask(z) = vol.level_mask(z);
  for (int l = 0; l < a.leads; ++l) {
    const RainField r = dbr_to_rain(leads[l]);
    for (int z = 0; z < vol.nz(); ++z)
      for (int y = 0; y < vol.ny(); ++y)
        for (int x = 0; x < vol.nx(); ++x) {
          if (!r.masks[z](y, x)) fc.level_mask(z)(y, x) = 0;
          fc.at(l, z, y, x) = rain_to_dbz(r.levels[z](y, x));
        }
  }
  for (int z = 0; z < vol.nz(); ++z)
    for (int l = 0; l < a.leads; ++l)
      for (int y = 0; y < vol.ny(); ++y)
        for (int x = 0; x < vol.nx(); ++x)
          if (!fc.level_mask(z)(y, x)) fc.at(l, z, y, x) = kNoEchoDbz;
  write_rvol(a.output, fc);
  out << "extrapolated frame " << base << " over " << a.leads << " leads (" << vol.nz() << " levels, "
      << (mf.nz() == 1 ? "one shared" : "per-level") << " motion)\n";
  out << "wrote " << a.output << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const Common& c, const VerifyArgs& a, std::ostream& out) {
  const RadarVolume fc = read_rvol(a.forecast);
  const RadarVolume obs = read_rvol(a.truth);
  if (fc.ny() != obs.ny() || fc.nx() != obs.nx())
    throw InvalidArgument("verify: forecast and truth grids differ in shape");
  const int offset = a.offset >= 0 ? a.offset : obs.nt() - fc.nt();
  if (offset < 0 || offset + fc.nt() > obs.nt())
    throw InvalidArgument("verify: truth volume does not cover the forecast leads at this offset");
  std::vector<std::vector<RainField>> outputs(1), observations(1);
  for (int l = 0; l < fc.nt(); ++l) {
    outputs[0].push_back(volume_frame_to_rain(fc, l));
    observations[0].push_back(volume_frame_to_rain(obs, offset + l));
  }
  const VerificationReport report = verify_nowcast(outputs, observations, c.thresholds);
  const std::string id = a.sample_id.empty() ? fs::path(strip_rvol(a.forecast)).filename().string() : a.sample_id;
  std::ostringstream os;
  write_metrics_header(os);
  write_metrics_rows(os, id, report);
  if (a.output.empty() || a.output == "-") {
    out << os.str();
  } else {
    write_text(a.output, os.str());
    out << "wrote " << a.output << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// analyze

struct Sample {
  std::string id;
  fs::path path;
  std::chrono::sys_seconds time{};
  RadarVolume vol;
  std::optional<MotionField> motion;
};

// First run of 12 digits in the name, read as YYYYMMDDHHMM.
std::optional<std::chrono::sys_seconds> timestamp_from_name(const std::string& name) {
  using namespace std::chrono;
  for (std::size_t i = 0; i + 12 <= name.size(); ++i) {
    if (!std::all_of(name.begin() + i, name.begin() + i + 12, [](char ch) { return ch >= '0' && ch <= '9'; }))
      continue;
    const int yy = std::stoi(name.substr(i, 4));
    const unsigned mo = static_cast<unsigned>(std::stoi(name.substr(i + 4, 2)));
    const unsigned dd = static_cast<unsigned>(std::stoi(name.substr(i + 6, 2)));
    const int hh = std::stoi(name.substr(i + 8, 2));
    const int mi = std::stoi(name.substr(i + 10, 2));
    const year_month_day ymd{year{yy}, month{mo}, day{dd}};
    if (!ymd.ok() || hh > 23 || mi > 59) continue;
    return sys_days{ymd} + hours{hh} + minutes{mi};
  }
  return std::nullopt;
}

std::vector<Sample> load_dataset(const AnalyzeArgs& a, bool need_motion, std::ostream& err) {
  if (!fs::is_directory(a.dir)) throw std::runtime_error("no volumes found: " + a.dir + " is not a directory");
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(a.dir))
    if (e.is_regular_file() && e.path().extension() == ".rvol") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw std::runtime_error("no volumes found in " + a.dir);

  std::vector<Sample> samples(paths.size());
  parallel_for(static_cast<int>(paths.size()), [&](int i) {
    Sample& s = samples[i];
    s.path = paths[i];
    s.id = fs::path(strip_rvol(paths[i])).filename().string();
    s.vol = read_rvol(paths[i]);
    const std::string stem = strip_rvol(paths[i]);
    for (const std::string& cand : {stem + ".rmf", stem + ".truth.rmf"})
      if (fs::exists(cand)) {
        s.motion = read_motion(cand);
        break;
      }
  });
  // Volumes without a timestamp in the name are laid out back to back.
  std::chrono::sys_seconds fallback{};
  for (auto& s : samples) {
    if (auto t = timestamp_from_name(s.id))
      s.time = *t;
    else
      s.time = fallback;
    fallback += std::chrono::seconds(static_cast<long long>(s.vol.nt() * s.vol.dt()));
  }
  if (need_motion) {
    std::vector<Sample> kept;
    for (auto& s : samples) {
      if (!s.motion) {
        err << "warning: no motion file for " << s.id << "; skipped\n";
        continue;
      }
      if (s.motion->ny() != s.vol.ny() || s.motion->nx() != s.vol.nx() ||
          (s.motion->nz() != s.vol.nz() && s.motion->nz() != 1))
        throw InvalidArgument("analyze: motion field of " + s.id + " does not match its volume");
      kept.push_back(std::move(s));
    }
    if (kept.empty()) throw std::runtime_error("no volumes with motion files found in " + a.dir);
    return kept;
  }
  return samples;
}

std::vector<std::string> index_labels(int n, const std::string& prefix) {
  std::vector<std::string> l;
  for (int i = 0; i < n; ++i) l.push_back(prefix + std::to_string(i));
  return l;
}

void emit(const fs::path& dir, const std::string& name, const std::string& text, std::ostream& out) {
  write_text(dir / name, text);
  out << "wrote " << (dir / name).string() << '\n';
}

std::vector<RainField> sample_inputs(const Sample& s, int n) { return frames(s.vol, 0, n); }

std::vector<CoverageSample> coverage_samples(const std::vector<Sample>& ds, const AnalyzeArgs& a) {
  std::vector<CoverageSample> out(ds.size());
  parallel_for(static_cast<int>(ds.size()), [&](int i) {
    const Sample& s = ds[i];
    const int za = a.pair[0], zb = a.pair[1];
    if (za >= s.motion->nz() || zb >= s.motion->nz()) throw InvalidArgument("analyze: --pair level out of range");
    const auto inputs = sample_inputs(s, a.inputs);
    out[i].id = s.id;
    out[i].time = s.time;
    out[i].coverage = cmax_coverage(s.vol, static_cast<int>(inputs.size()) - 1, a.coverage_dbz);
    const auto r = motion_level_corr(*s.motion, inputs, za, zb, a.precip);
    out[i].correlation = r ? *r : std::nan("");
  });
  return out;
}

int cmd_analyze(const Common& c, const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  if (a.pair.size() != 2) throw UsageError("--pair needs two level indices");
  if (a.inputs < 2) throw UsageError("--inputs must be >= 2");
  const fs::path outdir = a.output.empty() ? fs::path(a.dir) : fs::path(a.output);

  if (a.which == "ratios") {
    const auto ds = load_dataset(a, false, err);
    if (!fs::is_directory(outdir)) fs::create_directories(outdir);
    std::ostringstream csv;
    csv << "sample_id,level,threshold_dbz,ratio\n";
    const int nz = ds.front().vol.nz();
    Matrix mean(nz, static_cast<int>(a.dbz.size()));
    std::vector<TimedValue> low;
    for (const auto& s : ds) {
      const Matrix r = rainy_ratio(s.vol, a.dbz);
      for (int z = 0; z < r.ny(); ++z)
        for (int k = 0; k < r.nx(); ++k) {
          csv << s.id << ',' << z << ',' << format_number(a.dbz[k]) << ',' << format_number(r(z, k)) << '\n';
          if (s.vol.nz() == nz) mean(z, k) += r(z, k) / static_cast<double>(ds.size());
        }
      low.push_back({s.time, r(0, r.nx() - 1)});
    }
    emit(outdir, "ratios.csv", csv.str(), out);
    std::vector<LineSeries> series;
    for (int k = 0; k < mean.nx(); ++k) {
      LineSeries ls{">" + format_number(a.dbz[k]) + " dBZ", {}, {}};
      for (int z = 0; z < nz; ++z) {
        ls.x.push_back(z);
        ls.y.push_back(mean(z, k));
      }
      series.push_back(std::move(ls));
    }
    emit(outdir, "ratios.svg", svg_lines(series, "Mean rainy-pixel ratio per level", "level", "ratio"), out);
    const auto months = monthwise_boxstats(low);
    std::ostringstream bcsv;
    write_boxstats_csv(bcsv, months);
    emit(outdir, "ratios_months.csv", bcsv.str(), out);
    emit(outdir, "ratios_months.svg", svg_boxplot(months, "Lowest-level rainy-pixel ratio by month"), out);
    return 0;
  }
  if (a.which == "refl-corr") {
    const auto ds = load_dataset(a, false, err);
    if (!fs::is_directory(outdir)) fs::create_directories(outdir);
    std::vector<RadarVolume> vols;
    for (const auto& s : ds) vols.push_back(s.vol);
    std::size_t used = 0;
    const Matrix m = reflectivity_corr_matrix(vols, 0.0, &used);
    std::ostringstream csv;
    write_matrix_csv(csv, m, index_labels(m.ny(), "z"), index_labels(m.nx(), "z"), "level");
    emit(outdir, "refl_corr.csv", csv.str(), out);
    emit(outdir, "refl_corr.svg", svg_heatmap(m, "Reflectivity correlation between levels", -1.0, 1.0), out);
    out << "qualifying frames " << used << '\n';
    return 0;
  }
  if (a.which == "motion-corr") {
    const auto ds = load_dataset(a, true, err);
    if (!fs::is_directory(outdir)) fs::create_directories(outdir);
    std::vector<MotionField> mfs;
    std::vector<std::vector<RainField>> inputs;
    for (const auto& s : ds) {
      mfs.push_back(*s.motion);
      inputs.push_back(sample_inputs(s, a.inputs));
    }
    const MotionCorrResult r = motion_corr_matrix(mfs, inputs, a.precip);
    const auto labels = index_labels(r.combined.ny(), "z");
    for (const auto& [name, m] : {std::pair<std::string, const Matrix*>{"motion_corr", &r.combined},
                                  {"motion_corr_u", &r.u_only},
                                  {"motion_corr_v", &r.v_only}}) {
      std::ostringstream csv;
      write_matrix_csv(csv, *m, labels, labels, "level");
      emit(outdir, name + ".csv", csv.str(), out);
    }
    emit(outdir, "motion_corr.svg", svg_heatmap(r.combined, "Motion-field correlation between levels", -1.0, 1.0),
         out);
    std::vector<TimedValue> tv;
    for (const auto& cs : coverage_samples(ds, a))
      if (std::isfinite(cs.correlation)) tv.push_back({cs.time, cs.correlation});
    if (!tv.empty()) {
      const auto months = monthwise_boxstats(tv);
      std::ostringstream bcsv;
      write_boxstats_csv(bcsv, months);
      emit(outdir, "motion_corr_months.csv", bcsv.str(), out);
      emit(outdir, "motion_corr_months.svg", svg_boxplot(months, "Level-pair motion correlation by month"), out);
    }
    return 0;
  }
  if (a.which == "histogram" || a.which == "outliers") {
    const auto ds = load_dataset(a, true, err);
    if (!fs::is_directory(outdir)) fs::create_directories(outdir);
    const auto samples = coverage_samples(ds, a);
    std::ostringstream scsv;
    scsv << "sample_id,coverage,correlation\n";
    for (const auto& s : samples)
      scsv << s.id << ',' << format_number(s.coverage) << ',' << format_number(s.correlation) << '\n';
    emit(outdir, "samples.csv", scsv.str(), out);
    if (a.which == "histogram") {
      if (a.bins < 1) throw UsageError("--bins must be >= 1");
      const Histogram2D h =
          coverage_vs_corr_histogram(samples, linspace_edges(0.0, 1.0, a.bins), linspace_edges(-1.0, 1.0, a.bins));
      std::ostringstream hcsv;
      write_histogram_csv(hcsv, h);
      emit(outdir, "histogram.csv", hcsv.str(), out);
      Matrix dens(h.counts.ny(), h.counts.nx());
      double peak = 1.0;
      for (std::size_t i = 0; i < h.counts.size(); ++i) peak = std::max(peak, static_cast<double>(h.counts[i]));
      for (int i = 0; i < dens.ny(); ++i)
        for (int j = 0; j < dens.nx(); ++j) dens(dens.ny() - 1 - i, j) = h.counts(i, j);
      emit(outdir, "histogram.svg", svg_heatmap(dens, "Coverage (x) vs motion correlation (y, top = 1)", 0.0, peak),
           out);
      if (h.dropped) err << "warning: " << h.dropped << " samples without a defined correlation\n";
    } else {
      if (a.top < 1) throw UsageError("--top must be >= 1");
      const auto gap = std::chrono::seconds(static_cast<long long>(std::llround(c.gap_minutes * 60.0)));
      std::vector<CoverageSample> finite;
      for (const auto& s : samples)
        if (std::isfinite(s.correlation)) finite.push_back(s);
      const OutlierSelection sel = rank_outliers(finite, static_cast<std::size_t>(a.top), gap);
      std::ostringstream ocsv;
      ocsv << "rank,sample_id\n";
      for (std::size_t i = 0; i < sel.ids.size(); ++i) ocsv << i + 1 << ',' << sel.ids[i] << '\n';
      emit(outdir, "outliers.csv", ocsv.str(), out);
      if (sel.truncated) err << "warning: fewer than " << a.top << " samples selected\n";
    }
    return 0;
  }
  if (a.which == "split") {
    if (a.leads < 1) throw UsageError("--leads must be >= 1");
    const auto ds = load_dataset(a, true, err);
    if (!fs::is_directory(outdir)) fs::create_directories(outdir);
    std::vector<SplitDiagnostic> diags(ds.size());
    parallel_for(static_cast<int>(ds.size()), [&](int i) {
      const auto inputs = sample_inputs(ds[i], a.inputs);
      const auto leads = extrapolate(rain_to_dbr(inputs.back()), *ds[i].motion, a.leads);
      diags[i] = cell_split_diagnostic(leads, c.thresholds.front());
    });
    std::ostringstream csv;
    csv << "sample_id,lead_steps,cmax_components,cmax_rainy_cells,level_components\n";
    std::vector<LineSeries> series;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      LineSeries ls{ds[i].id, {}, {}};
      for (const auto& l : diags[i].leads) {
        csv << ds[i].id << ',' << l.lead << ',' << l.cmax_components << ',' << l.cmax_rainy_cells << ',';
        for (std::size_t z = 0; z < l.level_components.size(); ++z) csv << (z ? ";" : "") << l.level_components[z];
        csv << '\n';
        ls.x.push_back(l.lead);
        ls.y.push_back(l.cmax_components);
      }
      series.push_back(std::move(ls));
      out << ds[i].id << ": " << (diags[i].artifact ? "cell-splitting artifact detected" : "no splitting") << '\n';
    }
    emit(outdir, "split.csv", csv.str(), out);
    emit(outdir, "split.svg", svg_lines(series, "CMAX connected components per lead", "lead", "components"), out);
    return 0;
  }
  throw UsageError("--which must be ratios, refl-corr, motion-corr, histogram, outliers or split");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Volumetric radar motion estimation and nowcasting", "voxflow"};
  app.set_config("--config", "", "Flat key=value file with default values for the options")->check(CLI::ExistingFile);
  app.require_subcommand(1);

  Common c;
  app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app.add_option("--beta", c.beta, "Weight of the divergence penalty, in (0,1)")->capture_default_str();
  app.add_option("--scales", c.scales, "Pooling factors of the multi-scale loss")->delimiter(',')->capture_default_str();
  app.add_option("--iters", c.iters, "Iterations per pyramid level")->capture_default_str();
  app.add_option("--step", c.step, "Initial step size")->capture_default_str();
  app.add_option("--levels", c.levels, "Coarse-to-fine pyramid levels")->capture_default_str();
  app.add_option("--threshold", c.thresholds, "Rain thresholds in mm/h")->delimiter(',')->capture_default_str();
  app.add_option("--gap-minutes", c.gap_minutes, "Minimum time between selected outliers")->capture_default_str();

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario");
  synth->fallthrough();
  synth->add_option("--preset", sa.preset, "uniform, rotation, shear2, shear8, noisy or split");
  synth->add_option("--scenario", sa.scenario, "JSON scenario file")->check(CLI::ExistingFile);
  synth->add_option("-o,--output", sa.output, "Output .rvol path")->required();
  synth->add_option("--frames", sa.frames, "Override the number of frames");
  synth->add_flag("--crop", sa.crop, "Scale up to the 24 x 512 x 512 crop geometry");
  synth->add_option("--dtype", sa.dtype, "f32 or u8")->capture_default_str();

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Estimate a motion field");
  est->fallthrough();
  est->add_option("input", ea.input, "Input .rvol")->required();
  est->add_option("--mode", ea.mode, "2d-cmax, 3d or lk")->capture_default_str();
  est->add_option("-o,--output", ea.output, "Output motion file")->required();
  est->add_option("--trace", ea.trace, "Loss trace CSV");
  est->add_option("--inputs", ea.inputs, "Number of input frames")->capture_default_str();
  est->add_option("--start", ea.start, "First input frame")->capture_default_str();
  est->add_option("--future", ea.future, "Future frames added to the loss (fit mode)")->capture_default_str();
  est->add_option("--init", ea.init, "zero or pyramid")->capture_default_str();
  est->add_option("--window", ea.window, "Lucas-Kanade window")->capture_default_str();
  est->add_flag("--denoise", ea.denoise, "Polarimetric and morphological cleaning first");
  est->add_flag("--grad-check", ea.grad_check, "Validate gradients against finite differences");

  NowcastArgs na;
  auto* now = app.add_subcommand("nowcast", "Extrapolate the last input frame");
  now->fallthrough();
  now->add_option("input", na.input, "Input .rvol")->required();
  now->add_option("--motion", na.motion, "Motion file")->required();
  now->add_option("--leads", na.leads, "Number of lead times")->required();
  now->add_option("-o,--output", na.output, "Forecast .rvol")->required();
  now->add_option("--inputs", na.inputs, "Number of input frames")->capture_default_str();
  now->add_option("--start", na.start, "First input frame")->capture_default_str();
  now->add_flag("--denoise", na.denoise, "Polarimetric and morphological cleaning first");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Score a forecast against observations");
  ver->fallthrough();
  ver->add_option("forecast", va.forecast, "Forecast .rvol")->required();
  ver->add_option("--truth", va.truth, "Observed .rvol")->required();
  ver->add_option("--offset", va.offset, "Truth frame matching lead 1 (default: forecast covers the tail)");
  ver->add_option("-o,--output", va.output, "Metrics CSV (default stdout)");
  ver->add_option("--sample-id", va.sample_id, "Value of the sample_id column");

  AnalyzeArgs aa;
  auto* ana = app.add_subcommand("analyze", "Dataset and motion-field analyses");
  ana->fallthrough();
  ana->add_option("dir", aa.dir, "Directory of .rvol files")->required();
  ana->add_option("--which", aa.which, "ratios, refl-corr, motion-corr, histogram, outliers or split")->required();
  ana->add_option("-o,--output", aa.output, "Output directory (default: the dataset directory)");
  ana->add_option("--dbz", aa.dbz, "Reflectivity thresholds for ratios")->delimiter(',')->capture_default_str();
  ana->add_option("--pair", aa.pair, "Level pair for correlation samples")->delimiter(',')->capture_default_str();
  ana->add_option("--inputs", aa.inputs, "Input frames per sample")->capture_default_str();
  ana->add_option("--leads", aa.leads, "Leads for the split diagnostic")->capture_default_str();
  ana->add_option("--top", aa.top, "Number of outliers")->capture_default_str();
  ana->add_option("--bins", aa.bins, "Histogram bins per axis")->capture_default_str();
  ana->add_option("--precip", aa.precip, "Precipitation mask threshold (mm/h, summed)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  c.seed_given = app.count("--seed") > 0;

  try {
    if (*synth) return cmd_synth(c, sa, out, err);
    if (*est) return cmd_estimate(c, ea, out, err);
    if (*now) return cmd_nowcast(na, out);
    if (*ver) return cmd_verify(c, va, out);
    if (*ana) return cmd_analyze(c, aa, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    err << "format error in field '" << e.field << "': " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"voxflow"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace voxflow
