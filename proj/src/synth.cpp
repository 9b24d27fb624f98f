#include "voxflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace voxflow {

namespace {

constexpr double kRainRho = 0.98;
constexpr double kSpeckleRho = 0.9;

struct Point {
  double x, y;
};

Point step(const LevelMotion& m, Point p, double cx, double cy) {
  const double c = std::cos(m.omega), s = std::sin(m.omega);
  const double dx = p.x - cx, dy = p.y - cy;
  return {c * dx - s * dy + cx + m.u, s * dx + c * dy + cy + m.v};
}

// Uniform double in [0,1) from the raw engine output, independent of the
// standard library's distribution implementations.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<double> default_altitudes(int nz) {
  std::vector<double> z(static_cast<std::size_t>(nz));
  for (int i = 0; i < nz; ++i) z[i] = 8000.0 * (i + 1) / nz;
  return z;
}

void SyntheticScenario::validate() const {
  if (dims.t < 1 || dims.z < 1 || dims.y < 1 || dims.x < 1) throw InvalidArgument("scenario: dimensions must be >= 1");
  if (!(dt > 0)) throw InvalidArgument("scenario: dt must be positive");
  if (motion.size() != 1 && static_cast<int>(motion.size()) != dims.z)
    throw InvalidArgument("scenario: motion needs one entry or one per level");
  if (!artifact_motion.empty() && artifact_motion.size() != 1 && static_cast<int>(artifact_motion.size()) != dims.z)
    throw InvalidArgument("scenario: artifact motion needs one entry or one per level");
  for (const auto& c : cells) {
    if (!(c.amplitude_dbz >= 0.0 && c.amplitude_dbz <= 70.0))
      throw InvalidArgument("scenario: cell amplitude outside [0,70] dBZ");
    if (!(c.sigma > 0.0)) throw InvalidArgument("scenario: cell sigma must be positive");
    if (!std::isfinite(c.x) || !std::isfinite(c.y)) throw InvalidArgument("scenario: non-finite cell position");
  }
  for (const auto& m : motion)
    if (!std::isfinite(m.u) || !std::isfinite(m.v) || !std::isfinite(m.omega))
      throw InvalidArgument("scenario: non-finite velocity");
  if (!(noise.speckle_prob >= 0.0 && noise.speckle_prob <= 1.0))
    throw InvalidArgument("scenario: speckle probability outside [0,1]");
  for (const auto& b : noise.clutter)
    if (!(b.rho_hv >= 0.0 && b.rho_hv <= 1.0)) throw InvalidArgument("scenario: clutter rho_hv outside [0,1]");
}

LevelMotion SyntheticScenario::level_motion(int z) const { return motion.size() == 1 ? motion.front() : motion.at(z); }

FlowLevel motion_field_for(const LevelMotion& m, int ny, int nx) {
  FlowLevel f{Field2(ny, nx), Field2(ny, nx)};
  const double cx = (nx - 1) / 2.0, cy = (ny - 1) / 2.0;
  const double c = std::cos(m.omega), s = std::sin(m.omega);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      // departure = R^-1 (p - t - c) + c
      const double qx = x - m.u - cx, qy = y - m.v - cy;
      const double dx = c * qx + s * qy + cx;
      const double dy = -s * qx + c * qy + cy;
      f.u(y, x) = x - dx;
      f.v(y, x) = y - dy;
    }
  return f;
}

SyntheticOutput generate(const SyntheticScenario& s) {
  s.validate();
  const Shape4 d = s.dims;
  SyntheticOutput out;
  out.clean = RadarVolume(d, default_altitudes(d.z), s.dt);

  std::vector<GaussianCell> cells = s.cells;
  for (auto& c : cells) {
    if (c.x < 0 || c.y < 0 || c.x > d.x - 1 || c.y > d.y - 1) {
      out.warnings.push_back("cell centre outside the grid; clipped");
      c.x = std::clamp(c.x, 0.0, d.x - 1.0);
      c.y = std::clamp(c.y, 0.0, d.y - 1.0);
    }
  }

  const double cx = (d.x - 1) / 2.0, cy = (d.y - 1) / 2.0;
  for (int z = 0; z < d.z; ++z) {
    const LevelMotion m = s.level_motion(z);
    std::vector<Point> pos;
    for (const auto& c : cells) pos.push_back({c.x, c.y});
    for (int t = 0; t < d.t; ++t) {
      for (int y = 0; y < d.y; ++y)
        for (int x = 0; x < d.x; ++x) {
          double best = kNoEchoDbz;
          for (std::size_t i = 0; i < cells.size(); ++i) {
            const double amp = std::clamp(cells[i].amplitude_dbz + s.amplitude_trend_dbz * t, 0.0, 70.0);
            const double dx = x - pos[i].x, dy = y - pos[i].y;
            const double sig = cells[i].sigma;
            const double val = amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sig * sig));
            if (val >= s.echo_floor_dbz) best = std::max(best, val);
          }
          out.clean.at(t, z, y, x) = std::max(best, s.background_dbz);
        }
      for (auto& p : pos) p = step(m, p, cx, cy);
    }
  }

  out.volume = out.clean;
  std::vector<double> rho(d.count(), kRainRho);
  std::mt19937_64 rng(s.seed);
  if (s.noise.speckle_prob > 0.0) {
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (unit(rng) >= s.noise.speckle_prob) continue;
      const double v = s.noise.speckle_min_dbz + unit(rng) * (s.noise.speckle_max_dbz - s.noise.speckle_min_dbz);
      if (out.volume.data()[i] > kNoEchoDbz) continue;  // speckle only shows over empty sky
      out.volume.data()[i] = v;
      rho[i] = kSpeckleRho;
    }
  }
  for (const auto& b : s.noise.clutter)
    for (int t = 0; t < d.t; ++t)
      for (int z = 0; z < d.z; ++z)
        for (int y = 0; y < d.y; ++y)
          for (int x = 0; x < d.x; ++x) {
            const double dx = x - b.x, dy = y - b.y;
            if (dx * dx + dy * dy > b.radius * b.radius) continue;
            const std::size_t i = out.volume.index(t, z, y, x);
            out.volume.data()[i] = b.dbz;
            rho[i] = b.rho_hv;
          }
  out.volume.set_rho_hv(std::move(rho));

  out.truth = MotionField(d.z, d.y, d.x);
  for (int z = 0; z < d.z; ++z) out.truth.levels[z] = motion_field_for(s.level_motion(z), d.y, d.x);
  if (!s.artifact_motion.empty()) {
    MotionField a(d.z, d.y, d.x);
    for (int z = 0; z < d.z; ++z)
      a.levels[z] = motion_field_for(s.artifact_motion.size() == 1 ? s.artifact_motion.front() : s.artifact_motion[z],
                                     d.y, d.x);
    out.artifact = std::move(a);
  }
  return out;
}

// ---------------------------------------------------------------------------

SyntheticScenario preset(Preset p) {
  SyntheticScenario s;
  s.name = preset_name(p);
  switch (p) {
    case Preset::UNIFORM:
      s.dims = {8, 8, 128, 128};
      s.motion = {{3.0, -2.0, 0.0}};
      s.cells = {{30, 70, 48, 9}, {62, 96, 40, 7}, {50, 40, 44, 8}, {88, 76, 36, 6}};
      break;
    case Preset::ROTATION:
      s.dims = {8, 8, 128, 128};
      s.motion = {{0.0, 0.0, 0.03}};
      s.cells = {{64, 30, 45, 8}, {98, 64, 40, 7}, {64, 98, 42, 9}, {30, 64, 38, 6}};
      break;
    case Preset::SHEAR2:
      s.dims = {24, 2, 128, 128};
      s.motion = {{3.0, 0.0, 0.0}, {0.0, 3.0, 0.0}};
      s.cells = {{16, 16, 46, 7}, {34, 30, 40, 5}};
      break;
    case Preset::SHEAR8: {
      // Translation veers from east at the lowest level to north at the top,
      // on top of a common rotation shared by every level.
      s.dims = {8, 8, 128, 128};
      s.background_dbz = 15.0;
      s.cells = {{40, 40, 45, 8}, {80, 56, 42, 7}, {56, 84, 40, 9}};
      for (int z = 0; z < 8; ++z) {
        const double a = std::numbers::pi / 2.0 * z / 7.0;
        s.motion.push_back({3.0 * std::cos(a), 3.0 * std::sin(a), 0.038});
      }
      break;
    }
    case Preset::NOISY:
      s.dims = {8, 2, 128, 128};
      s.motion = {{2.0, 1.0, 0.0}};
      s.cells = {{36, 40, 45, 8}, {70, 80, 40, 7}, {50, 90, 38, 6}};
      s.noise.speckle_prob = 0.001;
      s.noise.clutter = {{100, 24, 5, 30, 0.3}};
      break;
    case Preset::SPLIT:
      // One coherent cell; the artifact motion drives its levels apart.
      s.dims = {24, 2, 128, 128};
      s.motion = {{1.5, 0.0, 0.0}};
      s.artifact_motion = {{2.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
      s.cells = {{20, 64, 45, 2}};
      break;
  }
  return s;
}

std::optional<Preset> parse_preset(const std::string& name) {
  std::string n;
  for (char c : name) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (n == "uniform") return Preset::UNIFORM;
  if (n == "rotation") return Preset::ROTATION;
  if (n == "shear2") return Preset::SHEAR2;
  if (n == "shear8") return Preset::SHEAR8;
  if (n == "noisy") return Preset::NOISY;
  if (n == "split") return Preset::SPLIT;
  return std::nullopt;
}

std::string preset_name(Preset p) {
  switch (p) {
    case Preset::UNIFORM: return "uniform";
    case Preset::ROTATION: return "rotation";
    case Preset::SHEAR2: return "shear2";
    case Preset::SHEAR8: return "shear8";
    case Preset::NOISY: return "noisy";
    case Preset::SPLIT: return "split";
  }
  return "custom";
}

SyntheticScenario crop_scale(SyntheticScenario s) {
  const double fy = 512.0 / s.dims.y, fx = 512.0 / s.dims.x;
  s.dims.t = 24;
  s.dims.y = 512;
  s.dims.x = 512;
  for (auto& c : s.cells) {
    c.x *= fx;
    c.y *= fy;
    c.sigma *= std::sqrt(fx * fy);
  }
  for (auto& b : s.noise.clutter) {
    b.x *= fx;
    b.y *= fy;
    b.radius *= std::sqrt(fx * fy);
  }
  s.name += "-crop";
  return s;
}

}  // namespace voxflow
