#include <doctest.h>

#include <cmath>

#include "voxflow/advect.hpp"
#include "voxflow/synth.hpp"

using namespace voxflow;

namespace {

SyntheticScenario small(LevelMotion m) {
  SyntheticScenario s;
  s.dims = {4, 2, 48, 48};
  s.cells = {{20, 24, 40, 4}};
  s.motion = {m};
  return s;
}

// MAE of frame t advected by the ground truth against frame t + 1, over cells
// with echo in either frame.
double truth_consistency(const SyntheticOutput& o, int z) {
  const RadarVolume& v = o.clean;
  double err = 0.0;
  std::size_t n = 0;
  for (int t = 0; t + 1 < v.nt(); ++t) {
    Field2 out;
    Mask2 out_mask;
    advect_plane(v.slice(t, z), full_mask(v.ny(), v.nx()), o.truth.levels[z], kNoEchoDbz, OobPolicy::ZERO, out,
                 out_mask);
    const Field2 next = v.slice(t + 1, z);
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (!out_mask[i] || (next[i] <= 0.0 && out[i] <= 0.0)) continue;
      err += std::abs(std::max(out[i], 0.0) - std::max(next[i], 0.0));
      ++n;
    }
  }
  return n ? err / n : 0.0;
}

}  // namespace

TEST_CASE("generate: the same seed gives identical output") {
  const SyntheticScenario s = preset(Preset::NOISY);
  const SyntheticOutput a = generate(s), b = generate(s);
  CHECK(a.volume.data() == b.volume.data());
  CHECK(a.volume.rho_hv() == b.volume.rho_hv());
  SyntheticScenario s2 = s;
  s2.seed = 7;
  CHECK(generate(s2).volume.data() != a.volume.data());
}

TEST_CASE("generate: zero velocity gives identical frames") {
  const SyntheticOutput o = generate(small({0, 0, 0}));
  for (int t = 1; t < 4; ++t)
    for (int z = 0; z < 2; ++z) CHECK(o.clean.slice(t, z) == o.clean.slice(0, z));
  for (double u : o.truth.levels[0].u.values()) CHECK(u == doctest::Approx(0.0));
}

TEST_CASE("generate: a unit eastward velocity shifts frames by one column") {
  const SyntheticOutput o = generate(small({1, 0, 0}));
  for (int y = 0; y < 48; ++y)
    for (int x = 1; x < 48; ++x) CHECK(o.clean.at(1, 0, y, x) == doctest::Approx(o.clean.at(0, 0, y, x - 1)));
  for (double u : o.truth.levels[1].u.values()) CHECK(u == doctest::Approx(1.0));
}

TEST_CASE("presets have the documented shape") {
  for (Preset p : {Preset::UNIFORM, Preset::ROTATION, Preset::SHEAR2, Preset::SHEAR8, Preset::NOISY, Preset::SPLIT}) {
    const SyntheticScenario s = preset(p);
    CHECK(parse_preset(preset_name(p)) == p);
    CHECK_NOTHROW(s.validate());
  }
  CHECK(!parse_preset("nope"));
  CHECK(preset(Preset::SHEAR2).dims.z == 2);
  CHECK(preset(Preset::SHEAR8).dims.z == 8);

  const SyntheticOutput noisy = generate(preset(Preset::NOISY));
  CHECK(noisy.volume.has_rho_hv());
  CHECK(noisy.volume.data() != noisy.clean.data());
  const SyntheticOutput split = generate(preset(Preset::SPLIT));
  CHECK(split.artifact.has_value());
}

TEST_CASE("ground truth is consistent with the rendered frames") {
  for (Preset p : {Preset::UNIFORM, Preset::ROTATION, Preset::SHEAR2, Preset::SHEAR8}) {
    SyntheticScenario s = preset(p);
    s.dims.t = 4;
    const SyntheticOutput o = generate(s);
    double peak = 0.0;
    for (double v : o.clean.data()) peak = std::max(peak, v);
    for (int z = 0; z < o.clean.nz(); ++z) CHECK(truth_consistency(o, z) < 0.02 * peak);
  }
}

TEST_CASE("motion_field_for: rotation lands on the departure point") {
  const LevelMotion m{1.0, -0.5, 0.05};
  const FlowLevel f = motion_field_for(m, 33, 33);
  const double c = 16.0;
  for (int y : {3, 16, 30})
    for (int x : {2, 16, 29}) {
      const double dx = x - f.u(y, x), dy = y - f.v(y, x);
      // Moving the departure point forward one step returns to (x, y).
      const double fx = std::cos(m.omega) * (dx - c) - std::sin(m.omega) * (dy - c) + c + m.u;
      const double fy = std::sin(m.omega) * (dx - c) + std::cos(m.omega) * (dy - c) + c + m.v;
      CHECK(fx == doctest::Approx(x));
      CHECK(fy == doctest::Approx(y));
    }
}

TEST_CASE("scenario validation") {
  SyntheticScenario s = small({0, 0, 0});
  s.cells[0].amplitude_dbz = 90;
  CHECK_THROWS_AS(generate(s), InvalidArgument);
  s = small({0, 0, 0});
  s.motion = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  CHECK_THROWS_AS(generate(s), InvalidArgument);
  s = small({0, 0, 0});
  s.cells[0].x = -10;
  CHECK(!generate(s).warnings.empty());
}

TEST_CASE("crop_scale enlarges the scene") {
  const SyntheticScenario s = crop_scale(preset(Preset::UNIFORM));
  CHECK(s.dims.t == 24);
  CHECK(s.dims.y == 512);
  CHECK(s.cells[0].x == doctest::Approx(120.0));
}
