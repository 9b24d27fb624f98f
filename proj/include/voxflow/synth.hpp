#pragma once

// Synthetic volumetric scenes with exact ground-truth motion.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "voxflow/grid.hpp"

namespace voxflow {

/// Isotropic Gaussian reflectivity cell; position in grid cells at t = 0.
struct GaussianCell {
  double x = 0.0;
  double y = 0.0;
  double amplitude_dbz = 40.0;
  double sigma = 6.0;
};

/// Per-level motion: a translation plus a rigid rotation about the domain
/// centre, both per time step. The point q moves to R(omega)(q - c) + c + t.
struct LevelMotion {
  double u = 0.0;
  double v = 0.0;
  double omega = 0.0;  // rad / step
};

/// Stationary non-meteorological echo with low copolar correlation.
struct ClutterBlob {
  double x = 0.0;
  double y = 0.0;
  double radius = 4.0;
  double dbz = 30.0;
  double rho_hv = 0.3;
};

struct NoiseSpec {
  double speckle_prob = 0.0;
  double speckle_min_dbz = 10.0;
  double speckle_max_dbz = 35.0;
  std::vector<ClutterBlob> clutter;
};

struct SyntheticScenario {
  std::string name = "custom";
  Shape4 dims{8, 8, 128, 128};
  double dt = 300.0;
  std::vector<GaussianCell> cells;
  std::vector<LevelMotion> motion;           // one per level, or one for all
  NoiseSpec noise;
  double background_dbz = kNoEchoDbz;        // uniform stratiform echo
  double echo_floor_dbz = 1.0;               // weaker cell values are no echo
  double amplitude_trend_dbz = 0.0;          // per-step change; non-zero breaks persistence
  std::vector<LevelMotion> artifact_motion;  // optional non-physical per-level motion
  std::uint64_t seed = 42;

  void validate() const;
  LevelMotion level_motion(int z) const;
};

struct SyntheticOutput {
  RadarVolume volume;   // with noise and clutter (rho_hv attached)
  RadarVolume clean;    // same scene without noise
  MotionField truth;    // per-level ground truth
  std::optional<MotionField> artifact;
  std::vector<std::string> warnings;
};

/// Renders the scenario. Cells are evaluated analytically at their advected
/// centres, so the frames carry no interpolation error.
SyntheticOutput generate(const SyntheticScenario& s);

/// Ground-truth displacement field of one level motion: the backward warp
/// p -> p - u(p) lands exactly on the departure point.
FlowLevel motion_field_for(const LevelMotion& m, int ny, int nx);

enum class Preset { UNIFORM, ROTATION, SHEAR2, SHEAR8, NOISY, SPLIT };

SyntheticScenario preset(Preset p);
std::optional<Preset> parse_preset(const std::string& name);
std::string preset_name(Preset p);

/// Enlarges a scenario to 24 frames of 512 x 512 (positions and sizes scaled).
SyntheticScenario crop_scale(SyntheticScenario s);

/// Altitudes (m) used for Z evenly spaced levels up to 8 km.
std::vector<double> default_altitudes(int nz);

}  // namespace voxflow
