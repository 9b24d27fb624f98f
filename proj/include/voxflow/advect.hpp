#pragma once

// Semi-Lagrangian extrapolation under Lagrangian persistence.

#include <vector>

#include "voxflow/grid.hpp"

namespace voxflow {

enum class Interpolation { BILINEAR };
enum class AdvectionScheme { BACKWARD_SEMI_LAGRANGIAN };

struct ExtrapolationConfig {
  int steps = 1;
  Interpolation interp = Interpolation::BILINEAR;
  OobPolicy oob = OobPolicy::ZERO;
  AdvectionScheme scheme = AdvectionScheme::BACKWARD_SEMI_LAGRANGIAN;
};

/// One backward step of a single plane: out(y,x) = field(y - v, x - u).
/// With ZERO the exterior holds `pad` (the no-rain value of the field's
/// space). The mask is carried by nearest-neighbour sampling; departure points
/// outside the grid are flagged invalid.
void advect_plane(const Field2& field, const Mask2& mask, const FlowLevel& flow, double pad, OobPolicy oob,
                  Field2& out, Mask2& out_mask);

/// One step for every level. A single-level motion field is applied to all
/// levels.
RainField advect_once(const RainField& field, const MotionField& mf, OobPolicy oob = OobPolicy::ZERO);

/// k successive applications of advect_once.
std::vector<RainField> extrapolate(const RainField& field, const MotionField& mf, int k,
                                   OobPolicy oob = OobPolicy::ZERO);
std::vector<RainField> extrapolate(const RainField& field, const MotionField& mf, const ExtrapolationConfig& cfg);

}  // namespace voxflow
