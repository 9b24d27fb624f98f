#pragma once

// Quality control: polarimetric filtering and per-level morphological
// speckle removal.

#include "voxflow/grid.hpp"

namespace voxflow {

/// Sets echo to no-echo wherever rho_hv < rho_min. Requires rho_hv.
RadarVolume polarimetric_filter(const RadarVolume& vol, double rho_min = 0.6);

struct MorphologyConfig {
  int open_iters = 2;         // erosions, then as many dilations
  double protect_dbz = 40.0;  // cores above this survive the opening
  int dilate_iters = 2;       // growth of the protection mask
  double echo_dbz = 0.0;      // "non-zero echo" means strictly above this
};

/// Binary erosion / dilation with the 3x3 cross; cells outside the grid count
/// as background.
Mask2 erode_cross(const Mask2& m);
Mask2 dilate_cross(const Mask2& m);

/// `iters` erosions followed by `iters` dilations.
Mask2 binary_open(const Mask2& m, int iters);

/// Cleans one 2-D reflectivity slice.
Field2 morphological_clean(const Field2& dbz, const MorphologyConfig& cfg = {});

/// Applies the slice cleaner independently to every (t, z) plane.
RadarVolume morphological_clean(const RadarVolume& vol, const MorphologyConfig& cfg = {});

}  // namespace voxflow
