#pragma once

// Reflectivity <-> rain rate <-> dBR conversions.

#include "voxflow/grid.hpp"

namespace voxflow {

struct ZRRelation {
  double a = 200.0;  // Marshall-Palmer
  double b = 1.6;
};

/// Rain rate (mm/h) whose dBR value is exactly the floor, 10^(-1.5).
inline constexpr double kDbrThreshold = 0.031622776601683794;

/// R = (10^(dBZ/10) / a)^(1/b). Missing (NaN) cells become 0 with the mask
/// cleared.
RainField dbz_to_rain(const Field2& dbz, ZRRelation zr = {});
double dbz_to_rain(double dbz, ZRRelation zr = {});

/// Inverse of dbz_to_rain; R = 0 maps to the no-echo value.
double rain_to_dbz(double rain, ZRRelation zr = {});

/// One time frame of a volume as a rain field (all levels).
RainField volume_frame_to_rain(const RadarVolume& vol, int t, ZRRelation zr = {});

/// Values above `threshold` map to 10 log10(R), the rest to -15.
RainField rain_to_dbr(const RainField& r, double threshold = kDbrThreshold);
double rain_to_dbr(double r, double threshold = kDbrThreshold);

/// Exact inverse above the floor; the floor maps to 0 mm/h.
RainField dbr_to_rain(const RainField& d);
double dbr_to_rain(double d);

/// Converts to the requested space (no-op when already there).
RainField to_space(const RainField& f, RainSpace space);

}  // namespace voxflow
