#include "voxflow/transform.hpp"

#include <cmath>

namespace voxflow {

namespace {

void check_zr(const ZRRelation& zr) {
  if (!(zr.a > 0.0) || !(zr.b > 0.0)) throw InvalidArgument("Z-R relation: a and b must be positive");
}

}  // namespace

double dbz_to_rain(double dbz, ZRRelation zr) {
  check_zr(zr);
  if (std::isnan(dbz)) throw InvalidArgument("dbz_to_rain: NaN reflectivity");
  if (dbz <= kNoEchoDbz) return 0.0;
  return std::pow(std::pow(10.0, dbz / 10.0) / zr.a, 1.0 / zr.b);
}

RainField dbz_to_rain(const Field2& dbz, ZRRelation zr) {
  check_zr(zr);
  RainField out(RainSpace::MMH, 1, dbz.ny(), dbz.nx());
  for (std::size_t i = 0; i < dbz.size(); ++i) {
    if (std::isnan(dbz[i])) {
      out.masks[0][i] = 0;
      continue;
    }
    out.levels[0][i] = dbz_to_rain(dbz[i], zr);
  }
  return out;
}

double rain_to_dbz(double rain, ZRRelation zr) {
  check_zr(zr);
  if (!(rain > 0.0)) return kNoEchoDbz;
  return std::max(kNoEchoDbz, 10.0 * std::log10(zr.a * std::pow(rain, zr.b)));
}

RainField volume_frame_to_rain(const RadarVolume& vol, int t, ZRRelation zr) {
  RainField out(RainSpace::MMH, vol.nz(), vol.ny(), vol.nx());
  for (int z = 0; z < vol.nz(); ++z) {
    const Mask2& m = vol.level_mask(z);
    out.masks[z] = m;
    Field2& f = out.levels[z];
    for (int y = 0; y < vol.ny(); ++y)
      for (int x = 0; x < vol.nx(); ++x) f(y, x) = m(y, x) ? dbz_to_rain(vol.at(t, z, y, x), zr) : 0.0;
  }
  return out;
}

double rain_to_dbr(double r, double threshold) {
  if (!(threshold > 0.0)) throw InvalidArgument("rain_to_dbr: threshold must be positive");
  return r > threshold ? std::max(kDbrFloor, 10.0 * std::log10(r)) : kDbrFloor;
}

RainField rain_to_dbr(const RainField& r, double threshold) {
  if (r.space != RainSpace::MMH) throw InvalidArgument("rain_to_dbr: input must be in mm/h");
  RainField out = r;
  out.space = RainSpace::DBR;
  for (int z = 0; z < r.nz(); ++z)
    for (std::size_t i = 0; i < r.levels[z].size(); ++i)
      out.levels[z][i] = r.masks[z][i] ? rain_to_dbr(r.levels[z][i], threshold) : kDbrFloor;
  return out;
}

double dbr_to_rain(double d) {
  if (!(d >= kDbrFloor)) throw InvalidArgument("dbr_to_rain: value below the -15 dBR floor");
  if (d == kDbrFloor) return 0.0;
  return std::pow(10.0, d / 10.0);
}

RainField dbr_to_rain(const RainField& d) {
  if (d.space != RainSpace::DBR) throw InvalidArgument("dbr_to_rain: input must be in dBR");
  RainField out = d;
  out.space = RainSpace::MMH;
  for (int z = 0; z < d.nz(); ++z)
    for (std::size_t i = 0; i < d.levels[z].size(); ++i)
      out.levels[z][i] = d.masks[z][i] ? dbr_to_rain(d.levels[z][i]) : 0.0;
  return out;
}

RainField to_space(const RainField& f, RainSpace space) {
  if (f.space == space) return f;
  return space == RainSpace::DBR ? rain_to_dbr(f) : dbr_to_rain(f);
}

}  // namespace voxflow
