#include "voxflow/advect.hpp"

#include <cmath>

namespace voxflow {

void advect_plane(const Field2& field, const Mask2& mask, const FlowLevel& flow, double pad, OobPolicy oob,
                  Field2& out, Mask2& out_mask) {
  if (!field.same_shape(mask) || !field.same_shape(flow.u) || !field.same_shape(flow.v))
    throw InvalidArgument("advect: field, mask and motion shapes differ");
  const int ny = field.ny();
  const int nx = field.nx();
  out = Field2(ny, nx);
  out_mask = Mask2(ny, nx, 0);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      double sx = x - flow.u(y, x);
      double sy = y - flow.v(y, x);
      if (std::isnan(sx) || std::isnan(sy)) throw InvalidArgument("advect: non-finite motion vector");
      if (oob == OobPolicy::CLAMP) {
        sx = std::clamp(sx, 0.0, static_cast<double>(nx - 1));
        sy = std::clamp(sy, 0.0, static_cast<double>(ny - 1));
      }
      out(y, x) = bilinear_sample_grad(field, sx, sy, pad).value;
      const double ry = std::floor(sy + 0.5);
      const double rx = std::floor(sx + 0.5);
      const bool in = ry >= 0 && rx >= 0 && ry < ny && rx < nx;
      out_mask(y, x) = in && mask(static_cast<int>(ry), static_cast<int>(rx)) ? 1 : 0;
    }
  }
}

RainField advect_once(const RainField& field, const MotionField& mf, OobPolicy oob) {
  if (mf.nz() != field.nz() && mf.nz() != 1)
    throw InvalidArgument("advect_once: motion field depth does not match the rain field");
  if (mf.ny() != field.ny() || mf.nx() != field.nx())
    throw InvalidArgument("advect_once: horizontal shapes differ");
  RainField out;
  out.space = field.space;
  out.levels.resize(field.levels.size());
  out.masks.resize(field.masks.size());
  for (int z = 0; z < field.nz(); ++z) {
    const FlowLevel& flow = mf.levels[mf.nz() == 1 ? 0 : z];
    advect_plane(field.levels[z], field.masks[z], flow, field.no_rain(), oob, out.levels[z], out.masks[z]);
  }
  return out;
}

std::vector<RainField> extrapolate(const RainField& field, const MotionField& mf, int k, OobPolicy oob) {
  if (k < 1) throw InvalidArgument("extrapolate: k must be >= 1");
  std::vector<RainField> seq;
  seq.reserve(static_cast<std::size_t>(k));
  const RainField* prev = &field;
  for (int i = 0; i < k; ++i) {
    seq.push_back(advect_once(*prev, mf, oob));
    prev = &seq.back();
  }
  return seq;
}

std::vector<RainField> extrapolate(const RainField& field, const MotionField& mf, const ExtrapolationConfig& cfg) {
  return extrapolate(field, mf, cfg.steps, cfg.oob);
}

}  // namespace voxflow
