#include "voxflow/grid.hpp"

#include <cmath>
#include <limits>

namespace voxflow {

RadarVolume::RadarVolume(Shape4 shape, std::vector<double> z_levels, double dt_seconds)
    : shape_(shape), z_levels_(std::move(z_levels)), dt_(dt_seconds) {
  if (shape.t < 1 || shape.z < 1 || shape.y < 1 || shape.x < 1)
    throw InvalidArgument("RadarVolume: all dimensions must be >= 1");
  if (static_cast<int>(z_levels_.size()) != shape.z)
    throw InvalidArgument("RadarVolume: z_levels length must equal Z");
  for (std::size_t i = 1; i < z_levels_.size(); ++i)
    if (!(z_levels_[i] > z_levels_[i - 1]))
      throw InvalidArgument("RadarVolume: z_levels must be strictly increasing");
  if (!(dt_seconds > 0)) throw InvalidArgument("RadarVolume: dt must be positive");
  data_.assign(shape.count(), kNoEchoDbz);
  mask_.assign(static_cast<std::size_t>(shape.z), full_mask(shape.y, shape.x));
}

const std::vector<double>& RadarVolume::rho_hv() const {
  if (!rho_hv_) throw PreconditionViolation("RadarVolume: rho_hv not present");
  return *rho_hv_;
}

void RadarVolume::set_rho_hv(std::vector<double> rho) {
  if (rho.size() != data_.size()) throw InvalidArgument("RadarVolume: rho_hv shape must match data");
  for (double r : rho)
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("RadarVolume: rho_hv outside [0,1]");
  rho_hv_ = std::move(rho);
}

Field2 RadarVolume::slice(int t, int z) const {
  Field2 f(shape_.y, shape_.x);
  const std::size_t base = index(t, z, 0, 0);
  std::copy(data_.begin() + static_cast<std::ptrdiff_t>(base),
            data_.begin() + static_cast<std::ptrdiff_t>(base + f.size()), f.values().begin());
  return f;
}

void RadarVolume::set_slice(int t, int z, const Field2& f) {
  if (f.ny() != shape_.y || f.nx() != shape_.x) throw InvalidArgument("RadarVolume::set_slice: shape mismatch");
  std::copy(f.values().begin(), f.values().end(), data_.begin() + static_cast<std::ptrdiff_t>(index(t, z, 0, 0)));
}

void RadarVolume::validate() const {
  if (static_cast<int>(z_levels_.size()) != shape_.z) throw InvalidArgument("RadarVolume: z_levels length != Z");
  for (std::size_t i = 1; i < z_levels_.size(); ++i)
    if (!(z_levels_[i] > z_levels_[i - 1])) throw InvalidArgument("RadarVolume: z_levels not increasing");
  if (static_cast<int>(mask_.size()) != shape_.z) throw InvalidArgument("RadarVolume: mask depth != Z");
  for (const auto& m : mask_)
    if (m.ny() != shape_.y || m.nx() != shape_.x) throw InvalidArgument("RadarVolume: mask shape mismatch");
  if (data_.size() != shape_.count()) throw InvalidArgument("RadarVolume: data size mismatch");
  if (rho_hv_ && rho_hv_->size() != data_.size()) throw InvalidArgument("RadarVolume: rho_hv size mismatch");
}

RainField::RainField(RainSpace s, int nz, int ny, int nx) : space(s) {
  levels.assign(static_cast<std::size_t>(nz), Field2(ny, nx, s == RainSpace::DBR ? kDbrFloor : 0.0));
  masks.assign(static_cast<std::size_t>(nz), full_mask(ny, nx));
}

void RainField::validate() const {
  if (levels.size() != masks.size()) throw InvalidArgument("RainField: mask depth mismatch");
  for (std::size_t z = 0; z < levels.size(); ++z) {
    if (!levels[z].same_shape(levels.front()) || !masks[z].same_shape(levels[z]))
      throw InvalidArgument("RainField: inconsistent level shapes");
    const double lo = space == RainSpace::DBR ? kDbrFloor : 0.0;
    for (std::size_t i = 0; i < levels[z].size(); ++i)
      if (masks[z][i] && !(levels[z][i] >= lo))
        throw InvalidArgument("RainField: valid value below the floor of its space");
  }
}

MotionField::MotionField(int nz, int ny, int nx) {
  levels.assign(static_cast<std::size_t>(nz), FlowLevel{Field2(ny, nx), Field2(ny, nx)});
}

MotionField MotionField::uniform(int nz, int ny, int nx, double u, double v) {
  MotionField mf;
  mf.levels.assign(static_cast<std::size_t>(nz), FlowLevel{Field2(ny, nx, u), Field2(ny, nx, v)});
  return mf;
}

bool MotionField::finite() const {
  for (const auto& l : levels) {
    for (double a : l.u.values())
      if (!std::isfinite(a)) return false;
    for (double a : l.v.values())
      if (!std::isfinite(a)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

int ceil_div(int a, int k) { return (a + k - 1) / k; }

void check_pool_factor(int k) {
  if (k <= 0) throw InvalidArgument("pooling factor must be >= 1");
}

}  // namespace

Field2 avg_pool2d(const Field2& field, int k) {
  check_pool_factor(k);
  if (k == 1) return field;
  const int oy = ceil_div(field.ny(), k);
  const int ox = ceil_div(field.nx(), k);
  Field2 out(oy, ox);
  const double inv = 1.0 / (static_cast<double>(k) * k);
  for (int by = 0; by < oy; ++by) {
    for (int bx = 0; bx < ox; ++bx) {
      double s = 0.0;
      for (int dy = 0; dy < k; ++dy) {
        const int y = std::min(by * k + dy, field.ny() - 1);
        for (int dx = 0; dx < k; ++dx) s += field(y, std::min(bx * k + dx, field.nx() - 1));
      }
      out(by, bx) = s * inv;
    }
  }
  return out;
}

Mask2 pool_mask(const Mask2& mask, int k) {
  check_pool_factor(k);
  if (k == 1) return mask;
  const int oy = ceil_div(mask.ny(), k);
  const int ox = ceil_div(mask.nx(), k);
  Mask2 out(oy, ox, 0);
  for (int by = 0; by < oy; ++by) {
    for (int bx = 0; bx < ox; ++bx) {
      bool ok = (by + 1) * k <= mask.ny() && (bx + 1) * k <= mask.nx();
      for (int dy = 0; ok && dy < k; ++dy)
        for (int dx = 0; ok && dx < k; ++dx) ok = mask(by * k + dy, bx * k + dx) != 0;
      out(by, bx) = ok ? 1 : 0;
    }
  }
  return out;
}

Field2 avg_pool2d_adjoint(const Field2& coarse, int k, int ny, int nx) {
  check_pool_factor(k);
  if (k == 1) return coarse;
  if (coarse.ny() != ceil_div(ny, k) || coarse.nx() != ceil_div(nx, k))
    throw InvalidArgument("avg_pool2d_adjoint: coarse shape does not match fine shape");
  Field2 fine(ny, nx);
  const double inv = 1.0 / (static_cast<double>(k) * k);
  for (int by = 0; by < coarse.ny(); ++by)
    for (int bx = 0; bx < coarse.nx(); ++bx) {
      const double g = coarse(by, bx) * inv;
      if (g == 0.0) continue;
      for (int dy = 0; dy < k; ++dy) {
        const int y = std::min(by * k + dy, ny - 1);
        for (int dx = 0; dx < k; ++dx) fine(y, std::min(bx * k + dx, nx - 1)) += g;
      }
    }
  return fine;
}

RadarVolume max_pool_vertical(const RadarVolume& vol, int factor) {
  if (factor <= 0 || vol.nz() % factor != 0)
    throw InvalidArgument("max_pool_vertical: Z must be divisible by factor");
  const int nz = vol.nz() / factor;
  std::vector<double> levels(static_cast<std::size_t>(nz));
  for (int g = 0; g < nz; ++g) levels[g] = vol.z_levels()[static_cast<std::size_t>(g * factor + factor - 1)];
  RadarVolume out({vol.nt(), nz, vol.ny(), vol.nx()}, levels, vol.dt());

  for (int g = 0; g < nz; ++g) {
    Mask2& m = out.level_mask(g);
    for (int y = 0; y < vol.ny(); ++y)
      for (int x = 0; x < vol.nx(); ++x) {
        bool any = false;
        for (int j = 0; j < factor; ++j) any = any || vol.level_mask(g * factor + j)(y, x);
        m(y, x) = any ? 1 : 0;
      }
    for (int t = 0; t < vol.nt(); ++t)
      for (int y = 0; y < vol.ny(); ++y)
        for (int x = 0; x < vol.nx(); ++x) {
          double best = -std::numeric_limits<double>::infinity();
          for (int j = 0; j < factor; ++j) {
            const int z = g * factor + j;
            if (vol.level_mask(z)(y, x)) best = std::max(best, vol.at(t, z, y, x));
          }
          out.at(t, g, y, x) = m(y, x) ? best : kNoEchoDbz;
        }
  }
  if (vol.has_rho_hv()) {
    // A pooled cell keeps the quality of the level that supplied the maximum.
    std::vector<double> rho(out.shape().count(), 1.0);
    for (int t = 0; t < vol.nt(); ++t)
      for (int g = 0; g < nz; ++g)
        for (int y = 0; y < vol.ny(); ++y)
          for (int x = 0; x < vol.nx(); ++x) {
            double best = -std::numeric_limits<double>::infinity();
            double r = 1.0;
            for (int j = 0; j < factor; ++j) {
              const int z = g * factor + j;
              if (vol.level_mask(z)(y, x) && vol.at(t, z, y, x) > best) {
                best = vol.at(t, z, y, x);
                r = vol.rho_at(t, z, y, x);
              }
            }
            rho[out.index(t, g, y, x)] = r;
          }
    out.set_rho_hv(std::move(rho));
  }
  return out;
}

RainField cmax(const RainField& field) {
  if (field.nz() == 0) throw InvalidArgument("cmax: empty field");
  RainField out(field.space, 1, field.ny(), field.nx());
  for (int y = 0; y < field.ny(); ++y)
    for (int x = 0; x < field.nx(); ++x) {
      bool any = false;
      double best = -std::numeric_limits<double>::infinity();
      for (int z = 0; z < field.nz(); ++z)
        if (field.masks[z](y, x)) {
          any = true;
          best = std::max(best, field.levels[z](y, x));
        }
      out.masks[0](y, x) = any ? 1 : 0;
      out.levels[0](y, x) = any ? best : field.no_rain();
    }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

inline double padded(const Field2& f, int y, int x, double pad) { return f.inside(y, x) ? f(y, x) : pad; }

}  // namespace

double bilinear_sample(const Field2& field, double x, double y, OobPolicy oob) {
  if (std::isnan(x) || std::isnan(y)) throw InvalidArgument("bilinear_sample: NaN coordinate");
  if (field.empty()) throw InvalidArgument("bilinear_sample: empty field");
  if (oob == OobPolicy::CLAMP) {
    x = std::clamp(x, 0.0, static_cast<double>(field.nx() - 1));
    y = std::clamp(y, 0.0, static_cast<double>(field.ny() - 1));
  }
  return bilinear_sample_grad(field, x, y, 0.0).value;
}

BilinearSample bilinear_sample_grad(const Field2& field, double x, double y, double pad) {
  // Far outside: all four neighbours are padding.
  if (!(x > -1.0 && y > -1.0 && x < field.nx() && y < field.ny())) return {pad, 0.0, 0.0};
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double ax = x - fx0;
  const double ay = y - fy0;
  const double f00 = padded(field, y0, x0, pad);
  const double f01 = padded(field, y0, x0 + 1, pad);
  const double f10 = padded(field, y0 + 1, x0, pad);
  const double f11 = padded(field, y0 + 1, x0 + 1, pad);
  const double top = f00 + ax * (f01 - f00);
  const double bot = f10 + ax * (f11 - f10);
  return {top + ay * (bot - top), (1.0 - ay) * (f01 - f00) + ay * (f11 - f10), bot - top};
}

}  // namespace voxflow
