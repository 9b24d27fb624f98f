#pragma once

// Core grid types shared by every module. Axis order is T x Z x Y x X,
// row-major, everywhere. Validity is always an explicit mask; NaN is never
// used as an in-memory sentinel.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace voxflow {

// ---------------------------------------------------------------------------
// Errors

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PreconditionViolation : std::logic_error {
  using std::logic_error::logic_error;
};

/// Raised when a reduction has no jointly valid cells to operate on.
struct NoOverlap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// 2-D grid

template <class T>
class Grid2 {
 public:
  Grid2() = default;
  Grid2(int ny, int nx, T fill = T{}) : ny_(ny), nx_(nx) {
    if (ny < 0 || nx < 0) throw InvalidArgument("Grid2: negative dimension");
    data_.assign(static_cast<std::size_t>(ny) * static_cast<std::size_t>(nx), fill);
  }

  int ny() const { return ny_; }
  int nx() const { return nx_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Grid2& o) const { return ny_ == o.ny_ && nx_ == o.nx_; }
  template <class U>
  bool same_shape(const Grid2<U>& o) const { return ny_ == o.ny() && nx_ == o.nx(); }

  T& operator()(int y, int x) { return data_[index(y, x)]; }
  const T& operator()(int y, int x) const { return data_[index(y, x)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool inside(int y, int x) const { return y >= 0 && y < ny_ && x >= 0 && x < nx_; }

  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Grid2&) const = default;

 private:
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(x);
  }

  int ny_ = 0;
  int nx_ = 0;
  std::vector<T> data_;
};

using Field2 = Grid2<double>;
using Mask2 = Grid2<std::uint8_t>;  // 1 = valid

inline Mask2 full_mask(int ny, int nx) { return Mask2(ny, nx, 1); }

// ---------------------------------------------------------------------------
// Domain types

/// Lowest representable reflectivity, used as the "no echo" value.
inline constexpr double kNoEchoDbz = -32.0;

struct Shape4 {
  int t = 0, z = 0, y = 0, x = 0;
  std::size_t count() const {
    return static_cast<std::size_t>(t) * z * static_cast<std::size_t>(y) * x;
  }
  bool operator==(const Shape4&) const = default;
};

/// T x Z x Y x X reflectivity volume (dBZ).
class RadarVolume {
 public:
  RadarVolume() = default;
  RadarVolume(Shape4 shape, std::vector<double> z_levels, double dt_seconds = 300.0);

  const Shape4& shape() const { return shape_; }
  int nt() const { return shape_.t; }
  int nz() const { return shape_.z; }
  int ny() const { return shape_.y; }
  int nx() const { return shape_.x; }

  double& at(int t, int z, int y, int x) { return data_[index(t, z, y, x)]; }
  double at(int t, int z, int y, int x) const { return data_[index(t, z, y, x)]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  const std::vector<double>& z_levels() const { return z_levels_; }
  double dt() const { return dt_; }

  /// Z masks of Y x X, 1 = valid observation.
  const std::vector<Mask2>& mask() const { return mask_; }
  Mask2& level_mask(int z) { return mask_.at(z); }
  const Mask2& level_mask(int z) const { return mask_.at(z); }

  bool has_rho_hv() const { return rho_hv_.has_value(); }
  const std::vector<double>& rho_hv() const;
  void set_rho_hv(std::vector<double> rho);
  void clear_rho_hv() { rho_hv_.reset(); }
  double rho_at(int t, int z, int y, int x) const { return rho_hv().at(index(t, z, y, x)); }

  Field2 slice(int t, int z) const;
  void set_slice(int t, int z, const Field2& f);

  /// Throws InvalidArgument when any invariant is broken.
  void validate() const;

  std::size_t index(int t, int z, int y, int x) const {
    return ((static_cast<std::size_t>(t) * shape_.z + z) * shape_.y + y) * static_cast<std::size_t>(shape_.x) + x;
  }

 private:
  Shape4 shape_;
  std::vector<double> z_levels_;
  double dt_ = 300.0;
  std::vector<double> data_;
  std::vector<Mask2> mask_;
  std::optional<std::vector<double>> rho_hv_;
};

enum class RainSpace { MMH, DBR };

/// Floor of the normalized log rain-rate space.
inline constexpr double kDbrFloor = -15.0;

/// Z x Y x X rain field (Z may be 1) in mm/h or dBR.
struct RainField {
  RainSpace space = RainSpace::MMH;
  std::vector<Field2> levels;
  std::vector<Mask2> masks;

  RainField() = default;
  RainField(RainSpace s, int nz, int ny, int nx);

  int nz() const { return static_cast<int>(levels.size()); }
  int ny() const { return levels.empty() ? 0 : levels.front().ny(); }
  int nx() const { return levels.empty() ? 0 : levels.front().nx(); }

  /// Value that represents "no rain" in this space.
  double no_rain() const { return space == RainSpace::DBR ? kDbrFloor : 0.0; }

  void validate() const;
};

/// Per-level horizontal displacement (cells per step). u = +columns, v = +rows.
struct FlowLevel {
  Field2 u;
  Field2 v;
};

struct MotionField {
  std::vector<FlowLevel> levels;

  MotionField() = default;
  MotionField(int nz, int ny, int nx);
  static MotionField uniform(int nz, int ny, int nx, double u, double v);

  int nz() const { return static_cast<int>(levels.size()); }
  int ny() const { return levels.empty() ? 0 : levels.front().u.ny(); }
  int nx() const { return levels.empty() ? 0 : levels.front().u.nx(); }

  bool finite() const;
};

// ---------------------------------------------------------------------------
// Primitives

/// k x k block mean. Non-divisible sizes are padded by edge replication.
Field2 avg_pool2d(const Field2& field, int k);

/// Pooled validity: a block is valid only when every cell is valid and none is
/// padding.
Mask2 pool_mask(const Mask2& mask, int k);

/// Adjoint of avg_pool2d: spreads coarse values back onto the fine grid
/// (padding contributions fold onto the replicated edge cells).
Field2 avg_pool2d_adjoint(const Field2& coarse, int k, int ny, int nx);

/// Element-wise vertical maximum over groups of `factor` levels. Invalid cells
/// are treated as -inf; factor == Z gives the column-maximum composite.
RadarVolume max_pool_vertical(const RadarVolume& vol, int factor);

/// Column-maximum composite of a rain field (Z -> 1).
RainField cmax(const RainField& field);

enum class OobPolicy { ZERO, CLAMP };

/// Bilinear interpolation at real coordinates (x = column, y = row).
/// ZERO pads with zeros outside the grid, CLAMP clamps the coordinates.
double bilinear_sample(const Field2& field, double x, double y, OobPolicy oob = OobPolicy::ZERO);

/// Bilinear sample with a constant pad value and the spatial derivatives at
/// the sample point.
struct BilinearSample {
  double value;
  double dx;
  double dy;
};
BilinearSample bilinear_sample_grad(const Field2& field, double x, double y, double pad);

}  // namespace voxflow
