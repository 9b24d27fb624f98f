#pragma once

#include <random>

#include "voxflow/grid.hpp"

namespace testing {

inline voxflow::Field2 random_field(std::mt19937_64& rng, int ny, int nx, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  voxflow::Field2 f(ny, nx);
  for (auto& v : f.values()) v = d(rng);
  return f;
}

inline voxflow::Mask2 random_mask(std::mt19937_64& rng, int ny, int nx, double p_valid) {
  std::bernoulli_distribution d(p_valid);
  voxflow::Mask2 m(ny, nx);
  for (auto& v : m.values()) v = d(rng) ? 1 : 0;
  return m;
}

inline voxflow::RainField rain_from(const voxflow::Field2& f, voxflow::RainSpace s = voxflow::RainSpace::MMH) {
  voxflow::RainField r(s, 1, f.ny(), f.nx());
  r.levels[0] = f;
  return r;
}

}  // namespace testing
