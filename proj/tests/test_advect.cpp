#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "voxflow/advect.hpp"

using namespace voxflow;

namespace {

double sum_of(const Field2& f) {
  double s = 0;
  for (double v : f.values()) s += v;
  return s;
}

// Compact bump well inside the domain.
Field2 bump(int n, int cy, int cx) {
  Field2 f(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double r2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
      f(y, x) = r2 < 16 ? 16 - r2 : 0.0;
    }
  return f;
}

}  // namespace

TEST_CASE("advect: zero motion is the identity") {
  std::mt19937_64 rng(31);
  RainField r = testing::rain_from(testing::random_field(rng, 12, 9, 0, 20));
  r.masks[0] = testing::random_mask(rng, 12, 9, 0.8);
  const RainField a = advect_once(r, MotionField::uniform(1, 12, 9, 0, 0));
  CHECK(a.levels[0] == r.levels[0]);
  CHECK(a.masks[0] == r.masks[0]);
}

TEST_CASE("advect: integer shift moves a delta") {
  Field2 f(8, 8);
  f(3, 2) = 5.0;
  const RainField a = advect_once(testing::rain_from(f), MotionField::uniform(1, 8, 8, 2.0, 1.0));
  CHECK(a.levels[0](4, 4) == 5.0);
  CHECK(sum_of(a.levels[0]) == 5.0);
  // The first two columns and first row came from outside.
  CHECK(a.masks[0](0, 5) == 0);
  CHECK(a.masks[0](5, 1) == 0);
  CHECK(a.masks[0](5, 2) == 1);
}

TEST_CASE("advect: half-cell shift against a hand-computed 5x5 case") {
  Field2 f(5, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) f(y, x) = 10 * y + x;
  const RainField a = advect_once(testing::rain_from(f), MotionField::uniform(1, 5, 5, 0.5, 0.0));
  for (int y = 0; y < 5; ++y) {
    CHECK(a.levels[0](y, 0) == doctest::Approx(0.5 * 0.0 + 0.5 * f(y, 0)));  // zero exterior
    for (int x = 1; x < 5; ++x) CHECK(a.levels[0](y, x) == doctest::Approx(0.5 * (f(y, x - 1) + f(y, x))));
  }
}

TEST_CASE("advect: ZERO exterior is the no-rain value of the space") {
  RainField d(RainSpace::DBR, 1, 4, 4);
  d.levels[0].fill(5.0);
  const RainField a = advect_once(d, MotionField::uniform(1, 4, 4, 1.0, 0.0));
  CHECK(a.levels[0](2, 0) == kDbrFloor);
  CHECK(a.levels[0](2, 1) == 5.0);
}

TEST_CASE("extrapolate: k steps of an integer shift equal one shift by k") {
  const Field2 f = bump(32, 10, 10);
  const auto seq = extrapolate(testing::rain_from(f), MotionField::uniform(1, 32, 32, 1.0, 2.0), 4);
  REQUIRE(seq.size() == 4);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const int sy = y - 8, sx = x - 4;
      const double expect = f.inside(sy, sx) ? f(sy, sx) : 0.0;
      CHECK(seq[3].levels[0](y, x) == doctest::Approx(expect));
    }
  CHECK_THROWS_AS(extrapolate(testing::rain_from(f), MotionField::uniform(1, 32, 32, 1, 0), 0), InvalidArgument);
}

TEST_CASE("advect: max principle and constant fields") {
  std::mt19937_64 rng(32);
  const Field2 f = testing::random_field(rng, 16, 16, 2.0, 9.0);
  MotionField mf(1, 16, 16);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (auto& v : mf.levels[0].u.values()) v = d(rng);
  for (auto& v : mf.levels[0].v.values()) v = d(rng);
  const RainField a = advect_once(testing::rain_from(f), mf);
  for (double v : a.levels[0].values()) {
    CHECK(v >= 0.0);  // exterior pad
    CHECK(v <= 9.0);
  }
  const RainField c = advect_once(testing::rain_from(Field2(16, 16, 3.5)), mf, OobPolicy::CLAMP);
  for (double v : c.levels[0].values()) CHECK(v == doctest::Approx(3.5));
}

TEST_CASE("advect: translation equivariance and mass conservation away from the border") {
  const Field2 f = bump(40, 15, 15);
  const MotionField mf = MotionField::uniform(1, 40, 40, 1.3, -0.7);
  const RainField a = advect_once(testing::rain_from(f), mf);
  CHECK(sum_of(a.levels[0]) == doctest::Approx(sum_of(f)).epsilon(1e-12));

  Field2 g(40, 40);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x) g(y, x) = f.inside(y - 3, x - 5) ? f(y - 3, x - 5) : 0.0;
  const RainField b = advect_once(testing::rain_from(g), mf);
  for (int y = 3; y < 40; ++y)
    for (int x = 5; x < 40; ++x) CHECK(b.levels[0](y, x) == doctest::Approx(a.levels[0](y - 3, x - 5)));
}

TEST_CASE("advect: a single-level field drives every level; shape mismatches throw") {
  RainField r(RainSpace::MMH, 3, 6, 6);
  for (int z = 0; z < 3; ++z) r.levels[z](2, 2) = z + 1.0;
  const RainField a = advect_once(r, MotionField::uniform(1, 6, 6, 1.0, 0.0));
  for (int z = 0; z < 3; ++z) CHECK(a.levels[z](2, 3) == z + 1.0);
  CHECK_THROWS_AS(advect_once(r, MotionField::uniform(2, 6, 6, 0, 0)), InvalidArgument);
  CHECK_THROWS_AS(advect_once(r, MotionField::uniform(1, 5, 6, 0, 0)), InvalidArgument);
}
