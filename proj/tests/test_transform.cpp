#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "voxflow/transform.hpp"

using namespace voxflow;

TEST_CASE("dbz_to_rain: Marshall-Palmer closed form") {
  CHECK(dbz_to_rain(10.0 * std::log10(200.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dbz_to_rain(10.0 * std::log10(200.0) + 16.0) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(dbz_to_rain(kNoEchoDbz) == 0.0);
  CHECK(dbz_to_rain(-1000.0) == 0.0);
}

TEST_CASE("dbz_to_rain: non-positive coefficients are rejected") {
  CHECK_THROWS_AS(dbz_to_rain(20.0, ZRRelation{0.0, 1.6}), InvalidArgument);
  CHECK_THROWS_AS(dbz_to_rain(20.0, ZRRelation{200.0, -1.0}), InvalidArgument);
}

TEST_CASE("dbz_to_rain: NaN input clears the mask") {
  Field2 f(1, 2, 30.0);
  f(0, 1) = std::nan("");
  const RainField r = dbz_to_rain(f);
  CHECK(r.masks[0](0, 0) == 1);
  CHECK(r.masks[0](0, 1) == 0);
}

TEST_CASE("rain_to_dbr and dbr_to_rain") {
  CHECK(rain_to_dbr(1.0) == doctest::Approx(0.0));
  CHECK(rain_to_dbr(10.0) == doctest::Approx(10.0));
  CHECK(rain_to_dbr(0.0) == kDbrFloor);
  CHECK(rain_to_dbr(kDbrThreshold) == kDbrFloor);  // continuous at the floor
  CHECK(dbr_to_rain(0.0) == doctest::Approx(1.0));
  CHECK(dbr_to_rain(kDbrFloor) == 0.0);
  CHECK_THROWS_AS(dbr_to_rain(-20.0), InvalidArgument);
}

TEST_CASE("dBR is linear in dBZ above the floor") {
  for (double dbz = 5.0; dbz < 60.0; dbz += 3.7)
    CHECK(rain_to_dbr(dbz_to_rain(dbz)) == doctest::Approx((dbz - 10.0 * std::log10(200.0)) / 1.6).epsilon(1e-10));
}

TEST_CASE("round trip above the threshold and monotonicity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(0.05, 200.0);
  double prev_r = -1, prev_d = -100;
  std::vector<double> rs;
  for (int i = 0; i < 500; ++i) rs.push_back(d(rng));
  std::sort(rs.begin(), rs.end());
  for (double r : rs) {
    const double back = dbr_to_rain(rain_to_dbr(r));
    CHECK(std::abs(back - r) / r < 1e-6);
    CHECK(r > prev_r);
    CHECK(rain_to_dbr(r) > prev_d);
    prev_r = r;
    prev_d = rain_to_dbr(r);
  }
  for (double z = -20.0; z < 60.0; z += 0.5) CHECK(dbz_to_rain(z + 0.5) > dbz_to_rain(z));
}

TEST_CASE("rain_to_dbz inverts dbz_to_rain") {
  for (double z = -10.0; z < 60.0; z += 2.5) CHECK(rain_to_dbz(dbz_to_rain(z)) == doctest::Approx(z).epsilon(1e-10));
  CHECK(rain_to_dbz(0.0) == kNoEchoDbz);
}

TEST_CASE("RainField conversions keep masks and reject the wrong space") {
  RainField r(RainSpace::MMH, 2, 3, 3);
  r.levels[1](1, 1) = 10.0;
  r.masks[0](0, 0) = 0;
  const RainField d = rain_to_dbr(r);
  CHECK(d.space == RainSpace::DBR);
  CHECK(d.levels[1](1, 1) == doctest::Approx(10.0));
  CHECK(d.levels[0](2, 2) == kDbrFloor);
  CHECK(d.masks[0](0, 0) == 0);
  CHECK_THROWS_AS(rain_to_dbr(d), InvalidArgument);
  CHECK_THROWS_AS(dbr_to_rain(r), InvalidArgument);
  const RainField back = dbr_to_rain(d);
  CHECK(back.levels[1](1, 1) == doctest::Approx(10.0));
  CHECK(to_space(d, RainSpace::MMH).levels[1](1, 1) == doctest::Approx(10.0));
}

TEST_CASE("volume_frame_to_rain uses the level masks") {
  RadarVolume v({1, 1, 1, 2}, {500});
  v.at(0, 0, 0, 0) = 10.0 * std::log10(200.0);
  v.at(0, 0, 0, 1) = 50.0;
  v.level_mask(0)(0, 1) = 0;
  const RainField r = volume_frame_to_rain(v, 0);
  CHECK(r.levels[0](0, 0) == doctest::Approx(1.0));
  CHECK(r.levels[0](0, 1) == 0.0);
  CHECK(r.masks[0](0, 1) == 0);
}
