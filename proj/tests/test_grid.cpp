#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "voxflow/grid.hpp"

using namespace voxflow;

namespace {

// Explicit per-block loop.
Field2 block_mean_oracle(const Field2& f, int k) {
  Field2 out(f.ny() / k, f.nx() / k);
  for (int by = 0; by < out.ny(); ++by)
    for (int bx = 0; bx < out.nx(); ++bx) {
      double s = 0.0;
      for (int y = by * k; y < by * k + k; ++y)
        for (int x = bx * k; x < bx * k + k; ++x) s += f(y, x);
      out(by, bx) = s / (k * k);
    }
  return out;
}

RadarVolume random_volume(std::mt19937_64& rng, int t, int z, int y, int x) {
  std::vector<double> alt;
  for (int i = 0; i < z; ++i) alt.push_back(500.0 * (i + 1));
  RadarVolume v({t, z, y, x}, alt);
  std::uniform_real_distribution<double> d(-10.0, 60.0);
  for (auto& a : v.data()) a = d(rng);
  return v;
}

}  // namespace

TEST_CASE("avg_pool2d: mean of a 2x2 block") {
  Field2 f(2, 2);
  f(0, 0) = 1;
  f(0, 1) = 1;
  f(1, 0) = 3;
  f(1, 1) = 3;
  const Field2 p = avg_pool2d(f, 2);
  REQUIRE(p.ny() == 1);
  CHECK(p(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("avg_pool2d: k = 1 is the identity") {
  std::mt19937_64 rng(1);
  const Field2 f = testing::random_field(rng, 7, 5);
  CHECK(avg_pool2d(f, 1) == f);
}

TEST_CASE("avg_pool2d: matches a brute-force block mean") {
  Field2 ramp(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) ramp(y, x) = 4 * y + x;
  const Field2 a = avg_pool2d(ramp, 2), b = block_mean_oracle(ramp, 2);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]));

  std::mt19937_64 rng(2);
  for (int k : {2, 4, 8}) {
    const Field2 f = testing::random_field(rng, 32, 16);
    const Field2 p = avg_pool2d(f, k), o = block_mean_oracle(f, k);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(o[i]).epsilon(1e-12));
  }
}

TEST_CASE("avg_pool2d: preserves the global mean when k divides the shape") {
  std::mt19937_64 rng(3);
  const Field2 f = testing::random_field(rng, 24, 16);
  const Field2 p = avg_pool2d(f, 4);
  double a = 0, b = 0;
  for (double v : f.values()) a += v;
  for (double v : p.values()) b += v;
  CHECK(a / f.size() == doctest::Approx(b / p.size()).epsilon(1e-12));
}

TEST_CASE("avg_pool2d: non-divisible shapes pad by replication and mark padding invalid") {
  Field2 f(3, 3, 1.0);
  f(2, 2) = 5.0;
  const Field2 p = avg_pool2d(f, 2);
  REQUIRE(p.ny() == 2);
  REQUIRE(p.nx() == 2);
  CHECK(p(1, 1) == doctest::Approx(5.0));  // block entirely made of the replicated corner
  const Mask2 m = pool_mask(full_mask(3, 3), 2);
  CHECK(m(0, 0) == 1);
  CHECK(m(0, 1) == 0);
  CHECK(m(1, 0) == 0);
  CHECK(m(1, 1) == 0);
}

TEST_CASE("pool_mask: a block with one invalid cell is invalid") {
  Mask2 m = full_mask(4, 4);
  m(0, 0) = 0;
  const Mask2 p = pool_mask(m, 2);
  CHECK(p(0, 0) == 0);
  CHECK(p(0, 1) == 1);
  CHECK(p(1, 1) == 1);
}

TEST_CASE("avg_pool2d: k <= 0 is rejected") {
  CHECK_THROWS_AS(avg_pool2d(Field2(4, 4), 0), InvalidArgument);
  CHECK_THROWS_AS(avg_pool2d(Field2(4, 4), -2), InvalidArgument);
}

TEST_CASE("avg_pool2d_adjoint: <P x, y> == <x, P^T y>") {
  std::mt19937_64 rng(4);
  for (auto [ny, nx, k] : {std::tuple{16, 16, 4}, std::tuple{10, 7, 3}}) {
    const Field2 x = testing::random_field(rng, ny, nx, -1, 1);
    const Field2 px = avg_pool2d(x, k);
    const Field2 y = testing::random_field(rng, px.ny(), px.nx(), -1, 1);
    const Field2 pty = avg_pool2d_adjoint(y, k, ny, nx);
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < px.size(); ++i) lhs += px[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * pty[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("max_pool_vertical: two levels give the element-wise maximum") {
  std::mt19937_64 rng(5);
  const RadarVolume v = random_volume(rng, 2, 2, 6, 5);
  const RadarVolume p = max_pool_vertical(v, 2);
  REQUIRE(p.nz() == 1);
  for (int t = 0; t < 2; ++t)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 5; ++x) CHECK(p.at(t, 0, y, x) == std::max(v.at(t, 0, y, x), v.at(t, 1, y, x)));
}

TEST_CASE("max_pool_vertical: 16 -> 8 -> 1 equals 16 -> 1") {
  std::mt19937_64 rng(6);
  RadarVolume v = random_volume(rng, 2, 16, 8, 8);
  std::bernoulli_distribution inv(0.2);
  for (int z = 0; z < 16; ++z)
    for (auto& m : v.level_mask(z).values()) m = inv(rng) ? 0 : 1;
  const RadarVolume a = max_pool_vertical(max_pool_vertical(v, 2), 8);
  const RadarVolume b = max_pool_vertical(v, 16);
  CHECK(a.data() == b.data());
  CHECK(a.mask() == b.mask());
  CHECK(a.z_levels() == b.z_levels());
}

TEST_CASE("max_pool_vertical: an all-invalid column is invalid; invalid cells never win") {
  RadarVolume v({1, 2, 1, 2}, {1000, 2000});
  v.at(0, 0, 0, 0) = 10;
  v.at(0, 1, 0, 0) = 50;
  v.level_mask(1)(0, 0) = 0;
  v.level_mask(0)(0, 1) = 0;
  v.level_mask(1)(0, 1) = 0;
  const RadarVolume p = max_pool_vertical(v, 2);
  CHECK(p.at(0, 0, 0, 0) == 10);
  CHECK(p.level_mask(0)(0, 0) == 1);
  CHECK(p.level_mask(0)(0, 1) == 0);
}

TEST_CASE("max_pool_vertical: factor must divide Z") {
  std::mt19937_64 rng(7);
  const RadarVolume v = random_volume(rng, 1, 3, 2, 2);
  CHECK_THROWS_AS(max_pool_vertical(v, 2), InvalidArgument);
}

TEST_CASE("bilinear_sample: nodes, midpoints and the ZERO border") {
  Field2 f(3, 3);
  f(0, 0) = 0;
  f(0, 1) = 2;
  f(1, 1) = 7;
  f(2, 2) = 4;
  CHECK(bilinear_sample(f, 1, 1) == 7);
  CHECK(bilinear_sample(f, 2, 2) == 4);
  CHECK(bilinear_sample(f, 0.5, 0) == doctest::Approx(1.0));

  // x = -0.5: weights 0.5 on the (zero) exterior column and 0.5 on column 0.
  Field2 g(2, 2, 6.0);
  const double hand = 0.5 * 0.0 + 0.5 * g(0, 0);
  CHECK(bilinear_sample(g, -0.5, 0, OobPolicy::ZERO) == doctest::Approx(hand));
  CHECK(bilinear_sample(g, -0.5, 0, OobPolicy::ZERO) == doctest::Approx(3.0));
  CHECK(bilinear_sample(g, -0.5, 0, OobPolicy::CLAMP) == doctest::Approx(6.0));
  CHECK(bilinear_sample(g, -3, -3, OobPolicy::ZERO) == 0.0);
}

TEST_CASE("bilinear_sample: 4-neighbour weight oracle on random points") {
  std::mt19937_64 rng(8);
  const Field2 f = testing::random_field(rng, 9, 11, -5, 5);
  std::uniform_real_distribution<double> px(0.0, 10.0), py(0.0, 8.0);
  for (int i = 0; i < 200; ++i) {
    const double x = px(rng), y = py(rng);
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    auto at = [&](int yy, int xx) { return f.inside(yy, xx) ? f(yy, xx) : 0.0; };
    const double hand = (1 - fx) * (1 - fy) * at(y0, x0) + fx * (1 - fy) * at(y0, x0 + 1) +
                        (1 - fx) * fy * at(y0 + 1, x0) + fx * fy * at(y0 + 1, x0 + 1);
    CHECK(bilinear_sample(f, x, y) == doctest::Approx(hand).epsilon(1e-12));
  }
}

TEST_CASE("bilinear_sample: linear in the field") {
  std::mt19937_64 rng(9);
  const Field2 f = testing::random_field(rng, 8, 8), g = testing::random_field(rng, 8, 8);
  const double a = 2.5, b = -0.75;
  Field2 h(8, 8);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = a * f[i] + b * g[i];
  std::uniform_real_distribution<double> p(-1.0, 8.0);
  for (int i = 0; i < 100; ++i) {
    const double x = p(rng), y = p(rng);
    CHECK(bilinear_sample(h, x, y) ==
          doctest::Approx(a * bilinear_sample(f, x, y) + b * bilinear_sample(g, x, y)).epsilon(1e-12));
  }
}

TEST_CASE("bilinear_sample: NaN coordinates are rejected") {
  CHECK_THROWS_AS(bilinear_sample(Field2(2, 2), std::nan(""), 0.0), InvalidArgument);
}

TEST_CASE("bilinear_sample_grad: derivatives match finite differences off the grid lines") {
  std::mt19937_64 rng(10);
  const Field2 f = testing::random_field(rng, 6, 6);
  const double x = 2.3, y = 3.6, h = 1e-6;
  const BilinearSample s = bilinear_sample_grad(f, x, y, -1.0);
  CHECK(s.value == doctest::Approx(bilinear_sample(f, x, y)));
  const double dx = (bilinear_sample_grad(f, x + h, y, -1.0).value - bilinear_sample_grad(f, x - h, y, -1.0).value) / (2 * h);
  const double dy = (bilinear_sample_grad(f, x, y + h, -1.0).value - bilinear_sample_grad(f, x, y - h, -1.0).value) / (2 * h);
  CHECK(s.dx == doctest::Approx(dx).epsilon(1e-6));
  CHECK(s.dy == doctest::Approx(dy).epsilon(1e-6));
  // Outside the grid the pad value is returned.
  CHECK(bilinear_sample_grad(f, -5, -5, -15.0).value == -15.0);
}

TEST_CASE("cmax: column maximum of a rain field") {
  RainField r(RainSpace::MMH, 3, 2, 2);
  r.levels[0](0, 0) = 1;
  r.levels[1](0, 0) = 4;
  r.levels[2](0, 0) = 2;
  r.levels[2](1, 1) = 9;
  r.masks[2](1, 1) = 0;
  const RainField c = cmax(r);
  REQUIRE(c.nz() == 1);
  CHECK(c.levels[0](0, 0) == 4);
  CHECK(c.levels[0](1, 1) == 0);
  CHECK(c.masks[0](1, 1) == 1);
}

TEST_CASE("RadarVolume: shape and altitude validation") {
  CHECK_THROWS_AS(RadarVolume({1, 2, 2, 2}, {1000}), InvalidArgument);
  CHECK_THROWS_AS(RadarVolume({1, 2, 2, 2}, {2000, 1000}), InvalidArgument);
  RadarVolume v({2, 1, 3, 4}, {500});
  v.at(1, 0, 2, 3) = 12.5;
  CHECK(v.slice(1, 0)(2, 3) == 12.5);
  CHECK(v.index(1, 0, 2, 3) == v.data().size() - 1);
}
