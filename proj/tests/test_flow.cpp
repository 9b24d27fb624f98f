#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "voxflow/flow.hpp"
#include "voxflow/transform.hpp"

using namespace voxflow;

namespace {

// Smooth dBR scene: a few Gaussian cells, shifted by (dx, dy) per frame.
Field2 blobs(int ny, int nx, double dx, double dy) {
  struct B {
    double x, y, a, s;
  };
  const B cells[] = {{18, 20, 18, 5}, {40, 30, 14, 7}, {28, 46, 20, 4}, {50, 50, 12, 6}};
  Field2 f(ny, nx, kDbrFloor);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      double s = 0.0;
      for (const B& b : cells) {
        const double r2 = (x - b.x - dx) * (x - b.x - dx) + (y - b.y - dy) * (y - b.y - dy);
        s += b.a * std::exp(-r2 / (2 * b.s * b.s));
      }
      f(y, x) = std::max(kDbrFloor, s - 3.0);
    }
  return f;
}

std::vector<RainField> translating(int frames, int n, double u, double v) {
  std::vector<RainField> seq;
  for (int t = 0; t < frames; ++t) seq.push_back(testing::rain_from(blobs(n, n, u * t, v * t), RainSpace::DBR));
  return seq;
}

PlaneSequence random_plane_sequence(std::mt19937_64& rng, int frames, int ny, int nx) {
  PlaneSequence s;
  for (int t = 0; t < frames; ++t) {
    s.frames.push_back(testing::random_field(rng, ny, nx, -15.0, 20.0));
    s.masks.push_back(testing::random_mask(rng, ny, nx, 0.9));
  }
  return s;
}

FlowLevel random_flow(std::mt19937_64& rng, int ny, int nx, double amp) {
  return {testing::random_field(rng, ny, nx, -amp, amp), testing::random_field(rng, ny, nx, -amp, amp)};
}

}  // namespace

TEST_CASE("loss_single: perfect and imperfect extrapolation") {
  const auto seq = translating(2, 32, 2.0, 0.0);
  LossConfig cfg;
  CHECK(loss_single(seq[0], seq[1], MotionField::uniform(1, 32, 32, 2.0, 0.0), cfg) < 1e-12);
  CHECK(loss_single(seq[0], seq[1], MotionField::uniform(1, 32, 32, 0.0, 0.0), cfg) > 0.1);

  // Two constant fields: the loss is their dBR difference.
  RainField a = testing::rain_from(Field2(8, 8, 1.0));
  RainField b = testing::rain_from(Field2(8, 8, 10.0));
  CHECK(loss_single(a, b, MotionField::uniform(1, 8, 8, 0, 0), cfg) == doctest::Approx(10.0));
  cfg.criterion = Criterion::MSE_DBR;
  CHECK(loss_single(a, b, MotionField::uniform(1, 8, 8, 0, 0), cfg) == doctest::Approx(100.0));
}

TEST_CASE("loss_multiscale: scale 1 alone equals the sequence loss") {
  std::mt19937_64 rng(41);
  std::vector<RainField> phi;
  for (int t = 0; t < 4; ++t) phi.push_back(testing::rain_from(testing::random_field(rng, 16, 16, 0, 30)));
  MotionField mf(1, 16, 16);
  mf.levels[0] = random_flow(rng, 16, 16, 2.0);
  LossConfig cfg;
  cfg.scales = {1};
  CHECK(loss_multiscale(phi, mf, cfg) == doctest::Approx(loss_sequence(phi, mf, cfg)).epsilon(1e-12));
  CHECK(loss_single(phi[0], phi[1], mf, cfg) == doctest::Approx(loss_sequence({phi[0], phi[1]}, mf, cfg)));
}

TEST_CASE("loss: fully masked frames raise NoOverlap") {
  RainField a = testing::rain_from(Field2(4, 4, 1.0));
  a.masks[0].fill(0);
  CHECK_THROWS_AS(loss_single(a, a, MotionField::uniform(1, 4, 4, 0, 0), LossConfig{}), NoOverlap);
}

TEST_CASE("divergence: unit ramp, homogeneity and the interior mean") {
  MotionField mf(1, 10, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) mf.levels[0].u(y, x) = x;
  const auto d = divergence(mf);
  for (int y = 1; y < 9; ++y)
    for (int x = 1; x < 9; ++x) CHECK(d[0](y, x) == doctest::Approx(1.0));
  CHECK(loss_pi(mf) == doctest::Approx(1.0));
  CHECK(loss_pi(MotionField::uniform(2, 10, 10, 3.0, -1.0)) == doctest::Approx(0.0));

  std::mt19937_64 rng(42);
  MotionField r(1, 12, 12);
  r.levels[0] = random_flow(rng, 12, 12, 3.0);
  const double base = loss_pi(r);
  for (double c : {-2.0, 0.5, 3.0}) {
    MotionField s = r;
    for (auto& a : s.levels[0].u.values()) a *= c;
    for (auto& a : s.levels[0].v.values()) a *= c;
    CHECK(loss_pi(s) == doctest::Approx(std::abs(c) * base).epsilon(1e-12));
  }
}

TEST_CASE("loss_total: beta must lie strictly inside (0,1)") {
  const auto phi = translating(3, 16, 1.0, 0.0);
  const MotionField mf = MotionField::uniform(1, 16, 16, 0.5, 0.0);
  LossConfig cfg;
  for (double b : {0.0, 1.0, -0.1, 1.5}) {
    cfg.beta = b;
    CHECK_THROWS_AS(loss_total(phi, mf, cfg), InvalidArgument);
  }
  cfg.beta = 0.5;
  const LossBreakdown br = loss_breakdown(phi, mf, cfg);
  CHECK(br.total == doctest::Approx(0.5 * br.multiscale + 0.5 * br.pi));
  CHECK(loss_total(phi, mf, cfg) == doctest::Approx(br.total));
}

TEST_CASE("gradient_check: analytic gradient matches finite differences") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 4; ++trial) {
    const PlaneSequence seq = random_plane_sequence(rng, 4, 16, 16);
    const MultiscaleProblem p(seq, {1, 2, 4});
    const FlowLevel flow = random_flow(rng, 16, 16, 2.0);
    for (Criterion c : {Criterion::MAE_DBR, Criterion::MSE_DBR})
      CHECK(gradient_check(p, flow, 0.1, c, 0, 1000 + trial) < 1e-4);
  }
}

TEST_CASE("estimate: identical frames give (almost) no motion") {
  std::vector<RainField> phi(4, testing::rain_from(blobs(32, 32, 0, 0), RainSpace::DBR));
  const EstimateResult r = estimate_variational(phi, nullptr, LossConfig{}, OptimizerConfig{});
  double worst = 0.0;
  for (std::size_t i = 0; i < r.field.levels[0].u.size(); ++i)
    worst = std::max(worst, std::hypot(r.field.levels[0].u[i], r.field.levels[0].v[i]));
  CHECK(worst < 0.05);
}

TEST_CASE("estimate: recovers a uniform eastward translation") {
  const auto phi = translating(6, 64, 3.0, 0.0);
  LossConfig cfg;
  cfg.scales = {1};
  const EstimateResult r = estimate_variational(phi, nullptr, cfg, OptimizerConfig{});
  double err = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      if (phi.back().levels[0](y, x) <= 0.0) continue;
      err += std::hypot(r.field.levels[0].u(y, x) - 3.0, r.field.levels[0].v(y, x));
      ++n;
    }
  REQUIRE(n > 0);
  CHECK(err / n < 0.1);
}

TEST_CASE("estimate: the trace never increases within a pyramid level") {
  const auto phi = translating(4, 32, 1.5, -1.0);
  OptimizerConfig opt;
  opt.max_iters = 60;
  const EstimateResult r = estimate_variational(phi, nullptr, LossConfig{}, opt);
  REQUIRE(r.trace.size() > 2);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    const auto& a = r.trace[i - 1];
    const auto& b = r.trace[i];
    if (a.z == b.z && a.pyramid_level == b.pyramid_level) {
      CHECK(b.iteration > a.iteration);
      CHECK(b.total <= a.total + 1e-12);
    }
  }
}

TEST_CASE("estimate: levels are independent of their order") {
  std::vector<RainField> phi;
  for (int t = 0; t < 3; ++t) {
    RainField r(RainSpace::DBR, 2, 24, 24);
    r.levels[0] = blobs(24, 24, 1.0 * t, 0.0);
    r.levels[1] = blobs(24, 24, 0.0, 1.0 * t);
    phi.push_back(r);
  }
  std::vector<RainField> swapped = phi;
  for (auto& r : swapped) std::swap(r.levels[0], r.levels[1]);
  OptimizerConfig opt;
  opt.max_iters = 40;
  const EstimateResult a = estimate_variational(phi, nullptr, LossConfig{}, opt);
  const EstimateResult b = estimate_variational(swapped, nullptr, LossConfig{}, opt);
  CHECK(a.field.levels[0].u == b.field.levels[1].u);
  CHECK(a.field.levels[1].v == b.field.levels[0].v);
}

TEST_CASE("estimate: a level with no echo reports NO_SIGNAL and zero motion") {
  std::vector<RainField> phi(3, RainField(RainSpace::DBR, 1, 16, 16));
  const EstimateResult r = estimate_variational(phi, nullptr, LossConfig{}, OptimizerConfig{});
  CHECK(r.status[0] == EstimateStatus::NO_SIGNAL);
  for (double v : r.field.levels[0].u.values()) CHECK(v == 0.0);
}

TEST_CASE("estimate: configuration validation") {
  const auto phi = translating(3, 16, 1.0, 0.0);
  OptimizerConfig opt;
  opt.max_iters = 0;
  CHECK_THROWS_AS(estimate_variational(phi, nullptr, LossConfig{}, opt), InvalidArgument);
  LossConfig cfg;
  cfg.scales = {};
  CHECK_THROWS_AS(estimate_variational(phi, nullptr, cfg, OptimizerConfig{}), InvalidArgument);
  CHECK_THROWS_AS(estimate_variational({phi[0]}, nullptr, LossConfig{}, OptimizerConfig{}), InvalidArgument);
}

TEST_CASE("lucas_kanade: translation of a smooth scene") {
  const Field2 a = blobs(64, 64, 0, 0), b = blobs(64, 64, 1.0, 0.5);
  const LucasKanadeResult r = estimate_lucas_kanade(a, b, 15);
  REQUIRE(!r.all_rejected);
  double su = 0, sv = 0;
  std::size_t n = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (r.accepted(y, x) && a(y, x) > 0.0) {
        su += r.field.levels[0].u(y, x);
        sv += r.field.levels[0].v(y, x);
        ++n;
      }
  REQUIRE(n > 0);
  CHECK(su / n == doctest::Approx(1.0).epsilon(0.1));
  CHECK(sv / n == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("lucas_kanade: a featureless field is rejected everywhere") {
  const LucasKanadeResult r = estimate_lucas_kanade(Field2(16, 16, 2.0), Field2(16, 16, 2.0), 7);
  CHECK(r.all_rejected);
  for (double v : r.field.levels[0].u.values()) CHECK(v == 0.0);
}
