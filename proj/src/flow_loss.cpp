#include <cmath>
#include <random>

#include "voxflow/flow.hpp"
#include "voxflow/transform.hpp"

namespace voxflow {

void LossConfig::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("LossConfig: beta must lie strictly inside (0,1)");
  if (scales.empty()) throw InvalidArgument("LossConfig: scales must be non-empty");
  for (int k : scales)
    if (k < 1) throw InvalidArgument("LossConfig: every scale must be >= 1");
  if (n_inputs < 2) throw InvalidArgument("LossConfig: n_inputs must be >= 2");
  if (m_future < 0) throw InvalidArgument("LossConfig: m_future must be >= 0");
  if (!mask_aware) throw InvalidArgument("LossConfig: the loss is always mask-aware");
}

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw InvalidArgument("OptimizerConfig: max_iters must be >= 1");
  if (!(step_size > 0.0)) throw InvalidArgument("OptimizerConfig: step_size must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("OptimizerConfig: momentum must be in [0,1)");
  if (coarse_to_fine_levels < 1) throw InvalidArgument("OptimizerConfig: coarse_to_fine_levels must be >= 1");
}

void PlaneSequence::validate() const {
  if (frames.size() < 2) throw InvalidArgument("sequence needs at least two frames");
  if (frames.size() != masks.size()) throw InvalidArgument("sequence frames and masks differ in length");
  for (std::size_t i = 0; i < frames.size(); ++i)
    if (!frames[i].same_shape(frames.front()) || !masks[i].same_shape(frames.front()))
      throw InvalidArgument("sequence frames differ in shape");
}

PlaneSequence plane_sequence(const std::vector<RainField>& phi, int z) {
  PlaneSequence seq;
  seq.pad = kDbrFloor;
  for (const RainField& f : phi) {
    if (z < 0 || z >= f.nz()) throw InvalidArgument("plane_sequence: level out of range");
    if (f.space == RainSpace::DBR) {
      seq.frames.push_back(f.levels[z]);
    } else {
      Field2 d(f.ny(), f.nx());
      for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = f.masks[z][i] ? rain_to_dbr(f.levels[z][i]) : kDbrFloor;
      seq.frames.push_back(std::move(d));
    }
    seq.masks.push_back(f.masks[z]);
  }
  return seq;
}

PlaneSequence pool_sequence(const PlaneSequence& seq, int k) {
  PlaneSequence out;
  out.pad = seq.pad;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    out.frames.push_back(avg_pool2d(seq.frames[i], k));
    out.masks.push_back(pool_mask(seq.masks[i], k));
  }
  return out;
}

namespace {

inline double crit(Criterion c, double r) { return c == Criterion::MAE_DBR ? std::abs(r) : r * r; }

inline double crit_grad(Criterion c, double r) {
  if (c == Criterion::MSE_DBR) return 2.0 * r;
  return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
}

FlowLevel pool_flow(const FlowLevel& flow, int k) {
  if (k == 1) return flow;
  FlowLevel out{avg_pool2d(flow.u, k), avg_pool2d(flow.v, k)};
  const double inv = 1.0 / k;
  for (double& a : out.u.values()) a *= inv;
  for (double& a : out.v.values()) a *= inv;
  return out;
}

// Sobel derivative kernels, normalized so that a unit slope gives 1.
constexpr double kSobelX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
constexpr double kSobelY[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};

}  // namespace

double plane_sequence_loss(const PlaneSequence& seq, const FlowLevel& flow, Criterion c, PlaneGradient* grad) {
  seq.validate();
  const int ny = seq.ny();
  const int nx = seq.nx();
  if (!flow.u.same_shape(seq.frames.front()) || !flow.v.same_shape(seq.frames.front()))
    throw InvalidArgument("plane_sequence_loss: motion and frame shapes differ");
  if (grad) {
    grad->u = Field2(ny, nx);
    grad->v = Field2(ny, nx);
  }

  const std::size_t pairs = seq.frames.size() - 1;
  std::vector<double> pair_loss;
  pair_loss.reserve(pairs);
  // Gradient contributions per pair are accumulated unnormalized, then scaled
  // by 1/count once the count is known.
  Field2 gu_pair, gv_pair;
  if (grad) {
    gu_pair = Field2(ny, nx);
    gv_pair = Field2(ny, nx);
  }

  for (std::size_t t = 0; t < pairs; ++t) {
    const Field2& src = seq.frames[t];
    const Mask2& src_mask = seq.masks[t];
    const Field2& dst = seq.frames[t + 1];
    const Mask2& dst_mask = seq.masks[t + 1];
    // Extended precision keeps finite-difference probes of the mean free of
    // summation noise.
    long double sum = 0.0L;
    std::size_t count = 0;
    if (grad) {
      gu_pair.fill(0.0);
      gv_pair.fill(0.0);
    }
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        if (!dst_mask(y, x)) continue;
        const double sx = x - flow.u(y, x);
        const double sy = y - flow.v(y, x);
        const double ry = std::floor(sy + 0.5);
        const double rx = std::floor(sx + 0.5);
        if (!(ry >= 0 && rx >= 0 && ry < ny && rx < nx)) continue;
        if (!src_mask(static_cast<int>(ry), static_cast<int>(rx))) continue;
        const BilinearSample s = bilinear_sample_grad(src, sx, sy, seq.pad);
        const double r = s.value - dst(y, x);
        sum += crit(c, r);
        ++count;
        if (grad) {
          const double g = crit_grad(c, r);
          gu_pair(y, x) -= g * s.dx;
          gv_pair(y, x) -= g * s.dy;
        }
      }
    }
    if (count == 0) continue;
    const double inv = 1.0 / static_cast<double>(count);
    pair_loss.push_back(static_cast<double>(sum) * inv);
    if (grad) {
      for (std::size_t i = 0; i < gu_pair.size(); ++i) {
        grad->u[i] += gu_pair[i] * inv;
        grad->v[i] += gv_pair[i] * inv;
      }
    }
  }
  if (pair_loss.empty()) throw NoOverlap("extrapolation loss: no jointly valid cells in any frame pair");
  double total = 0.0;
  for (double l : pair_loss) total += l;
  const double inv_pairs = 1.0 / static_cast<double>(pair_loss.size());
  if (grad) {
    for (double& a : grad->u.values()) a *= inv_pairs;
    for (double& a : grad->v.values()) a *= inv_pairs;
  }
  return total * inv_pairs;
}

Field2 plane_divergence(const FlowLevel& flow) {
  const int ny = flow.u.ny();
  const int nx = flow.u.nx();
  Field2 div(ny, nx);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      double d = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int yy = std::clamp(y + dy, 0, ny - 1);
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = std::clamp(x + dx, 0, nx - 1);
          d += kSobelX[dy + 1][dx + 1] * flow.u(yy, xx) + kSobelY[dy + 1][dx + 1] * flow.v(yy, xx);
        }
      }
      div(y, x) = d / 8.0;
    }
  return div;
}

double plane_loss_pi(const FlowLevel& flow, PlaneGradient* grad) {
  const int ny = flow.u.ny();
  const int nx = flow.u.nx();
  if (grad) {
    grad->u = Field2(ny, nx);
    grad->v = Field2(ny, nx);
  }
  if (ny < 3 || nx < 3) return 0.0;
  const double inv = 1.0 / (static_cast<double>(ny - 2) * (nx - 2));
  long double sum = 0.0L;
  for (int y = 1; y < ny - 1; ++y)
    for (int x = 1; x < nx - 1; ++x) {
      double d = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          d += kSobelX[dy + 1][dx + 1] * flow.u(y + dy, x + dx) + kSobelY[dy + 1][dx + 1] * flow.v(y + dy, x + dx);
      d /= 8.0;
      sum += std::abs(d);
      if (grad && d != 0.0) {
        const double s = (d > 0.0 ? 1.0 : -1.0) * inv / 8.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            grad->u(y + dy, x + dx) += s * kSobelX[dy + 1][dx + 1];
            grad->v(y + dy, x + dx) += s * kSobelY[dy + 1][dx + 1];
          }
      }
    }
  return static_cast<double>(sum) * inv;
}

// ---------------------------------------------------------------------------

MultiscaleProblem::MultiscaleProblem(const PlaneSequence& seq, std::vector<int> scales)
    : ny_(seq.ny()), nx_(seq.nx()), scales_(std::move(scales)) {
  seq.validate();
  if (scales_.empty()) throw InvalidArgument("MultiscaleProblem: no scales");
  for (int k : scales_) pooled_.push_back(pool_sequence(seq, k));
}

double MultiscaleProblem::multiscale_loss(const FlowLevel& flow, Criterion c, PlaneGradient* grad) const {
  if (grad) {
    grad->u = Field2(ny_, nx_);
    grad->v = Field2(ny_, nx_);
  }
  double total = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    const int k = scales_[i];
    const FlowLevel pooled = pool_flow(flow, k);
    PlaneGradient g;
    double l = 0.0;
    try {
      l = plane_sequence_loss(pooled_[i], pooled, c, grad ? &g : nullptr);
    } catch (const NoOverlap&) {
      continue;
    }
    total += l;
    ++used;
    if (grad) {
      const Field2 gu = avg_pool2d_adjoint(g.u, k, ny_, nx_);
      const Field2 gv = avg_pool2d_adjoint(g.v, k, ny_, nx_);
      const double inv = 1.0 / k;
      for (std::size_t j = 0; j < gu.size(); ++j) {
        grad->u[j] += gu[j] * inv;
        grad->v[j] += gv[j] * inv;
      }
    }
  }
  if (used == 0) throw NoOverlap("multi-scale loss: no scale has jointly valid cells");
  const double inv_used = 1.0 / used;
  if (grad) {
    for (double& a : grad->u.values()) a *= inv_used;
    for (double& a : grad->v.values()) a *= inv_used;
  }
  return total * inv_used;
}

LossBreakdown MultiscaleProblem::total_loss(const FlowLevel& flow, double beta, Criterion c,
                                            PlaneGradient* grad) const {
  PlaneGradient gm, gp;
  LossBreakdown b;
  b.multiscale = multiscale_loss(flow, c, grad ? &gm : nullptr);
  b.pi = plane_loss_pi(flow, grad ? &gp : nullptr);
  b.total = (1.0 - beta) * b.multiscale + beta * b.pi;
  if (grad) {
    grad->u = Field2(ny_, nx_);
    grad->v = Field2(ny_, nx_);
    for (std::size_t j = 0; j < grad->u.size(); ++j) {
      grad->u[j] = (1.0 - beta) * gm.u[j] + beta * gp.u[j];
      grad->v[j] = (1.0 - beta) * gm.v[j] + beta * gp.v[j];
    }
  }
  return b;
}

double gradient_check(const MultiscaleProblem& problem, const FlowLevel& flow, double beta, Criterion c, int probes,
                      std::uint64_t seed, double eps) {
  PlaneGradient g;
  problem.total_loss(flow, beta, c, &g);
  const std::size_t n = flow.u.size();
  std::vector<std::size_t> comps;  // index < n -> u, otherwise v
  if (probes <= 0) {
    for (std::size_t i = 0; i < 2 * n; ++i) comps.push_back(i);
  } else {
    std::mt19937_64 rng(seed);
    for (int p = 0; p < probes; ++p) comps.push_back(static_cast<std::size_t>(rng() % (2 * n)));
  }
  double worst = 0.0;
  FlowLevel probe = flow;
  for (std::size_t comp : comps) {
    const bool is_u = comp < n;
    const std::size_t i = is_u ? comp : comp - n;
    double& cell = is_u ? probe.u[i] : probe.v[i];
    const double orig = cell;
    cell = orig + eps;
    const double up = problem.total_loss(probe, beta, c, nullptr).total;
    cell = orig - eps;
    const double down = problem.total_loss(probe, beta, c, nullptr).total;
    cell = orig;
    const double numeric = (up - down) / (2.0 * eps);
    const double analytic = is_u ? g.u[i] : g.v[i];
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Multi-level wrappers

namespace {

void check_sequence(const std::vector<RainField>& phi, const MotionField& mf) {
  if (phi.size() < 2) throw InvalidArgument("loss: sequence length must be >= 2");
  for (const auto& f : phi) {
    if (f.nz() != phi.front().nz() || f.ny() != phi.front().ny() || f.nx() != phi.front().nx())
      throw InvalidArgument("loss: frames differ in shape");
  }
  if (mf.nz() != phi.front().nz() || mf.ny() != phi.front().ny() || mf.nx() != phi.front().nx())
    throw InvalidArgument("loss: motion field shape does not match the frames");
}

}  // namespace

double loss_single(const RainField& psi_t, const RainField& psi_next, const MotionField& mf, const LossConfig& cfg) {
  return loss_sequence({psi_t, psi_next}, mf, cfg);
}

double loss_sequence(const std::vector<RainField>& phi, const MotionField& mf, const LossConfig& cfg) {
  check_sequence(phi, mf);
  double total = 0.0;
  for (int z = 0; z < mf.nz(); ++z)
    total += plane_sequence_loss(plane_sequence(phi, z), mf.levels[z], cfg.criterion, nullptr);
  return total / mf.nz();
}

double loss_multiscale(const std::vector<RainField>& phi, const MotionField& mf, const LossConfig& cfg) {
  check_sequence(phi, mf);
  double total = 0.0;
  for (int z = 0; z < mf.nz(); ++z) {
    const MultiscaleProblem p(plane_sequence(phi, z), cfg.scales);
    total += p.multiscale_loss(mf.levels[z], cfg.criterion, nullptr);
  }
  return total / mf.nz();
}

std::vector<Field2> divergence(const MotionField& mf) {
  std::vector<Field2> out;
  out.reserve(mf.levels.size());
  for (const auto& l : mf.levels) out.push_back(plane_divergence(l));
  return out;
}

double loss_pi(const MotionField& mf) {
  if (mf.nz() == 0) throw InvalidArgument("loss_pi: empty motion field");
  double total = 0.0;
  for (const auto& l : mf.levels) total += plane_loss_pi(l, nullptr);
  return total / mf.nz();
}

LossBreakdown loss_breakdown(const std::vector<RainField>& phi, const MotionField& mf, const LossConfig& cfg) {
  cfg.validate();
  LossBreakdown b;
  b.multiscale = loss_multiscale(phi, mf, cfg);
  b.pi = loss_pi(mf);
  b.total = (1.0 - cfg.beta) * b.multiscale + cfg.beta * b.pi;
  return b;
}

double loss_total(const std::vector<RainField>& phi, const MotionField& mf, const LossConfig& cfg) {
  return loss_breakdown(phi, mf, cfg).total;
}

}  // namespace voxflow
