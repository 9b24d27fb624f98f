#include <cmath>

#include "voxflow/flow.hpp"
#include "voxflow/parallel.hpp"

namespace voxflow {

namespace {

constexpr int kMinPyramidSide = 8;
constexpr int kMinPooledSide = 4;
constexpr double kMaxStepGrowth = 8.0;
constexpr int kStallWindow = 40;

bool has_signal(const PlaneSequence& seq) {
  for (std::size_t t = 0; t < seq.frames.size(); ++t)
    for (std::size_t i = 0; i < seq.frames[t].size(); ++i)
      if (seq.masks[t][i] && seq.frames[t][i] > seq.pad) return true;
  return false;
}

FlowLevel upsample_flow(const FlowLevel& coarse, int ny, int nx) {
  FlowLevel fine{Field2(ny, nx), Field2(ny, nx)};
  const double sy = static_cast<double>(coarse.u.ny()) / ny;
  const double sx = static_cast<double>(coarse.u.nx()) / nx;
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const double cy = (y + 0.5) * sy - 0.5;
      const double cx = (x + 0.5) * sx - 0.5;
      fine.u(y, x) = bilinear_sample(coarse.u, cx, cy, OobPolicy::CLAMP) / sx;
      fine.v(y, x) = bilinear_sample(coarse.v, cx, cy, OobPolicy::CLAMP) / sy;
    }
  return fine;
}

// Scales of the full-resolution objective that a pyramid level pooled by f
// can represent, expressed in that level's cells.
std::vector<int> usable_scales(const std::vector<int>& scales, int f, int ny, int nx) {
  std::vector<int> out;
  for (int s : scales) {
    if (s % f != 0) continue;
    const int k = s / f;
    if ((ny + k - 1) / k >= kMinPooledSide && (nx + k - 1) / k >= kMinPooledSide) out.push_back(k);
  }
  if (out.empty()) out.push_back(1);
  return out;
}

// Heavy-ball descent with backtracking. Only non-increasing iterates are
// accepted; a rejected step halves the step size and drops the momentum.
void descend(const MultiscaleProblem& problem, const LossConfig& cfg, const OptimizerConfig& opt, int z, int level,
             FlowLevel& flow, std::vector<TraceEntry>* trace) {
  const double n_cells = static_cast<double>(problem.ny()) * problem.nx();
  PlaneGradient grad;
  LossBreakdown cur = problem.total_loss(flow, cfg.beta, cfg.criterion, &grad);
  if (!std::isfinite(cur.total)) throw Diverged("estimate: non-finite loss at iteration 0", 0);
  if (trace) trace->push_back({z, level, 0, cur.total, cur.multiscale, cur.pi, opt.step_size});

  FlowLevel velocity{Field2(problem.ny(), problem.nx()), Field2(problem.ny(), problem.nx())};
  FlowLevel cand = flow;
  double step = opt.step_size;
  double window_start = cur.total;
  int since_window = 0;
  for (int it = 1; it <= opt.max_iters; ++it) {
    const double scale = step * n_cells;
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
      cand.u[i] = flow.u[i] + opt.momentum * velocity.u[i] - scale * grad.u[i];
      cand.v[i] = flow.v[i] + opt.momentum * velocity.v[i] - scale * grad.v[i];
    }
    PlaneGradient cand_grad;
    const LossBreakdown next = problem.total_loss(cand, cfg.beta, cfg.criterion, &cand_grad);
    if (!std::isfinite(next.total))
      throw Diverged("estimate: non-finite loss at iteration " + std::to_string(it), it);
    if (next.total <= cur.total) {
      for (std::size_t i = 0; i < flow.u.size(); ++i) {
        velocity.u[i] = cand.u[i] - flow.u[i];
        velocity.v[i] = cand.v[i] - flow.v[i];
      }
      std::swap(flow, cand);
      grad = std::move(cand_grad);
      cur = next;
      step = std::min(step * 1.1, opt.step_size * kMaxStepGrowth);
      if (trace) trace->push_back({z, level, it, cur.total, cur.multiscale, cur.pi, step});
    } else {
      step *= 0.5;
      velocity.u.fill(0.0);
      velocity.v.fill(0.0);
      if (step < opt.step_size * 1e-6) break;
    }
    if (++since_window == kStallWindow) {
      if (window_start - cur.total <= 1e-9 * std::max(std::abs(window_start), 1e-12)) break;
      window_start = cur.total;
      since_window = 0;
    }
  }
}

}  // namespace

FlowLevel estimate_plane(const PlaneSequence& seq, const LossConfig& cfg, const OptimizerConfig& opt, int z,
                         std::vector<TraceEntry>* trace, double* grad_error, EstimateStatus* status) {
  seq.validate();
  cfg.validate();
  opt.validate();
  const int ny = seq.ny();
  const int nx = seq.nx();
  if (!has_signal(seq)) {
    if (status) *status = EstimateStatus::NO_SIGNAL;
    if (grad_error) *grad_error = 0.0;
    return FlowLevel{Field2(ny, nx), Field2(ny, nx)};
  }
  if (status) *status = EstimateStatus::OK;

  int levels = opt.init == InitMode::PYRAMID ? opt.coarse_to_fine_levels : 1;
  while (levels > 1 && std::min(ny, nx) / (1 << (levels - 1)) < kMinPyramidSide) --levels;

  FlowLevel flow;
  for (int level = levels - 1; level >= 0; --level) {
    const int f = 1 << level;
    const PlaneSequence s = f == 1 ? seq : pool_sequence(seq, f);
    const MultiscaleProblem problem(s, usable_scales(cfg.scales, f, s.ny(), s.nx()));
    if (level == levels - 1)
      flow = FlowLevel{Field2(s.ny(), s.nx()), Field2(s.ny(), s.nx())};
    else
      flow = upsample_flow(flow, s.ny(), s.nx());
    descend(problem, cfg, opt, z, level, flow, trace);
    if (level == 0 && opt.grad_check) {
      const double err = gradient_check(problem, flow, cfg.beta, cfg.criterion, 64, 0x5eedULL + z);
      if (grad_error) *grad_error = err;
    }
  }
  return flow;
}

EstimateResult estimate_variational(const std::vector<RainField>& inputs, const std::vector<RainField>* future,
                                    const LossConfig& cfg, const OptimizerConfig& opt) {
  cfg.validate();
  opt.validate();
  if (inputs.size() < 2) throw InvalidArgument("estimate_variational: need at least two input frames");
  std::vector<RainField> phi = inputs;
  if (future) phi.insert(phi.end(), future->begin(), future->end());
  for (const auto& f : phi)
    if (f.nz() != phi.front().nz() || f.ny() != phi.front().ny() || f.nx() != phi.front().nx())
      throw InvalidArgument("estimate_variational: frames differ in shape");

  const int nz = phi.front().nz();
  EstimateResult result;
  result.field = MotionField(nz, phi.front().ny(), phi.front().nx());
  result.status.assign(static_cast<std::size_t>(nz), EstimateStatus::OK);
  result.grad_check_error.assign(static_cast<std::size_t>(nz), 0.0);
  std::vector<std::vector<TraceEntry>> traces(static_cast<std::size_t>(nz));

  parallel_for(nz, [&](int z) {
    result.field.levels[z] = estimate_plane(plane_sequence(phi, z), cfg, opt, z, &traces[z],
                                            &result.grad_check_error[z], &result.status[z]);
  });
  for (auto& t : traces) result.trace.insert(result.trace.end(), t.begin(), t.end());
  if (!opt.grad_check) result.grad_check_error.clear();
  return result;
}

}  // namespace voxflow
