#pragma once

// Sequence-consistent extrapolation loss with a divergence penalty, its
// analytic gradient, and the motion estimators built on it.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxflow/grid.hpp"

namespace voxflow {

enum class Criterion { MAE_DBR, MSE_DBR };

struct LossConfig {
  double beta = 0.1;                 // weight of the divergence term, strictly inside (0,1)
  std::vector<int> scales{1, 2, 4, 8};
  Criterion criterion = Criterion::MAE_DBR;
  int n_inputs = 8;
  int m_future = 16;
  bool mask_aware = true;            // invalid cells never contribute; cannot be disabled

  void validate() const;
};

enum class InitMode {
  ZERO,     // zero field, full resolution only
  PYRAMID,  // zero field at the coarsest pyramid level, refined coarse-to-fine
};

struct OptimizerConfig {
  int max_iters = 300;               // per pyramid level
  double step_size = 0.05;
  double momentum = 0.9;
  int coarse_to_fine_levels = 3;
  InitMode init = InitMode::PYRAMID;
  bool grad_check = false;

  void validate() const;
};

struct Diverged : std::runtime_error {
  Diverged(const std::string& what, int iter) : std::runtime_error(what), iteration(iter) {}
  int iteration;
};

struct LossBreakdown {
  double total = 0.0;
  double multiscale = 0.0;
  double pi = 0.0;
};

// ---------------------------------------------------------------------------
// Multi-level API. Rain fields are converted to dBR before the criterion is
// applied; per-level losses are averaged over levels.

double loss_single(const RainField& psi_t, const RainField& psi_next, const MotionField& mf, const LossConfig& cfg);
double loss_sequence(const std::vector<RainField>& phi, const MotionField& mf, const LossConfig& cfg);
double loss_multiscale(const std::vector<RainField>& phi, const MotionField& mf, const LossConfig& cfg);

/// Per-level du/dx + dv/dy from 3x3 Sobel kernels scaled by 1/8. Edge cells
/// use replicated padding.
std::vector<Field2> divergence(const MotionField& mf);

/// Mean |divergence| over interior cells.
double loss_pi(const MotionField& mf);

/// (1 - beta) * multiscale + beta * pi.
double loss_total(const std::vector<RainField>& phi, const MotionField& mf, const LossConfig& cfg);
LossBreakdown loss_breakdown(const std::vector<RainField>& phi, const MotionField& mf, const LossConfig& cfg);

// ---------------------------------------------------------------------------
// Single-plane kernels with analytic gradients. These are what the optimizer
// runs; the multi-level API is built from them.

/// A time sequence of one horizontal plane in dBR.
struct PlaneSequence {
  std::vector<Field2> frames;
  std::vector<Mask2> masks;
  double pad = kDbrFloor;

  int ny() const { return frames.empty() ? 0 : frames.front().ny(); }
  int nx() const { return frames.empty() ? 0 : frames.front().nx(); }
  void validate() const;
};

/// Extracts level z of a RainField sequence, converted to dBR.
PlaneSequence plane_sequence(const std::vector<RainField>& phi, int z);

/// Plane sequence pooled by k (frames averaged, masks pooled strictly).
PlaneSequence pool_sequence(const PlaneSequence& seq, int k);

struct PlaneGradient {
  Field2 u;
  Field2 v;
};

/// Mean over consecutive pairs of the mean criterion over jointly valid cells.
/// Pairs without valid cells are skipped; NoOverlap if every pair is empty.
/// When `grad` is non-null it receives d(loss)/d(flow).
double plane_sequence_loss(const PlaneSequence& seq, const FlowLevel& flow, Criterion c, PlaneGradient* grad);

Field2 plane_divergence(const FlowLevel& flow);
double plane_loss_pi(const FlowLevel& flow, PlaneGradient* grad);

/// Pre-pooled multi-scale problem for one plane.
class MultiscaleProblem {
 public:
  MultiscaleProblem(const PlaneSequence& seq, std::vector<int> scales);

  const std::vector<int>& scales() const { return scales_; }
  int ny() const { return ny_; }
  int nx() const { return nx_; }

  double multiscale_loss(const FlowLevel& flow, Criterion c, PlaneGradient* grad) const;
  LossBreakdown total_loss(const FlowLevel& flow, double beta, Criterion c, PlaneGradient* grad) const;

 private:
  int ny_ = 0;
  int nx_ = 0;
  std::vector<int> scales_;
  std::vector<PlaneSequence> pooled_;
};

/// Max per-component relative difference between the analytic gradient of
/// the total loss and central finite differences, over `probes` randomly
/// chosen components (all components when probes <= 0).
double gradient_check(const MultiscaleProblem& problem, const FlowLevel& flow, double beta, Criterion c,
                      int probes, std::uint64_t seed, double eps = 1e-5);

// ---------------------------------------------------------------------------
// Estimation

enum class EstimateStatus { OK, NO_SIGNAL };

struct TraceEntry {
  int z = 0;
  int pyramid_level = 0;  // 0 = full resolution
  int iteration = 0;
  double total = 0.0;
  double multiscale = 0.0;
  double pi = 0.0;
  double step = 0.0;
};

struct EstimateResult {
  MotionField field;
  std::vector<EstimateStatus> status;     // per level
  std::vector<TraceEntry> trace;          // accepted iterates, ordered by (z, pyramid level, iteration)
  std::vector<double> grad_check_error;   // per level; filled when grad_check is set
};

/// Minimizes the total loss independently for every level by momentum
/// gradient descent with step backtracking, coarse-to-fine. `future`, when
/// given, extends the observed sequence for the loss.
EstimateResult estimate_variational(const std::vector<RainField>& inputs, const std::vector<RainField>* future,
                                    const LossConfig& cfg, const OptimizerConfig& opt);

/// Single plane version used by estimate_variational.
FlowLevel estimate_plane(const PlaneSequence& seq, const LossConfig& cfg, const OptimizerConfig& opt, int z,
                         std::vector<TraceEntry>* trace, double* grad_error, EstimateStatus* status);

struct LucasKanadeResult {
  MotionField field;           // Z = 1
  Mask2 accepted;              // 1 where the local system was well conditioned
  bool all_rejected = false;
};

/// Local least-squares flow between two planes over a window x window
/// neighbourhood, refined by a few warped Gauss-Newton passes. Pixels whose
/// structure tensor has a small eigenvalue are rejected and filled from the
/// nearest accepted pixel.
LucasKanadeResult estimate_lucas_kanade(const Field2& first, const Field2& second, int window,
                                        double min_eigenvalue = 1e-2, int refinements = 5);

}  // namespace voxflow
