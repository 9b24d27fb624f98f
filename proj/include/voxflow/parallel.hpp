#pragma once

#include <functional>

namespace voxflow {

/// Worker count: hardware concurrency, capped by VOXFLOW_THREADS when set.
int thread_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once; callers
/// write results into per-index slots so the outcome does not depend on the
/// schedule.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace voxflow
