#pragma once

#include <functional>

namespace gmrf {

/// Thread budget for internal parallelism. Reads GMRF_THREADS once per
/// process; 0 or unset means hardware concurrency.
int thread_budget();

/// Runs fn(i) for i in [0, n). Work items must write to disjoint memory;
/// each item performs the same arithmetic regardless of the thread count,
/// so results are bitwise identical for any GMRF_THREADS setting.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace gmrf
