#pragma once

#include <cstddef>
#include <functional>

namespace eulerlab {

/// Worker count from an explicit request (> 0), else EULERLAB_WORKERS or
/// APP_WORKERS from the environment, else 1.
int resolve_workers(int requested = 0);

/// Run body(i) for i in [0, count) on `workers` threads using contiguous
/// chunks. Callers write results into per-index slots, so the outcome does
/// not depend on the partition. The first exception thrown is rethrown.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

}  // namespace eulerlab
