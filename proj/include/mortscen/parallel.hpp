#pragma once

#include <cstddef>
#include <functional>

namespace mortscen {

/// Run fn(i) for every i in [0, n) across `threads` workers (values <= 1 run
/// inline). Work items are independent; callers must write results into
/// per-index slots so the outcome does not depend on scheduling. The first
/// exception thrown by any item is re-thrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)> &fn);

} // namespace mortscen
