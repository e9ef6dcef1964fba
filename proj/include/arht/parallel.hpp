#pragma once

#include <cstddef>
#include <functional>

namespace arht {

/// Worker count: ARHT_THREADS if set and positive, otherwise hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n). Work is handed out dynamically; callers write
/// results into per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace arht
