#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace steinrmt {

// Worker count: the explicit request if given, else STEIN_RMT_THREADS, else
// the hardware concurrency. Always at least 1.
unsigned resolve_threads(std::optional<unsigned> requested = std::nullopt);

// Runs body(i) for i in [0, count) on up to `threads` workers. Work is split in
// contiguous blocks; callers write results by index so the outcome does not
// depend on the worker count. The first exception thrown by any worker is
// rethrown on the calling thread.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace steinrmt
