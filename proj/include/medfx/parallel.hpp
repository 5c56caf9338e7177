#pragma once

#include <cstddef>
#include <functional>

namespace medfx {

/// Worker count: MEDFX_THREADS when set and positive, otherwise the hardware
/// concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Work is handed out dynamically, so body must
/// only write to slot i of any shared output. The first exception thrown by
/// any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

} // namespace medfx
