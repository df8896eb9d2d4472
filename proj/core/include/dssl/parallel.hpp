#pragma once

#include <cstddef>
#include <functional>

namespace dssl {

/// Worker count: DSSL_THREADS when set to a positive integer, otherwise the hardware
/// concurrency (at least 1).
std::size_t default_thread_count();

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Each index runs exactly once;
/// the first exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace dssl
