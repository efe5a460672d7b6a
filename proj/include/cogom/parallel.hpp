#pragma once

#include <cstddef>
#include <functional>

namespace cogom {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Indices are
/// handed out dynamically; the first exception thrown by any body is
/// rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

/// --threads value, else COGOM_THREADS, else 1.
std::size_t resolve_threads(std::size_t requested);

}  // namespace cogom
