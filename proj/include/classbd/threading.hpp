#pragma once

#include <cstddef>
#include <functional>

namespace classbd {

/// Worker cap for read-only fan-out (evaluation, batch inference).
/// Resolved from CLASSBD_THREADS, default 1 for reproducibility.
int worker_threads();

/// Chunked parallel map over [0, n). Each index is processed by exactly one
/// worker and writes only its own outputs, so results are bit-identical for
/// any thread count. Runs inline when worker_threads() == 1.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace classbd
