/// @file parallel.hpp
/// @brief Minimal fork-join helper for embarrassingly parallel loops.
#pragma once

#include <cstddef>
#include <functional>

namespace pinchlab {

/// Worker count: PINCHLAB_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1). PINCHLAB_THREADS=0 means auto.
unsigned worker_count();

/// Calls body(i) for every i in [0, n). Work is split into contiguous
/// chunks, one per worker; body must only write to per-index state.
/// The first exception thrown by any worker is rethrown after all join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace pinchlab
