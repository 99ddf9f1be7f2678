#pragma once

#include <cstddef>
#include <functional>

namespace deconvband {

//! Upper bound on worker threads used by parallel_for. Zero selects the
//! value of DECONVBAND_THREADS, falling back to the hardware concurrency.
//! Returns the previous setting.
std::size_t set_max_threads(std::size_t threads);
std::size_t max_threads();

//! Runs body(i) for i in [0, count). Results must be written by index;
//! calls made from inside a running parallel_for execute serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace deconvband
