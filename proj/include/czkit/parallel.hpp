#pragma once

#include <cstddef>
#include <functional>

namespace czkit {

/// Worker count used by parallel_for. 0 selects the hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls fn(i) for every i in [0, n). Indices are split into contiguous
/// blocks, one per worker. Callers write results into per-index slots and
/// reduce afterwards in index order, so results never depend on the
/// worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace czkit
