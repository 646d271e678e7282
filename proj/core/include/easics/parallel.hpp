#ifndef EASICS_PARALLEL_HPP
#define EASICS_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace easics {

// Worker count: CONSENSUS_THREADS env var caps parallelism, 0 or unset = all
// hardware threads. Never returns 0.
std::size_t resolve_thread_count();

// Runs fn(i) for i in [0, n). Work is split statically; fn must write only to
// its own index's state so the outcome is identical to a sequential loop
// regardless of the worker count. Exceptions from fn are rethrown (first by
// index order).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace easics

#endif
