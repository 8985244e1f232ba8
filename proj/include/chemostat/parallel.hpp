#ifndef CHEMOSTAT_PARALLEL_HPP
#define CHEMOSTAT_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace chemostat {

// Worker count: explicit value if > 0, else CHEMOSTAT_QSD_THREADS, else 1.
unsigned resolve_threads(unsigned requested);

// Calls body(i) for i in [0, n) on `threads` workers. Callers write results
// into slot i, so aggregation in index order is independent of scheduling.
// The first exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace chemostat

#endif
