#ifndef LOTDECOMP_PARALLEL_HPP
#define LOTDECOMP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace lotdecomp {

// 0 means "use the hardware concurrency".
unsigned resolve_threads(unsigned requested);

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index
// writes only its own output slot, so results do not depend on scheduling.
// If any call throws, the exception from the lowest failing index is
// rethrown after all workers have stopped.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace lotdecomp

#endif  // LOTDECOMP_PARALLEL_HPP
