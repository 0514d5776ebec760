#ifndef DISPERSIM_PARALLEL_HPP
#define DISPERSIM_PARALLEL_HPP

#include <cstdint>
#include <functional>

namespace dispersim {

// Runs fn(i) for i in [0, n). Work items must own their randomness and
// write disjoint slots; results are then identical for any thread count.
void parallel_for(std::int64_t n, int n_threads,
                  const std::function<void(std::int64_t)>& fn);

int hardware_threads();

}  // namespace dispersim

#endif
