#pragma once

#include <cstddef>
#include <functional>

namespace snn {

// Runs fn(i) for i in [0, n). threads <= 1 runs inline. Work items must be
// independent; results are identical for any thread count.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace snn
