#pragma once

#include <cstddef>
#include <functional>

namespace diraclat {

/// Upper bound on worker threads used by the energy pipeline (>= 1).
void set_max_threads(int n);
int max_threads() noexcept;

/// Runs body(i) for i in [0, n). Every index is executed exactly once and the
/// caller owns result placement, so outcomes do not depend on the thread count.
/// The exception of the lowest failing index is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace diraclat
