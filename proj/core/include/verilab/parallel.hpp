#pragma once

#include <cstddef>
#include <functional>

namespace verilab {

/// Runs body(i) for i in [0, count) over `workers` threads (0 or 1 = inline).
/// Work is claimed in index order; if bodies throw, the exception from the
/// lowest failing index is rethrown after all threads join.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body);

}  // namespace verilab
