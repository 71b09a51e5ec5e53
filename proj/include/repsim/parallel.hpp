#pragma once

#include <cstddef>
#include <functional>

namespace repsim {

/// Runs fn(0) .. fn(count - 1) on up to `jobs` threads (jobs <= 1 runs
/// inline). Each task must write only to its own pre-allocated slot, which
/// makes the result independent of scheduling. If tasks throw, the
/// exception of the lowest task index is rethrown after all tasks finish.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace repsim
