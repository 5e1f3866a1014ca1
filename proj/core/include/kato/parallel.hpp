#pragma once

#include <functional>

namespace kato {

/// Worker count: KATO_EVOLVE_THREADS if set (minimum 1), else the hardware
/// concurrency.
int thread_limit();

/// Calls body(i) for i in [0, n). Each index must write only its own output
/// slot; results are then independent of the schedule.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace kato
