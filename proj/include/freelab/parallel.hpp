#pragma once

#include <functional>

namespace freelab {

// Worker cap from FREELAB_THREADS, else the hardware concurrency; at least 1.
int worker_count();

// Runs task(0) ... task(count - 1) on up to worker_count() threads. Tasks must write to
// disjoint outputs; the first exception thrown by any task is rethrown after all finish.
void parallel_for(int count, const std::function<void(int)>& task);

}  // namespace freelab
