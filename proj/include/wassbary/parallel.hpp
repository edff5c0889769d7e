#pragma once

#include <cstddef>
#include <functional>

namespace wassbary {

// Worker count used by parallel_for. Defaults to the hardware concurrency,
// overridden by the WASSBARY_THREADS environment variable when set.
int thread_count();
void set_thread_count(int n);

// Runs body(i) for i in [0, n). Each index is processed exactly once; the
// body must not write shared state. Exceptions are rethrown on the caller,
// the one from the lowest index winning.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wassbary
