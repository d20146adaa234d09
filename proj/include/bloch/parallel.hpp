#pragma once

#include <functional>

namespace bloch {

// Number of workers: requested if > 0, else BLOCH_THREADS, else hardware.
int resolve_threads(int requested);

// Static block partition of [0, n) over the workers; fn(i) must be safe to run
// concurrently for distinct i.  Results written by index stay deterministic
// regardless of the thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace bloch
