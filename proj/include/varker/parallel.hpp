#pragma once

#include <functional>

namespace varker {

/// Worker count: VARKER_THREADS if set and positive, else hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, count) split into contiguous chunks across threads.
/// body must only touch state owned by index i.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace varker
