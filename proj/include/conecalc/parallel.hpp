#pragma once

#include <functional>

namespace conecalc {

// Caps the worker count used by parallel_for. 0 restores the hardware default.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n). Work items must write only to their own output
// slots; reductions over the results happen serially in index order so that
// sums are bitwise reproducible regardless of the thread count.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace conecalc
