#pragma once

namespace npat {

/// Sets the worker count used by row-parallel loops. Results never depend on it:
/// threaded loops are pointwise and every reduction runs serially in index order.
void set_threads(int n);
int threads();

}  // namespace npat
