#pragma once

#include <functional>
#include <vector>

#include "imoc/tensor.hpp"

namespace imoc {

// Max over all parameter coordinates of
//   |analytic - central difference| / max(1, |central difference|)
// with the stated epsilon. `fn` must rebuild a scalar graph from the given
// leaves on every call and be deterministic. Requires 64-bit mode; the
// comparison is meaningless at float precision.
double finite_difference_check(const std::function<Tensor(const std::vector<Tensor>&)>& fn,
                               std::vector<Tensor>& params, double eps = 1e-5);

}  // namespace imoc
