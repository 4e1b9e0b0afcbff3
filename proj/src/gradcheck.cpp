#include "imoc/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace imoc {

double finite_difference_check(const std::function<Tensor(const std::vector<Tensor>&)>& fn,
                               std::vector<Tensor>& params, double eps) {
  if (compute_precision() != Precision::f64)
    throw std::logic_error("finite_difference_check: requires 64-bit compute precision");
  for (auto& p : params) {
    if (!p.requires_grad())
      throw std::invalid_argument("finite_difference_check: all params must require grad");
    p.zero_grad();
  }
  Tensor loss = fn(params);
  if (loss.size() != 1)
    throw std::invalid_argument("finite_difference_check: fn must return a scalar, got shape " +
                                shape_str(loss.shape()));
  backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) {
    auto g = p.grad();
    analytic.emplace_back(g.begin(), g.end());
  }
  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto vals = params[pi].raw_values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double saved = vals[i];
      vals[i] = saved + eps;
      const double fp = fn(params).item();
      vals[i] = saved - eps;
      const double fm = fn(params).item();
      vals[i] = saved;
      const double fd = (fp - fm) / (2.0 * eps);
      const double err = std::abs(analytic[pi][i] - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace imoc
