#include "imoc/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace imoc {

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (lr_ <= 0.0) throw std::invalid_argument("adam: learning rate must be positive");
  if (beta1_ <= 0.0 || beta1_ >= 1.0 || beta2_ <= 0.0 || beta2_ >= 1.0)
    throw std::invalid_argument("adam: moment decay rates must lie in (0,1)");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    auto w = params_[pi].raw_values();
    if (w.size() != m_[pi].size())
      throw std::invalid_argument("adam: parameter " + std::to_string(pi) +
                                  " changed size since optimizer creation");
    auto g = params_[pi].grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m_[pi][i] = beta1_ * m_[pi][i] + (1.0 - beta1_) * g[i];
      v_[pi][i] = beta2_ * v_[pi][i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = m_[pi][i] / bc1;
      const double vhat = v_[pi][i] / bc2;
      w[i] = quantize(w[i] - lr_ * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace imoc
