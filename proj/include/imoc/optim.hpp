#pragma once

#include <cstdint>
#include <vector>

#include "imoc/tensor.hpp"

namespace imoc {

// Bias-corrected adaptive-moment optimizer. Moment accumulators start at
// zero; the step counter advances by exactly one per update.
class Adam {
 public:
  explicit Adam(std::vector<Tensor> params, double lr = 2e-4, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  // Applies one update using each parameter's current grad (missing grad
  // reads as zero). Rejects parameters whose shape changed since creation.
  void step();
  void zero_grad();

  std::uint64_t step_count() const { return step_; }
  double learning_rate() const { return lr_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t step_ = 0;
};

}  // namespace imoc
