#pragma once

#include <cstddef>
#include <vector>

#include "imoc/rng.hpp"

namespace imoc::augment {

// Stochastic view-generation policy. Images get crop / flip / jitter (hue
// and saturation only when RGB, grayscale conversion only when RGB);
// 1x1-spatial vector data gets additive Gaussian noise. All outputs are
// clamped to [-1, 1].
struct AugmentPolicy {
  double crop_scale_min = 0.3;
  double crop_scale_max = 1.0;
  double flip_p = 0.5;
  double jitter_p = 0.8;
  double brightness = 0.4;
  double contrast = 0.4;
  double saturation = 0.4;
  double hue = 0.1;
  double grayscale_p = 0.2;
  double vector_noise_std = 0.1;

  static AugmentPolicy identity();
  void validate() const;
};

// One augmented view of a CHW image in [-1, 1]; `out` must hold c*h*w.
void augment_one(const double* x, std::size_t c, std::size_t h, std::size_t w,
                 const AugmentPolicy& policy, Rng& rng, double* out);

// Two independently augmented views drawn from one stream.
void make_views(const double* x, std::size_t c, std::size_t h, std::size_t w,
                const AugmentPolicy& policy, Rng& rng, double* view1, double* view2);

// 1xHxW -> 3xHxW channel replication; rejects multi-channel input.
std::vector<double> expand_grayscale(const std::vector<double>& x, std::size_t c, std::size_t h,
                                     std::size_t w);

}  // namespace imoc::augment
