#include "imoc/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace imoc::augment {

AugmentPolicy AugmentPolicy::identity() {
  AugmentPolicy p;
  p.crop_scale_min = 1.0;
  p.crop_scale_max = 1.0;
  p.flip_p = 0.0;
  p.jitter_p = 0.0;
  p.grayscale_p = 0.0;
  p.vector_noise_std = 0.0;
  return p;
}

void AugmentPolicy::validate() const {
  auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!prob(flip_p) || !prob(jitter_p) || !prob(grayscale_p))
    throw std::invalid_argument("augment: probabilities must lie in [0,1]");
  if (!(crop_scale_min > 0.0) || crop_scale_min > crop_scale_max || crop_scale_max > 1.0)
    throw std::invalid_argument("augment: crop scale range must satisfy 0 < min <= max <= 1");
  if (brightness < 0.0 || contrast < 0.0 || saturation < 0.0 || hue < 0.0 || hue > 0.5)
    throw std::invalid_argument("augment: jitter strengths out of range");
  if (vector_noise_std < 0.0) throw std::invalid_argument("augment: vector_noise_std must be >= 0");
}

namespace {

inline double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }
inline double clamp1(double v) { return std::min(1.0, std::max(-1.0, v)); }

// Bilinear resize of a crop window back to the full size. Exact copy when
// the window is the whole image, so the identity policy is bit-exact.
void crop_resize(const double* src, std::size_t c, std::size_t h, std::size_t w, std::size_t top,
                 std::size_t left, std::size_t ch, std::size_t cw, double* dst) {
  if (ch == h && cw == w && top == 0 && left == 0) {
    std::copy_n(src, c * h * w, dst);
    return;
  }
  const double sy = static_cast<double>(ch) / static_cast<double>(h);
  const double sx = static_cast<double>(cw) / static_cast<double>(w);
  for (std::size_t ci = 0; ci < c; ++ci) {
    const double* plane = src + ci * h * w;
    double* out = dst + ci * h * w;
    for (std::size_t i = 0; i < h; ++i) {
      double fy = (static_cast<double>(i) + 0.5) * sy - 0.5;
      fy = std::min(std::max(fy, 0.0), static_cast<double>(ch - 1));
      const std::size_t y0 = static_cast<std::size_t>(fy);
      const std::size_t y1 = std::min(y0 + 1, ch - 1);
      const double wy = fy - static_cast<double>(y0);
      for (std::size_t j = 0; j < w; ++j) {
        double fx = (static_cast<double>(j) + 0.5) * sx - 0.5;
        fx = std::min(std::max(fx, 0.0), static_cast<double>(cw - 1));
        const std::size_t x0 = static_cast<std::size_t>(fx);
        const std::size_t x1 = std::min(x0 + 1, cw - 1);
        const double wx = fx - static_cast<double>(x0);
        auto at = [&](std::size_t y, std::size_t x) {
          return plane[(top + y) * w + (left + x)];
        };
        out[i * w + j] = (1 - wy) * ((1 - wx) * at(y0, x0) + wx * at(y0, x1)) +
                         wy * ((1 - wx) * at(y1, x0) + wx * at(y1, x1));
      }
    }
  }
}

inline double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

void rgb_to_hsv(double r, double g, double b, double& hh, double& ss, double& vv) {
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  vv = mx;
  const double d = mx - mn;
  ss = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) {
    hh = 0.0;
    return;
  }
  if (mx == r)
    hh = (g - b) / d + (g < b ? 6.0 : 0.0);
  else if (mx == g)
    hh = (b - r) / d + 2.0;
  else
    hh = (r - g) / d + 4.0;
  hh /= 6.0;
}

void hsv_to_rgb(double hh, double ss, double vv, double& r, double& g, double& b) {
  hh = hh - std::floor(hh);
  const double h6 = hh * 6.0;
  const int i = static_cast<int>(h6) % 6;
  const double f = h6 - std::floor(h6);
  const double p = vv * (1.0 - ss);
  const double q = vv * (1.0 - f * ss);
  const double t = vv * (1.0 - (1.0 - f) * ss);
  switch (i) {
    case 0: r = vv; g = t; b = p; break;
    case 1: r = q; g = vv; b = p; break;
    case 2: r = p; g = vv; b = t; break;
    case 3: r = p; g = q; b = vv; break;
    case 4: r = t; g = p; b = vv; break;
    default: r = vv; g = p; b = q; break;
  }
}

}  // namespace

void augment_one(const double* x, std::size_t c, std::size_t h, std::size_t w,
                 const AugmentPolicy& policy, Rng& rng, double* out) {
  const std::size_t numel = c * h * w;
  if (h == 1 && w == 1) {
    // Vector data: additive noise.
    for (std::size_t i = 0; i < numel; ++i)
      out[i] = clamp1(x[i] + policy.vector_noise_std * rng.normal());
    return;
  }

  // Area-fraction random crop, resized back to the native size.
  const double scale = rng.uniform(policy.crop_scale_min, policy.crop_scale_max);
  const double side = std::sqrt(scale);
  const std::size_t ch = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(side * h)));
  const std::size_t cw = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(side * w)));
  const std::size_t top = static_cast<std::size_t>(rng.below(h - std::min(ch, h) + 1));
  const std::size_t left = static_cast<std::size_t>(rng.below(w - std::min(cw, w) + 1));
  crop_resize(x, c, h, w, top, left, std::min(ch, h), std::min(cw, w), out);

  if (rng.bernoulli(policy.flip_p)) {
    for (std::size_t ci = 0; ci < c; ++ci)
      for (std::size_t i = 0; i < h; ++i) {
        double* row = out + ci * h * w + i * w;
        std::reverse(row, row + w);
      }
  }

  if (rng.bernoulli(policy.jitter_p)) {
    // Work in [0,1].
    const std::size_t hw = h * w;
    std::vector<double> y(numel);
    for (std::size_t i = 0; i < numel; ++i) y[i] = clamp01((out[i] + 1.0) * 0.5);

    const double fb = rng.uniform(std::max(0.0, 1.0 - policy.brightness), 1.0 + policy.brightness);
    for (auto& v : y) v = clamp01(v * fb);

    const double fc = rng.uniform(std::max(0.0, 1.0 - policy.contrast), 1.0 + policy.contrast);
    double mean = 0.0;
    if (c == 3) {
      for (std::size_t p = 0; p < hw; ++p) mean += luma(y[p], y[hw + p], y[2 * hw + p]);
    } else {
      for (std::size_t i = 0; i < numel; ++i) mean += y[i];
    }
    mean /= static_cast<double>(c == 3 ? hw : numel);
    for (auto& v : y) v = clamp01(mean + (v - mean) * fc);

    if (c == 3) {
      const double fs =
          rng.uniform(std::max(0.0, 1.0 - policy.saturation), 1.0 + policy.saturation);
      for (std::size_t p = 0; p < hw; ++p) {
        const double l = luma(y[p], y[hw + p], y[2 * hw + p]);
        y[p] = clamp01(l + (y[p] - l) * fs);
        y[hw + p] = clamp01(l + (y[hw + p] - l) * fs);
        y[2 * hw + p] = clamp01(l + (y[2 * hw + p] - l) * fs);
      }
      const double dh = rng.uniform(-policy.hue, policy.hue);
      if (dh != 0.0) {
        for (std::size_t p = 0; p < hw; ++p) {
          double hh, ss, vv;
          rgb_to_hsv(y[p], y[hw + p], y[2 * hw + p], hh, ss, vv);
          hsv_to_rgb(hh + dh, ss, vv, y[p], y[hw + p], y[2 * hw + p]);
        }
      }
    }
    for (std::size_t i = 0; i < numel; ++i) out[i] = clamp1(y[i] * 2.0 - 1.0);
  }

  if (c == 3 && rng.bernoulli(policy.grayscale_p)) {
    const std::size_t hw = h * w;
    for (std::size_t p = 0; p < hw; ++p) {
      const double l = luma((out[p] + 1.0) * 0.5, (out[hw + p] + 1.0) * 0.5,
                            (out[2 * hw + p] + 1.0) * 0.5);
      const double v = clamp1(l * 2.0 - 1.0);
      out[p] = v;
      out[hw + p] = v;
      out[2 * hw + p] = v;
    }
  }
}

void make_views(const double* x, std::size_t c, std::size_t h, std::size_t w,
                const AugmentPolicy& policy, Rng& rng, double* view1, double* view2) {
  augment_one(x, c, h, w, policy, rng, view1);
  augment_one(x, c, h, w, policy, rng, view2);
}

std::vector<double> expand_grayscale(const std::vector<double>& x, std::size_t c, std::size_t h,
                                     std::size_t w) {
  if (c != 1)
    throw std::invalid_argument("expand_grayscale: input must be single-channel, got " +
                                std::to_string(c));
  if (x.size() != h * w)
    throw std::invalid_argument("expand_grayscale: pixel count mismatch");
  std::vector<double> out(3 * h * w);
  for (int ch = 0; ch < 3; ++ch) std::copy(x.begin(), x.end(), out.begin() + ch * h * w);
  return out;
}

}  // namespace imoc::augment
