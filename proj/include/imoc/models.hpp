#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "imoc/tensor.hpp"

namespace imoc::models {

enum class Variant { tiny, small, big };

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

struct EncoderConfig {
  Variant variant = Variant::tiny;
  // Zero means "variant default" (small: 128/1024/10, big: 192/1536/8).
  std::size_t ndf = 0;
  std::size_t nrkhs = 0;
  std::size_t ndepth = 0;
  std::size_t in_channels = 16, in_h = 1, in_w = 1;

  // Copy with variant defaults filled in. Tiny pins nrkhs = 32.
  EncoderConfig resolved() const;
};

struct EncoderOutput {
  Tensor global;  // N x nrkhs
  Tensor local;   // N x d_l x h x w (tiny: global reshaped to 1x1)
};

// Convolutional residual encoder (or the tiny MLP). The residual block
// 5-tuple (in, out, kernel, stride, depth) reads: first conv applies
// kernel/stride with no padding, then `depth` 3x3 same-padded conv+relu
// sublayers; the identity path subsamples to the aligned window and applies
// a 1x1 conv when channel counts change.
class Encoder {
 public:
  Encoder(const EncoderConfig& cfg, std::uint64_t seed);

  // Input must match the configured shape and be normalized to [-1, 1].
  EncoderOutput encode(const Tensor& batch) const;

  const EncoderConfig& config() const { return cfg_; }
  std::size_t global_dim() const { return cfg_.nrkhs; }
  // d_l, h, w of the local feature map.
  const std::vector<std::size_t>& local_shape() const { return local_shape_; }
  std::size_t param_count() const;
  std::vector<std::pair<std::string, Tensor>>& named_params() { return params_; }
  const std::vector<std::pair<std::string, Tensor>>& named_params() const { return params_; }
  std::vector<Tensor> params() const;

 private:
  struct Conv {
    std::size_t w_idx, b_idx;
    std::size_t kernel, stride, pad;
    bool relu;
  };
  struct Block {
    Conv first;
    std::vector<Conv> inner;
    bool has_short_conv = false;
    std::size_t short_w_idx = 0, short_b_idx = 0;
    std::size_t out_h = 0, out_w = 0;  // fixed by the configured input size
  };

  Tensor apply_conv(const Conv& c, const Tensor& x, const char* label) const;
  Tensor apply_block(const Block& b, const Tensor& x, const char* label) const;
  std::size_t add_param(const std::string& name, Shape shape, std::size_t fan_in, class RngRef& rng);

  EncoderConfig cfg_;
  std::vector<std::pair<std::string, Tensor>> params_;
  std::vector<Conv> stem_;
  std::vector<Block> blocks_;
  std::size_t local_tap_ = 0;  // block index providing f_local
  std::vector<std::size_t> local_shape_;
  std::size_t global_h_ = 1, global_w_ = 1;
};

// Per-location nonlinear projection of local features to the global
// dimension: 1x1 conv -> relu -> 1x1 conv. Identity for the tiny variant
// (its local map already equals the global vector).
class ProjectionHead {
 public:
  ProjectionHead();  // identity
  ProjectionHead(std::size_t d_local, std::size_t d_out, std::uint64_t seed);

  Tensor forward(const Tensor& local) const;
  bool identity() const { return identity_; }
  std::vector<std::pair<std::string, Tensor>>& named_params() { return params_; }
  const std::vector<std::pair<std::string, Tensor>>& named_params() const { return params_; }

 private:
  bool identity_ = true;
  std::vector<std::pair<std::string, Tensor>> params_;
};

}  // namespace imoc::models
