#include "imoc/models.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "imoc/ops.hpp"
#include "imoc/rng.hpp"

namespace imoc::models {

Variant variant_from_string(const std::string& s) {
  if (s == "tiny") return Variant::tiny;
  if (s == "small") return Variant::small;
  if (s == "big") return Variant::big;
  throw std::invalid_argument("model variant must be tiny|small|big, got '" + s + "'");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::tiny:
      return "tiny";
    case Variant::small:
      return "small";
    case Variant::big:
      return "big";
  }
  return "?";
}

EncoderConfig EncoderConfig::resolved() const {
  EncoderConfig r = *this;
  switch (variant) {
    case Variant::tiny:
      r.ndf = 0;
      r.nrkhs = 32;
      r.ndepth = 0;
      break;
    case Variant::small:
      if (r.ndf == 0) r.ndf = 128;
      if (r.nrkhs == 0) r.nrkhs = 1024;
      if (r.ndepth == 0) r.ndepth = 10;
      break;
    case Variant::big:
      if (r.ndf == 0) r.ndf = 192;
      if (r.nrkhs == 0) r.nrkhs = 1536;
      if (r.ndepth == 0) r.ndepth = 8;
      break;
  }
  return r;
}

namespace {
constexpr std::size_t kTinyHidden1 = 256;
constexpr std::size_t kTinyHidden2 = 128;
constexpr std::size_t kTinyOut = 32;
}  // namespace

// Thin wrapper so the header needn't pull in rng.hpp.
class RngRef {
 public:
  explicit RngRef(Rng& r) : r_(r) {}
  Rng& get() { return r_; }

 private:
  Rng& r_;
};

std::size_t Encoder::add_param(const std::string& name, Shape shape, std::size_t fan_in,
                               RngRef& rng) {
  const double bound = fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0;
  std::vector<double> vals(shape_numel(shape));
  for (auto& v : vals) v = rng.get().uniform(-bound, bound);
  params_.emplace_back(name, Tensor::from_data(std::move(shape), std::move(vals), true));
  return params_.size() - 1;
}

Encoder::Encoder(const EncoderConfig& cfg, std::uint64_t seed) : cfg_(cfg.resolved()) {
  Rng rng(Rng::mix(seed ^ 0xE4C0DE5ULL));
  RngRef rr(rng);
  if (cfg_.variant == Variant::tiny) {
    const std::size_t d = cfg_.in_channels * cfg_.in_h * cfg_.in_w;
    add_param("fc1.w", {d, kTinyHidden1}, d, rr);
    params_.emplace_back("fc1.b", Tensor::zeros({kTinyHidden1}, true));
    add_param("fc2.w", {kTinyHidden1, kTinyHidden2}, kTinyHidden1, rr);
    params_.emplace_back("fc2.b", Tensor::zeros({kTinyHidden2}, true));
    add_param("fc3.w", {kTinyHidden2, kTinyOut}, kTinyHidden2, rr);
    params_.emplace_back("fc3.b", Tensor::zeros({kTinyOut}, true));
    local_shape_ = {kTinyOut, 1, 1};
    return;
  }

  struct BlockSpec {
    std::size_t in, out, kernel, stride, depth;
  };
  std::vector<std::array<std::size_t, 3>> stem_spec;  // kernel, stride, pad
  std::vector<std::size_t> stem_out;
  std::vector<BlockSpec> block_spec;
  const std::size_t ndf = cfg_.ndf, nd = cfg_.ndepth, nrkhs = cfg_.nrkhs;
  if (cfg_.variant == Variant::small) {
    stem_spec = {{3, 1, 0}};
    stem_out = {ndf};
    block_spec = {{ndf, ndf, 1, 1, 0},          {ndf, 2 * ndf, 4, 2, nd},
                  {2 * ndf, 4 * ndf, 2, 2, nd}, {4 * ndf, 4 * ndf, 3, 1, nd},
                  {4 * ndf, 4 * ndf, 3, 1, nd}, {4 * ndf, nrkhs, 3, 1, 1}};
    local_tap_ = 3;
  } else {
    stem_spec = {{5, 2, 2}, {3, 1, 0}};
    stem_out = {ndf, ndf};
    block_spec = {{ndf, 2 * ndf, 4, 2, nd},     {2 * ndf, 4 * ndf, 4, 2, nd},
                  {4 * ndf, 8 * ndf, 2, 2, nd}, {8 * ndf, 8 * ndf, 3, 1, nd},
                  {8 * ndf, 8 * ndf, 3, 1, nd}, {8 * ndf, nrkhs, 3, 1, 1}};
    local_tap_ = 3;
  }

  auto out_size = [](std::size_t in, std::size_t k, std::size_t s, std::size_t p,
                     const std::string& label) {
    if (in + 2 * p < k)
      throw std::invalid_argument("build_encoder: input too small at " + label + " (size " +
                                  std::to_string(in) + " vs kernel " + std::to_string(k) + ")");
    std::size_t o = (in + 2 * p - k) / s + 1;
    if (o < 1)
      throw std::invalid_argument("build_encoder: layer " + label + " produces empty output");
    return o;
  };

  std::size_t c = cfg_.in_channels, h = cfg_.in_h, w = cfg_.in_w;
  for (std::size_t i = 0; i < stem_spec.size(); ++i) {
    auto [k, s, p] = stem_spec[i];
    const std::string label = "stem" + std::to_string(i);
    Conv cv;
    cv.kernel = k;
    cv.stride = s;
    cv.pad = p;
    cv.relu = true;
    cv.w_idx = add_param(label + ".w", {stem_out[i], c, k, k}, c * k * k, rr);
    params_.emplace_back(label + ".b", Tensor::zeros({stem_out[i]}, true));
    cv.b_idx = params_.size() - 1;
    stem_.push_back(cv);
    h = out_size(h, k, s, p, label);
    w = out_size(w, k, s, p, label);
    c = stem_out[i];
  }
  for (std::size_t bi = 0; bi < block_spec.size(); ++bi) {
    const auto& bs = block_spec[bi];
    const std::string label = "block" + std::to_string(bi);
    Block blk;
    blk.first.kernel = bs.kernel;
    blk.first.stride = bs.stride;
    blk.first.pad = 0;
    blk.first.relu = true;
    blk.first.w_idx =
        add_param(label + ".first.w", {bs.out, bs.in, bs.kernel, bs.kernel},
                  bs.in * bs.kernel * bs.kernel, rr);
    params_.emplace_back(label + ".first.b", Tensor::zeros({bs.out}, true));
    blk.first.b_idx = params_.size() - 1;
    const std::size_t oh = out_size(h, bs.kernel, bs.stride, 0, label + ".first");
    const std::size_t ow = out_size(w, bs.kernel, bs.stride, 0, label + ".first");
    for (std::size_t di = 0; di < bs.depth; ++di) {
      Conv cv;
      cv.kernel = 3;
      cv.stride = 1;
      cv.pad = 1;
      cv.relu = true;
      const std::string ilabel = label + ".inner" + std::to_string(di);
      cv.w_idx = add_param(ilabel + ".w", {bs.out, bs.out, 3, 3}, bs.out * 9, rr);
      params_.emplace_back(ilabel + ".b", Tensor::zeros({bs.out}, true));
      cv.b_idx = params_.size() - 1;
      blk.inner.push_back(cv);
    }
    if (bs.in != bs.out) {
      blk.has_short_conv = true;
      blk.short_w_idx = add_param(label + ".short.w", {bs.out, bs.in, 1, 1}, bs.in, rr);
      params_.emplace_back(label + ".short.b", Tensor::zeros({bs.out}, true));
      blk.short_b_idx = params_.size() - 1;
    }
    blk.out_h = oh;
    blk.out_w = ow;
    blocks_.push_back(blk);
    h = oh;
    w = ow;
    c = bs.out;
    if (bi == local_tap_) local_shape_ = {bs.out, oh, ow};
  }
  global_h_ = h;
  global_w_ = w;
}

Tensor Encoder::apply_conv(const Conv& c, const Tensor& x, const char* label) const {
  Tensor y = ops::conv2d(x, params_[c.w_idx].second, params_[c.b_idx].second, c.stride, c.pad,
                         label);
  return c.relu ? ops::relu(y) : y;
}

Tensor Encoder::apply_block(const Block& b, const Tensor& x, const char* label) const {
  Tensor main = apply_conv(b.first, x, label);
  for (const auto& cv : b.inner) main = apply_conv(cv, main, label);
  Tensor shortcut = x;
  if (x.shape()[2] != b.out_h || x.shape()[3] != b.out_w)
    shortcut = ops::spatial_subsample(shortcut, b.first.stride, b.first.stride, b.out_h, b.out_w);
  if (b.has_short_conv)
    shortcut = ops::conv2d(shortcut, params_[b.short_w_idx].second, params_[b.short_b_idx].second,
                           1, 0, label);
  return ops::add(main, shortcut);
}

EncoderOutput Encoder::encode(const Tensor& batch) const {
  const Shape want = {batch.defined() && batch.rank() > 0 ? batch.shape()[0] : 0, cfg_.in_channels,
                      cfg_.in_h, cfg_.in_w};
  if (batch.rank() != 4 || batch.shape()[1] != cfg_.in_channels || batch.shape()[2] != cfg_.in_h ||
      batch.shape()[3] != cfg_.in_w)
    throw std::invalid_argument("encode: batch shape " + shape_str(batch.shape()) +
                                " does not match configured input " + shape_str(want));
  for (double v : batch.values())
    if (!(v >= -1.0 - 1e-6 && v <= 1.0 + 1e-6))
      throw std::invalid_argument("encode: input not normalized to [-1,1], found value " +
                                  std::to_string(v));
  const std::size_t n = batch.shape()[0];

  if (cfg_.variant == Variant::tiny) {
    Tensor flat = ops::reshape(batch, {n, cfg_.in_channels * cfg_.in_h * cfg_.in_w});
    Tensor h1 = ops::relu(
        ops::add_rowvec(ops::matmul(flat, params_[0].second), params_[1].second));
    Tensor h2 = ops::relu(ops::add_rowvec(ops::matmul(h1, params_[2].second), params_[3].second));
    Tensor g = ops::add_rowvec(ops::matmul(h2, params_[4].second), params_[5].second);
    EncoderOutput out;
    out.global = g;
    out.local = ops::reshape(g, {n, kTinyOut, 1, 1});
    return out;
  }

  Tensor h = batch;
  std::size_t i = 0;
  for (const auto& cv : stem_) h = apply_conv(cv, h, ("stem" + std::to_string(i++)).c_str());
  EncoderOutput out;
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    h = apply_block(blocks_[bi], h, ("block" + std::to_string(bi)).c_str());
    if (bi == local_tap_) out.local = h;
  }
  if (global_h_ * global_w_ == 1) {
    out.global = ops::reshape(h, {n, cfg_.nrkhs});
  } else {
    Tensor flat = ops::reshape(h, {n, cfg_.nrkhs, global_h_ * global_w_});
    out.global = ops::mul_scalar(ops::sum_last_axis(flat),
                                 1.0 / static_cast<double>(global_h_ * global_w_));
  }
  return out;
}

std::size_t Encoder::param_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

std::vector<Tensor> Encoder::params() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& [name, t] : params_) out.push_back(t);
  return out;
}

ProjectionHead::ProjectionHead() = default;

ProjectionHead::ProjectionHead(std::size_t d_local, std::size_t d_out, std::uint64_t seed)
    : identity_(false) {
  Rng rng(Rng::mix(seed ^ 0x9807EADULL));
  auto init = [&](const std::string& name, Shape shape, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> vals(shape_numel(shape));
    for (auto& v : vals) v = rng.uniform(-bound, bound);
    params_.emplace_back(name, Tensor::from_data(std::move(shape), std::move(vals), true));
  };
  init("proj.w1", {d_local, d_local, 1, 1}, d_local);
  params_.emplace_back("proj.b1", Tensor::zeros({d_local}, true));
  init("proj.w2", {d_out, d_local, 1, 1}, d_local);
  params_.emplace_back("proj.b2", Tensor::zeros({d_out}, true));
}

Tensor ProjectionHead::forward(const Tensor& local) const {
  if (identity_) return local;
  Tensor h = ops::relu(ops::conv2d(local, params_[0].second, params_[1].second, 1, 0, "proj1"));
  return ops::conv2d(h, params_[2].second, params_[3].second, 1, 0, "proj2");
}

}  // namespace imoc::models
