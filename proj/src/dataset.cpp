#include "imoc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "imoc/rng.hpp"

namespace imoc::dataset {

namespace {

inline float u8_to_unit(std::uint8_t v) {
  return static_cast<float>((2.0 * v - 255.0) / 255.0);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open file: " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace

IdxArray parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw std::runtime_error("idx: truncated header at byte 0");
  const std::uint32_t magic = be32(bytes, 0);
  if (magic != 0x00000803u && magic != 0x00000801u)
    throw std::runtime_error("idx: bad magic 0x" + [&] {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%08x", magic);
      return std::string(buf);
    }() + " at byte 0");
  const std::size_t ndims = magic & 0xFF;
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header)
    throw std::runtime_error("idx: truncated dimension header at byte " +
                             std::to_string(bytes.size()));
  IdxArray arr;
  std::size_t total = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    const std::size_t extent = be32(bytes, 4 + 4 * d);
    arr.dims.push_back(extent);
    total *= extent;
  }
  if (bytes.size() < header + total)
    throw std::runtime_error("idx: payload ends at byte " + std::to_string(bytes.size()) +
                             ", header promises " + std::to_string(header + total));
  arr.data.assign(bytes.begin() + header, bytes.begin() + header + total);
  return arr;
}

namespace {

void append_images(const IdxArray& imgs, const IdxArray& labels, std::vector<float>& px,
                   std::vector<std::uint8_t>& labs) {
  if (imgs.dims.size() != 3)
    throw std::runtime_error("idx: image tensor must be rank 3, got rank " +
                             std::to_string(imgs.dims.size()));
  if (labels.dims.size() != 1 || labels.dims[0] != imgs.dims[0])
    throw std::runtime_error("idx: label count does not match image count");
  px.reserve(px.size() + imgs.data.size());
  for (auto v : imgs.data) px.push_back(u8_to_unit(v));
  labs.insert(labs.end(), labels.data.begin(), labels.data.end());
}

}  // namespace

Dataset load_idx_dataset(const std::string& dir) {
  const auto tri = parse_idx(read_file(dir + "/train-images-idx3-ubyte"));
  const auto trl = parse_idx(read_file(dir + "/train-labels-idx1-ubyte"));
  const auto tei = parse_idx(read_file(dir + "/t10k-images-idx3-ubyte"));
  const auto tel = parse_idx(read_file(dir + "/t10k-labels-idx1-ubyte"));
  Dataset ds;
  ds.channels = 1;
  ds.height = tri.dims[1];
  ds.width = tri.dims[2];
  append_images(tri, trl, ds.train_px, ds.train_labels);
  append_images(tei, tel, ds.test_px, ds.test_labels);
  std::uint8_t maxl = 0;
  for (auto l : ds.train_labels) maxl = std::max(maxl, l);
  for (auto l : ds.test_labels) maxl = std::max(maxl, l);
  ds.num_classes = maxl + 1;
  return ds;
}

CifarBatch parse_cifar(std::span<const std::uint8_t> bytes, CifarVariant variant) {
  const std::size_t label_bytes = variant == CifarVariant::c10 ? 1 : 2;
  const std::size_t record = label_bytes + 3072;
  if (bytes.size() % record != 0)
    throw std::runtime_error("cifar: file length " + std::to_string(bytes.size()) +
                             " is not a multiple of record size " + std::to_string(record));
  const std::size_t n = bytes.size() / record;
  CifarBatch out;
  out.images.reserve(n * 3072);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + i * record;
    // c100 records carry (coarse, fine); the coarse label realizes the
    // 20-superclass protocol.
    out.labels.push_back(rec[0]);
    out.images.insert(out.images.end(), rec + label_bytes, rec + record);
  }
  if (variant == CifarVariant::c100_coarse)
    for (auto l : out.labels)
      if (l > 19) throw std::runtime_error("cifar: coarse label out of range [0,19]");
  return out;
}

namespace {
void append_cifar(const CifarBatch& b, std::vector<float>& px, std::vector<std::uint8_t>& labs) {
  for (auto v : b.images) px.push_back(u8_to_unit(v));
  labs.insert(labs.end(), b.labels.begin(), b.labels.end());
}
}  // namespace

Dataset load_cifar10(const std::string& dir) {
  Dataset ds;
  ds.channels = 3;
  ds.height = 32;
  ds.width = 32;
  ds.num_classes = 10;
  for (int i = 1; i <= 5; ++i) {
    auto b = parse_cifar(read_file(dir + "/data_batch_" + std::to_string(i) + ".bin"),
                         CifarVariant::c10);
    append_cifar(b, ds.train_px, ds.train_labels);
  }
  auto t = parse_cifar(read_file(dir + "/test_batch.bin"), CifarVariant::c10);
  append_cifar(t, ds.test_px, ds.test_labels);
  return ds;
}

Dataset load_cifar100_coarse(const std::string& dir) {
  Dataset ds;
  ds.channels = 3;
  ds.height = 32;
  ds.width = 32;
  ds.num_classes = 20;
  auto tr = parse_cifar(read_file(dir + "/train.bin"), CifarVariant::c100_coarse);
  append_cifar(tr, ds.train_px, ds.train_labels);
  auto te = parse_cifar(read_file(dir + "/test.bin"), CifarVariant::c100_coarse);
  append_cifar(te, ds.test_px, ds.test_labels);
  return ds;
}

OneClassTask make_one_class_task(const Dataset& ds, std::size_t normal_class) {
  if (ds.num_classes < 2)
    throw std::invalid_argument("one-class task: dataset must have at least 2 classes, got " +
                                std::to_string(ds.num_classes));
  if (normal_class >= ds.num_classes)
    throw std::invalid_argument("one-class task: class " + std::to_string(normal_class) +
                                " out of range [0," + std::to_string(ds.num_classes - 1) + "]");
  OneClassTask t;
  t.normal_class = normal_class;
  t.num_classes = ds.num_classes;
  t.channels = ds.channels;
  t.height = ds.height;
  t.width = ds.width;
  const std::size_t ss = ds.sample_size();
  for (std::size_t i = 0; i < ds.train_count(); ++i) {
    if (ds.train_labels[i] != normal_class) continue;
    const float* img = ds.train_image(i);
    t.train_px.insert(t.train_px.end(), img, img + ss);
  }
  t.test_px = ds.test_px;
  t.test_is_normal.reserve(ds.test_count());
  for (auto l : ds.test_labels) t.test_is_normal.push_back(l == normal_class ? 1 : 0);
  if (t.train_px.empty())
    throw std::invalid_argument("one-class task: no training samples of class " +
                                std::to_string(normal_class));
  return t;
}

Dataset synth_gauss_clusters(const GaussSpec& spec, std::uint64_t seed) {
  if (spec.dim < 2 || spec.classes < 1)
    throw std::invalid_argument("gauss-clusters: dim >= 2 and classes >= 1 required");
  Rng rng(Rng::mix(seed ^ 0x6A55C1ULL));
  const std::size_t C = spec.classes, D = spec.dim;
  // Class means on a common sphere of radius `separation`, pairwise at least
  // `separation` apart.
  std::vector<double> means(C * D, 0.0);
  if (spec.separation > 0.0) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 1000)
        throw std::runtime_error("gauss-clusters: could not place class means");
      for (std::size_t c = 0; c < C; ++c) {
        double norm = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
          means[c * D + d] = rng.normal();
          norm += means[c * D + d] * means[c * D + d];
        }
        norm = std::sqrt(norm);
        for (std::size_t d = 0; d < D; ++d) means[c * D + d] *= spec.separation / norm;
      }
      bool ok = true;
      for (std::size_t a = 0; a < C && ok; ++a)
        for (std::size_t b = a + 1; b < C && ok; ++b) {
          double d2 = 0.0;
          for (std::size_t d = 0; d < D; ++d) {
            const double diff = means[a * D + d] - means[b * D + d];
            d2 += diff * diff;
          }
          ok = d2 >= spec.separation * spec.separation;
        }
      if (ok) break;
    }
  }
  const double bound = spec.separation + 5.0;  // ~5 sigma; rare tails clamp
  Dataset ds;
  ds.channels = D;
  ds.height = 1;
  ds.width = 1;
  ds.num_classes = C;
  auto emit = [&](std::size_t per_class, std::vector<float>& px, std::vector<std::uint8_t>& labs) {
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t d = 0; d < D; ++d) {
          const double v = (means[c * D + d] + rng.normal()) / bound;
          px.push_back(static_cast<float>(std::min(1.0, std::max(-1.0, v))));
        }
        labs.push_back(static_cast<std::uint8_t>(c));
      }
  };
  emit(spec.train_per_class, ds.train_px, ds.train_labels);
  emit(spec.test_per_class, ds.test_px, ds.test_labels);
  return ds;
}

namespace {

// Shape classes: 0 disk, 1 square, 2 cross, 3 diamond (cycled if more).
void render_blob(std::size_t cls, std::size_t n, double cx, double cy, double r, float* out) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double dy = static_cast<double>(i) - cy;
      const double dx = static_cast<double>(j) - cx;
      bool inside = false;
      switch (cls % 4) {
        case 0:
          inside = dx * dx + dy * dy <= r * r;
          break;
        case 1:
          inside = std::abs(dx) <= r * 0.9 && std::abs(dy) <= r * 0.9;
          break;
        case 2:
          inside = (std::abs(dx) <= r * 0.35 && std::abs(dy) <= r) ||
                   (std::abs(dy) <= r * 0.35 && std::abs(dx) <= r);
          break;
        default:
          inside = std::abs(dx) + std::abs(dy) <= r * 1.2;
          break;
      }
      out[i * n + j] = inside ? 1.0f : -1.0f;
    }
}

}  // namespace

Dataset synth_blob_images(const BlobSpec& spec, std::uint64_t seed) {
  if (spec.size < 8) throw std::invalid_argument("blobs-images: size must be >= 8");
  Rng rng(Rng::mix(seed ^ 0xB10B5ULL));
  Dataset ds;
  ds.channels = 1;
  ds.height = spec.size;
  ds.width = spec.size;
  ds.num_classes = spec.classes;
  const double mid = static_cast<double>(spec.size - 1) / 2.0;
  auto emit = [&](std::size_t per_class, std::vector<float>& px, std::vector<std::uint8_t>& labs) {
    std::vector<float> img(spec.size * spec.size);
    for (std::size_t c = 0; c < spec.classes; ++c)
      for (std::size_t i = 0; i < per_class; ++i) {
        const double cx = mid + rng.uniform(-2.0, 2.0);
        const double cy = mid + rng.uniform(-2.0, 2.0);
        const double r = rng.uniform(spec.size * 0.20, spec.size * 0.32);
        render_blob(c, spec.size, cx, cy, r, img.data());
        px.insert(px.end(), img.begin(), img.end());
        labs.push_back(static_cast<std::uint8_t>(c));
      }
  };
  emit(spec.train_per_class, ds.train_px, ds.train_labels);
  emit(spec.test_per_class, ds.test_px, ds.test_labels);
  return ds;
}

}  // namespace imoc::dataset
