#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace imoc::dataset {

// Labeled image/vector dataset with its default train/test split. Pixels are
// stored CHW, normalized to [-1, 1].
struct Dataset {
  std::size_t channels = 0, height = 0, width = 0;
  std::size_t num_classes = 0;
  std::vector<float> train_px;
  std::vector<std::uint8_t> train_labels;
  std::vector<float> test_px;
  std::vector<std::uint8_t> test_labels;

  std::size_t sample_size() const { return channels * height * width; }
  std::size_t train_count() const { return train_labels.size(); }
  std::size_t test_count() const { return test_labels.size(); }
  const float* train_image(std::size_t i) const { return train_px.data() + i * sample_size(); }
  const float* test_image(std::size_t i) const { return test_px.data() + i * sample_size(); }
};

// One-class protocol: train on a single class, test against everything.
struct OneClassTask {
  std::size_t normal_class = 0, num_classes = 0;
  std::size_t channels = 0, height = 0, width = 0;
  std::vector<float> train_px;                // normal-only
  std::vector<float> test_px;                 // all classes
  std::vector<std::uint8_t> test_is_normal;   // 1 = normal

  std::size_t sample_size() const { return channels * height * width; }
  std::size_t train_count() const { return train_px.size() / sample_size(); }
  std::size_t test_count() const { return test_is_normal.size(); }
  const float* train_image(std::size_t i) const { return train_px.data() + i * sample_size(); }
  const float* test_image(std::size_t i) const { return test_px.data() + i * sample_size(); }
};

OneClassTask make_one_class_task(const Dataset& ds, std::size_t normal_class);

// IDX (big-endian) container: u8 tensors (magic 0x803) or labels (0x801).
struct IdxArray {
  std::vector<std::size_t> dims;
  std::vector<std::uint8_t> data;
};
IdxArray parse_idx(std::span<const std::uint8_t> bytes);

// Directory with the four canonical IDX files (train/t10k images+labels).
Dataset load_idx_dataset(const std::string& dir);

enum class CifarVariant { c10, c100_coarse };
struct CifarBatch {
  std::vector<std::uint8_t> images;  // N x 3 x 32 x 32, channel-major planes
  std::vector<std::uint8_t> labels;
};
CifarBatch parse_cifar(std::span<const std::uint8_t> bytes, CifarVariant variant);
Dataset load_cifar10(const std::string& dir);
Dataset load_cifar100_coarse(const std::string& dir);

// Synthetic generators for desk-scale experiments.
struct GaussSpec {
  std::size_t dim = 16;
  std::size_t classes = 4;
  std::size_t train_per_class = 2000;
  std::size_t test_per_class = 250;
  // Minimum pairwise distance between class means; all means sit at this
  // radius from the origin so the raw input norm carries no class signal.
  double separation = 6.0;
};
Dataset synth_gauss_clusters(const GaussSpec& spec, std::uint64_t seed);

struct BlobSpec {
  std::size_t size = 16;  // square image side
  std::size_t classes = 4;
  std::size_t train_per_class = 1500;
  std::size_t test_per_class = 250;
};
Dataset synth_blob_images(const BlobSpec& spec, std::uint64_t seed);

}  // namespace imoc::dataset
