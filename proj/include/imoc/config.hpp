#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "imoc/augment.hpp"
#include "imoc/dataset.hpp"

namespace imoc {

// All hyperparameters of one run. Flat key-value config files (one
// `key = value` per line, '#' comments, dotted keys for grouping) populate
// this; unknown keys are rejected by name.
struct RunConfig {
  // data
  std::string dataset = "gauss-clusters";  // gauss-clusters | blobs-images |
                                           // mnist | fashion-mnist | cifar10 |
                                           // cifar100-coarse
  std::string data_dir;
  std::size_t normal_class = 0;
  dataset::GaussSpec gauss;
  dataset::BlobSpec blobs;

  // model
  std::string model = "tiny";
  std::size_t ndf = 0, nrkhs = 0, ndepth = 0;  // 0 = variant default
  bool extension = false;

  // loss
  double beta = 20.0;
  int p_norm = 1;
  std::optional<bool> entropy_squared;  // default: squared iff p = 2
  std::string estimator = "nce";        // nce | jsd
  double c2 = 20.0;

  // training
  std::size_t epochs = 400;
  std::size_t batch_size = 64;
  double lr = 2e-4;
  std::uint64_t seed = 1;
  std::size_t eval_every = 5;
  int precision = 32;  // training default; verification runs at 64

  // scoring
  std::size_t mc_samples = 100;

  augment::AugmentPolicy augment;

  bool entropy_squared_resolved() const {
    return entropy_squared.value_or(p_norm == 2);
  }
  void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);
// Round-trippable serialization (used verbatim inside checkpoints).
std::string serialize_config(const RunConfig& cfg);

// Builds the configured dataset (reads files or synthesizes).
dataset::Dataset load_dataset(const RunConfig& cfg);

}  // namespace imoc
