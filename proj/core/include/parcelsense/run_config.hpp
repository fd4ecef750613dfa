#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "parcelsense/labeler.hpp"
#include "parcelsense/pipeline.hpp"

namespace parcelsense {

/// Every tunable of a pipeline run. Text form is one `key = value` per line;
/// `#` starts a comment.
struct RunConfig {
  std::uint64_t seed = 1;
  unsigned threads = 1;

  int w_min = 20;
  int attempts = 300;
  double membership_threshold = 0.80;

  std::array<double, 3> labeler_split = {0.8, 0.1, 0.1};
  double learning_rate = 0.001;
  int iterations = 10000;
  int batch_size = 100;
  int crops_per_image = 10;
  double scale_lo = 0.5;
  double scale_hi = 1.0;

  double train_fraction = 0.6;
  double holdout_fraction = 0.0;
  int n_trees = 100;
  int features_per_split = 0;
  int min_samples_leaf = 1;

  int repetitions = 100;
  /// `native`, `oracle`, or `exec:<command>`.
  std::string labeler = "native";
  int timeout_ms = 30000;

  /// ConfigError for an unknown key or a value that does not parse.
  void set(std::string_view key, std::string_view value);
  /// Applies a `key = value` text; `origin` names it in error messages.
  void merge_text(std::string_view text, const std::string& origin = "config");
  /// ConfigError naming the first out-of-range field.
  void validate() const;

  PipelineConfig pipeline() const;
  LabelerTrainingConfig labeler_training() const;
  std::string to_text() const;
};

/// Reads and merges a config file over the defaults. DataError when the file
/// cannot be read, ConfigError for bad contents.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace parcelsense
