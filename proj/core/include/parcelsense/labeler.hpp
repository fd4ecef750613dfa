#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parcelsense/errors.hpp"
#include "parcelsense/rng.hpp"
#include "parcelsense/sampler.hpp"

namespace parcelsense {

// ---------------------------------------------------------------------------
// Patch labelers

/// Assigns a land-cover word to each patch. Implementations must be safe to
/// call concurrently from several threads.
class PatchLabeler {
 public:
  virtual ~PatchLabeler() = default;

  /// Ordered word list; label() returns indices into it.
  virtual const std::vector<std::string>& vocabulary() const = 0;

  /// One vocabulary index per patch, in input order.
  virtual std::vector<std::size_t> label(std::span<const PatchSample> patches) const = 0;
};

// ---------------------------------------------------------------------------
// Patch features

inline constexpr int kResampleSide = 16;
inline constexpr int kHistogramBins = 16;
inline constexpr int kFeatureLayoutVersion = 1;

/// Per band: a 16x16 bilinear resample scaled to [0, 1]; then per band a
/// 16-bin histogram normalized to sum 1.
std::size_t feature_length(int bands);

std::vector<double> featurize(const RasterGrid& pixels);
inline std::vector<double> featurize_patch(const PatchSample& patch) { return featurize(patch.pixels); }

// ---------------------------------------------------------------------------
// Multinomial logistic regression

/// Overflow-safe e^z_j / sum_k e^z_k.
std::vector<double> softmax(std::span<const double> logits);

struct SoftmaxModel {
  std::vector<std::string> classes;
  int bands = 0;
  std::size_t feature_count = 0;
  /// classes.size() rows of (feature_count + 1) values; bias is the last column.
  std::vector<double> weights;

  std::size_t class_count() const { return classes.size(); }
  std::size_t row_length() const { return feature_count + 1; }

  std::vector<double> logits(std::span<const double> features) const;
  /// argmax of logits, lowest index on ties.
  std::size_t predict(std::span<const double> features) const;
};

/// Zero-initialized model.
SoftmaxModel make_softmax_model(std::vector<std::string> classes, int bands);

struct LabeledFeatures {
  std::vector<double> features;
  std::size_t label = 0;
};

/// Mean cross-entropy over `batch`.
double cross_entropy_loss(const SoftmaxModel& model, std::span<const LabeledFeatures> batch);

/// Gradient of cross_entropy_loss with respect to model.weights (same layout).
std::vector<double> cross_entropy_gradient(const SoftmaxModel& model,
                                           std::span<const LabeledFeatures> batch);

struct SoftmaxTrainParams {
  double learning_rate = 0.001;
  int iterations = 10000;
  int batch_size = 100;
  std::uint64_t seed = 0;
};

struct SoftmaxTrainResult {
  SoftmaxModel model;
  double train_accuracy = 0.0;
  std::optional<double> validation_accuracy;
};

/// Mini-batch gradient descent from zero weights. Batches are consecutive
/// slices of a per-epoch shuffle drawn from `params.seed`; a batch size of at
/// least the dataset size uses the whole set every step.
SoftmaxTrainResult train_softmax(std::vector<std::string> classes, int bands,
                                 std::span<const LabeledFeatures> train,
                                 std::span<const LabeledFeatures> validation,
                                 const SoftmaxTrainParams& params);

double accuracy(const SoftmaxModel& model, std::span<const LabeledFeatures> data);

std::size_t predict_word(const SoftmaxModel& model, const PatchSample& patch);

std::string model_to_json(const SoftmaxModel& model);
SoftmaxModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const SoftmaxModel& model);
SoftmaxModel load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Dataset splitting

template <typename T>
struct DatasetSplit {
  std::vector<T> train;
  std::vector<T> validation;
  std::vector<T> test;
};

/// Sizes for a three-way split: floor for the first two parts, remainder to
/// the last.
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& fractions);

/// Shuffles with `rng` and cuts at split_sizes().
template <typename T>
DatasetSplit<T> split_dataset(std::vector<T> items, const std::array<double, 3>& fractions,
                              Rng& rng) {
  if (items.empty()) throw ConfigError("cannot split an empty dataset");
  const auto sizes = split_sizes(items.size(), fractions);
  std::shuffle(items.begin(), items.end(), rng);
  DatasetSplit<T> out;
  auto first = std::make_move_iterator(items.begin());
  out.train.assign(first, first + sizes[0]);
  out.validation.assign(first + sizes[0], first + sizes[0] + sizes[1]);
  out.test.assign(first + sizes[0] + sizes[1], std::make_move_iterator(items.end()));
  return out;
}

// ---------------------------------------------------------------------------
// Native labeler

class NativeLabeler final : public PatchLabeler {
 public:
  explicit NativeLabeler(SoftmaxModel model);

  const std::vector<std::string>& vocabulary() const override { return model_.classes; }
  std::vector<std::size_t> label(std::span<const PatchSample> patches) const override;
  const SoftmaxModel& model() const { return model_; }

 private:
  SoftmaxModel model_;
};

/// Source images grouped by class: one sub-directory per land-cover word,
/// containing PNG files. Class order is the sorted directory names.
struct PatchDataset {
  std::vector<std::string> classes;
  std::vector<std::pair<RasterGrid, std::size_t>> images;
};

PatchDataset load_patch_dataset(const std::filesystem::path& root);

struct LabelerTrainingConfig {
  SoftmaxTrainParams softmax;
  std::array<double, 3> split = {0.8, 0.1, 0.1};
  int crops_per_image = 10;
  double scale_lo = 0.5;
  double scale_hi = 1.0;
};

struct LabelerTrainingReport {
  SoftmaxTrainResult result;
  std::optional<double> test_accuracy;
  std::array<std::size_t, 3> image_counts{};
};

/// Splits source images, augments the training part with multi-scale crops,
/// featurizes and trains. Validation and test images are featurized whole.
LabelerTrainingReport train_labeler(const PatchDataset& dataset, const LabelerTrainingConfig& config);

}  // namespace parcelsense
