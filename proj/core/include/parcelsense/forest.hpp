#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parcelsense/geodata.hpp"
#include "parcelsense/rng.hpp"

namespace parcelsense {

struct ForestConfig {
  int n_trees = 100;
  /// 0 selects floor(sqrt(F)), at least 1.
  int features_per_split = 0;
  int min_samples_leaf = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Fraction of the training set held back to measure a held-out error next
  /// to the out-of-bag error. 0 disables it.
  double holdout_fraction = 0.0;

  int resolved_features_per_split(std::size_t feature_count) const;
};

/// Flat node array; node 0 is the root. A node with feature < 0 is a leaf.
struct DecisionTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    int label = 0;  // class index, meaningful for leaves
  };
  std::vector<Node> nodes;

  /// Class index reached by `x`.
  int predict(std::span<const double> x) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

struct BootstrapSample {
  std::vector<std::size_t> in_bag;   // size N, with repetition
  std::vector<std::size_t> out_of_bag;  // ascending, never drawn
};

BootstrapSample bootstrap_sample(std::size_t n, Rng& rng);

/// Training rows as class indices in [0, class_count).
struct TrainingSet {
  std::span<const std::vector<double>> features;
  std::span<const int> labels;
  int class_count = 0;
};

/// Unpruned CART tree with Gini splits on the rows listed in `in_bag`
/// (repeats count as weight).
DecisionTree grow_tree(const TrainingSet& data, std::span<const std::size_t> in_bag,
                       const ForestConfig& config, Rng& rng);

struct ForestModel {
  ForestConfig config;
  /// Present classes in canonical order; trees store indices into this list.
  std::vector<LandUseLabel> classes;
  std::size_t feature_count = 0;
  std::vector<DecisionTree> trees;
  double oob_error = 0.0;
  /// Training rows that were out of bag for at least one tree.
  std::size_t oob_evaluated = 0;
  std::optional<double> holdout_error;
  /// Most frequent training class, used for parcels without features.
  LandUseLabel fallback = LandUseLabel::M;
};

/// Stream seed used for tree `t`'s bootstrap and feature draws.
inline std::uint64_t tree_seed(std::uint64_t forest_seed, std::size_t t) {
  return derive_seed(forest_seed, t);
}

/// Requires at least two distinct labels and equal lengths (ConfigError).
ForestModel train_forest(std::span<const std::vector<double>> features,
                         std::span<const LandUseLabel> labels, const ForestConfig& config);

/// Per-class vote counts, indexed like model.classes.
std::vector<int> vote(const ForestModel& model, std::span<const double> feature);

/// Majority vote; ties go to the earliest class in canonical order.
LandUseLabel predict(const ForestModel& model, std::span<const double> feature);

std::string forest_to_json(const ForestModel& model);
ForestModel forest_from_json(const std::string& text);
void save_forest(const std::filesystem::path& path, const ForestModel& model);
ForestModel load_forest(const std::filesystem::path& path);

}  // namespace parcelsense
