#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parcelsense/forest.hpp"
#include "parcelsense/geodata.hpp"
#include "parcelsense/labeler.hpp"
#include "parcelsense/metrics.hpp"
#include "parcelsense/sampler.hpp"

namespace parcelsense {

/// Raster, parcel map and labelled parcel records of one study area.
struct SceneData {
  RasterGrid raster;
  ParcelMap parcels;
  ParcelIndex index;
};

/// raster.png, parcels.png and labels.csv from `dir`.
SceneData load_scene(const std::filesystem::path& dir);

/// `word,land_use` CSV; an empty land_use marks a word that never votes.
using WordClassMap = std::map<std::string, std::optional<LandUseLabel>>;
WordClassMap load_word_map(const std::filesystem::path& path);
void save_word_map(const std::filesystem::path& path, const WordClassMap& map);

/// Class per vocabulary entry; words missing from `map` are unmapped.
std::vector<std::optional<LandUseLabel>> word_classes_for(const std::vector<std::string>& vocabulary,
                                                          const WordClassMap& map);

enum class Method { RECT, RAND, PROPOSED };
inline constexpr std::array<Method, 3> kAllMethods = {Method::RECT, Method::RAND, Method::PROPOSED};
std::string to_string(Method method);
std::optional<Method> parse_method(std::string_view text);

struct PipelineConfig {
  SamplerConfig sampler;
  ForestConfig forest;
  /// Share of labelled parcels used for training; the rest is the test set.
  double train_fraction = 0.6;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
};

struct MethodOutcome {
  Method method = Method::PROPOSED;
  ConfusionMatrix matrix;
  AccuracyReport report;
  std::vector<ParcelId> test_ids;
  std::vector<LandUseLabel> predictions;
  /// Test parcels predicted with the fallback class (no usable words).
  std::vector<ParcelId> fallback_ids;
};

struct RepetitionResult {
  std::vector<MethodOutcome> outcomes;  // in the requested method order
  /// Labelled parcels that produced no valid sample in this repetition.
  std::vector<ParcelId> empty_parcels;
  std::optional<double> oob_error;
};

/// Seed of repetition `r` under master seed `seed`.
inline std::uint64_t repetition_seed(std::uint64_t seed, std::size_t r) { return derive_seed(seed, r); }

/// One repetition with the given seed: a fresh train/test split, fresh
/// samples, and every method in `methods` evaluated on the same test parcels.
/// RAND and PROPOSED read the same labelled samples.
RepetitionResult run_repetition(const SceneData& scene, const PatchLabeler& labeler,
                                std::span<const std::optional<LandUseLabel>> word_classes,
                                const PipelineConfig& config, std::uint64_t rep_seed,
                                std::span<const Method> methods, unsigned threads);

/// A single method on repetition 0 of `config.seed`.
MethodOutcome run_pipeline(const SceneData& scene, const PatchLabeler& labeler,
                           std::span<const std::optional<LandUseLabel>> word_classes,
                           const PipelineConfig& config, Method method);

struct MethodSummary {
  Method method = Method::PROPOSED;
  std::vector<double> oa;     // per repetition
  std::vector<double> kappa;  // per repetition
  double mean_oa = 0.0;
  double mean_kappa = 0.0;
  double min_oa = 0.0;
  double max_oa = 0.0;
  /// Confusion matrices summed over repetitions.
  ConfusionMatrix pooled;
  std::size_t fallback_count = 0;
};

struct CompareResult {
  std::size_t repetitions = 0;
  std::vector<MethodSummary> methods;
  /// Parcels without a valid sample, summed over repetitions.
  std::size_t empty_parcels = 0;
};

/// `repetitions` runs with seeds repetition_seed(config.seed, r), executed in
/// parallel on config.threads workers and merged in repetition order.
CompareResult compare_methods(const SceneData& scene, const PatchLabeler& labeler,
                              std::span<const std::optional<LandUseLabel>> word_classes,
                              const PipelineConfig& config, std::size_t repetitions,
                              std::span<const Method> methods = kAllMethods);

struct SweepPoint {
  int w_min = 0;
  double mean_oa = 0.0;
  double mean_kappa = 0.0;
  double mean_empty = 0.0;
};

/// PROPOSED for each w_min with everything else fixed, including the
/// repetition seeds.
std::vector<SweepPoint> wmin_sweep(const SceneData& scene, const PatchLabeler& labeler,
                                   std::span<const std::optional<LandUseLabel>> word_classes,
                                   const PipelineConfig& config, std::span<const int> w_values,
                                   std::size_t repetitions);

std::vector<int> default_sweep_widths();

std::string format_compare_table(const CompareResult& result);
std::string compare_to_json(const CompareResult& result);
/// `w,oa,kappa`
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepPoint> points);
std::string sweep_to_csv(std::span<const SweepPoint> points);

}  // namespace parcelsense
