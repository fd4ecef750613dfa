#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parcelsense/geodata.hpp"

namespace parcelsense {

/// Rows are reference (truth) classes, columns are predictions.
struct ConfusionMatrix {
  std::vector<LandUseLabel> classes;
  std::vector<std::vector<std::size_t>> counts;

  explicit ConfusionMatrix(std::vector<LandUseLabel> classes = {kAllLandUse.begin(), kAllLandUse.end()});

  std::size_t total() const;
  std::size_t row_sum(std::size_t r) const;
  std::size_t column_sum(std::size_t c) const;
  /// Index of `label` in `classes`; DataError when absent.
  std::size_t index(LandUseLabel label) const;
  void add(LandUseLabel truth, LandUseLabel prediction, std::size_t n = 1);
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

/// DataError on length mismatch or a label outside `classes`.
ConfusionMatrix confusion_matrix(std::span<const LandUseLabel> truth, std::span<const LandUseLabel> prediction,
                                 std::vector<LandUseLabel> classes = {kAllLandUse.begin(), kAllLandUse.end()});

/// Per-class figures; nullopt where the denominator is zero.
struct ClassAccuracy {
  LandUseLabel label = LandUseLabel::M;
  std::size_t reference = 0;   // row sum
  std::size_t predicted = 0;   // column sum
  std::optional<double> pa;
  std::optional<double> ua;
  std::optional<double> omission;
  std::optional<double> commission;
};

struct AccuracyReport {
  std::size_t total = 0;
  double oa = 0.0;
  double expected_agreement = 0.0;  // p_e
  double kappa = 0.0;
  std::vector<ClassAccuracy> per_class;
};

/// Cohen's kappa with p_e from the marginals. When p_e = 1 (a single class in
/// both truth and prediction) kappa is 1 for perfect agreement, else 0.
/// ConfigError on an empty matrix.
AccuracyReport accuracy_report(const ConfusionMatrix& cm);

/// Majority word among words with a land-use mapping, mapped to its class.
/// Ties go to the earliest word in vocabulary order. Returns nullopt when no
/// mapped word has a positive count.
std::optional<LandUseLabel> rand_vote(std::span<const std::size_t> word_counts,
                                      std::span<const std::optional<LandUseLabel>> word_classes);

std::string report_to_json(const ConfusionMatrix& cm, const AccuracyReport& report, int indent = 2);

/// OA and kappa followed by one row per class: commission, omission, PA, UA.
std::string format_report_table(const AccuracyReport& report);

}  // namespace parcelsense
