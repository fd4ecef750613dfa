#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "parcelsense/geodata.hpp"

namespace parcelsense {

/// Thrown when term frequencies are requested for a parcel with no words.
class EmptyParcelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Visual bag-of-words: per-parcel word counts over a fixed vocabulary.
struct WordFrequencyTable {
  std::vector<std::string> vocabulary;
  std::vector<ParcelId> parcel_ids;
  std::vector<std::vector<std::size_t>> counts;  // one row per parcel

  std::size_t row_total(std::size_t row) const;
};

struct CorpusStats {
  std::size_t document_count = 0;
  /// Number of (non-empty) parcels in which each word occurs at least once.
  std::vector<std::size_t> document_frequency;
};

struct SemanticFeatureVector {
  ParcelId parcel_id = 0;
  std::vector<double> values;
  /// True when the parcel had no words; values are then all zero.
  bool empty = false;
};

/// Counts words given as tokens. Throws DataError on an out-of-vocabulary word.
WordFrequencyTable count_words(const std::vector<std::string>& vocabulary,
                               const std::map<ParcelId, std::vector<std::string>>& words);

/// Counts words given as vocabulary indices.
WordFrequencyTable count_word_ids(const std::vector<std::string>& vocabulary,
                                  const std::map<ParcelId, std::vector<std::size_t>>& word_ids);

/// n_i / sum_k n_k. Throws EmptyParcelError for an all-zero row.
std::vector<double> term_frequency(std::span<const std::size_t> counts);

/// Document frequencies with set semantics; empty parcels are not documents.
CorpusStats corpus_stats(const WordFrequencyTable& table);

/// ln(|D| / (df_i + 1)) per word. Negative for words present in every parcel.
std::vector<double> inverse_document_frequency(const CorpusStats& stats);

/// tf x idf for one parcel. Throws EmptyParcelError for an all-zero row.
std::vector<double> tfidf_row(std::span<const std::size_t> counts, std::span<const double> idf);

/// One feature vector per table row. Empty parcels get zero vectors with
/// `empty` set instead of an error.
std::vector<SemanticFeatureVector> tfidf_features(const WordFrequencyTable& table,
                                                  const CorpusStats& stats);

/// CSV: header `parcel_id,<vocabulary...>`, values with 17 significant digits.
void write_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& vocabulary,
                       std::span<const SemanticFeatureVector> features);

struct FeatureMatrix {
  std::vector<std::string> vocabulary;
  std::vector<SemanticFeatureVector> rows;  // `empty` set for all-zero rows
};
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

/// Same layout as the feature CSV with integer counts.
void write_count_csv(const std::filesystem::path& path, const WordFrequencyTable& table);
WordFrequencyTable read_count_csv(const std::filesystem::path& path);

}  // namespace parcelsense
