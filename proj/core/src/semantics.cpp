#include "parcelsense/semantics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <unordered_map>

#include "parcelsense/csv.hpp"
#include "parcelsense/errors.hpp"

namespace parcelsense {

std::size_t WordFrequencyTable::row_total(std::size_t row) const {
  return std::accumulate(counts[row].begin(), counts[row].end(), std::size_t{0});
}

WordFrequencyTable count_words(const std::vector<std::string>& vocabulary,
                               const std::map<ParcelId, std::vector<std::string>>& words) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) index.emplace(vocabulary[i], i);
  std::map<ParcelId, std::vector<std::size_t>> ids;
  for (const auto& [parcel, list] : words) {
    auto& out = ids[parcel];
    out.reserve(list.size());
    for (const auto& w : list) {
      auto it = index.find(w);
      if (it == index.end()) {
        throw DataError("word '" + w + "' in parcel " + std::to_string(parcel) + " is not in the vocabulary");
      }
      out.push_back(it->second);
    }
  }
  return count_word_ids(vocabulary, ids);
}

WordFrequencyTable count_word_ids(const std::vector<std::string>& vocabulary,
                                  const std::map<ParcelId, std::vector<std::size_t>>& word_ids) {
  WordFrequencyTable table;
  table.vocabulary = vocabulary;
  for (const auto& [parcel, list] : word_ids) {
    std::vector<std::size_t> row(vocabulary.size(), 0);
    for (std::size_t w : list) {
      if (w >= vocabulary.size()) throw DataError("word index out of vocabulary range");
      ++row[w];
    }
    table.parcel_ids.push_back(parcel);
    table.counts.push_back(std::move(row));
  }
  return table;
}

std::vector<double> term_frequency(std::span<const std::size_t> counts) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) throw EmptyParcelError("term frequency of a parcel with no words");
  std::vector<double> tf(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    tf[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return tf;
}

CorpusStats corpus_stats(const WordFrequencyTable& table) {
  CorpusStats stats;
  stats.document_frequency.assign(table.vocabulary.size(), 0);
  for (const auto& row : table.counts) {
    if (std::accumulate(row.begin(), row.end(), std::size_t{0}) == 0) continue;
    ++stats.document_count;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] > 0) ++stats.document_frequency[i];
    }
  }
  return stats;
}

std::vector<double> inverse_document_frequency(const CorpusStats& stats) {
  std::vector<double> idf(stats.document_frequency.size());
  const double docs = static_cast<double>(stats.document_count);
  for (std::size_t i = 0; i < idf.size(); ++i) {
    idf[i] = std::log(docs / (static_cast<double>(stats.document_frequency[i]) + 1.0));
  }
  return idf;
}

std::vector<double> tfidf_row(std::span<const std::size_t> counts, std::span<const double> idf) {
  if (counts.size() != idf.size()) throw ConfigError("count row and idf vector differ in length");
  std::vector<double> out = term_frequency(counts);
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Explicit zero keeps the "count 0 -> feature 0" rule exact (no -0.0).
    out[i] = counts[i] == 0 ? 0.0 : out[i] * idf[i];
  }
  return out;
}

std::vector<SemanticFeatureVector> tfidf_features(const WordFrequencyTable& table,
                                                  const CorpusStats& stats) {
  if (stats.document_frequency.size() != table.vocabulary.size()) {
    throw ConfigError("corpus stats were computed over a different vocabulary");
  }
  const auto idf = inverse_document_frequency(stats);
  std::vector<SemanticFeatureVector> out;
  out.reserve(table.counts.size());
  for (std::size_t r = 0; r < table.counts.size(); ++r) {
    SemanticFeatureVector v;
    v.parcel_id = table.parcel_ids[r];
    try {
      v.values = tfidf_row(table.counts[r], idf);
    } catch (const EmptyParcelError&) {
      v.values.assign(table.vocabulary.size(), 0.0);
      v.empty = true;
    }
    out.push_back(std::move(v));
  }
  return out;
}

namespace {

void write_header(std::ostream& out, const std::vector<std::string>& vocabulary) {
  out << "parcel_id";
  for (const auto& w : vocabulary) out << ',' << w;
  out << '\n';
}

std::vector<std::string> read_vocabulary(const csv::Table& table, const std::filesystem::path& path) {
  if (table.header.empty() || table.header[0] != "parcel_id") {
    throw DataError("'" + path.string() + "': first column must be parcel_id");
  }
  return {table.header.begin() + 1, table.header.end()};
}

}  // namespace

void write_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& vocabulary,
                       std::span<const SemanticFeatureVector> features) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_header(out, vocabulary);
  out << std::setprecision(17);
  for (const auto& f : features) {
    out << f.parcel_id;
    for (double v : f.values) out << ',' << v;
    out << '\n';
  }
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  FeatureMatrix m;
  m.vocabulary = read_vocabulary(table, path);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    SemanticFeatureVector v;
    v.parcel_id = csv::parse_integer<ParcelId>(table.rows[r][0], path, r + 2);
    bool all_zero = true;
    for (std::size_t c = 1; c < table.rows[r].size(); ++c) {
      v.values.push_back(csv::parse_double(table.rows[r][c], path, r + 2));
      all_zero = all_zero && v.values.back() == 0.0;
    }
    v.empty = all_zero;
    m.rows.push_back(std::move(v));
  }
  return m;
}

void write_count_csv(const std::filesystem::path& path, const WordFrequencyTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_header(out, table.vocabulary);
  for (std::size_t r = 0; r < table.counts.size(); ++r) {
    out << table.parcel_ids[r];
    for (std::size_t c : table.counts[r]) out << ',' << c;
    out << '\n';
  }
}

WordFrequencyTable read_count_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  WordFrequencyTable t;
  t.vocabulary = read_vocabulary(table, path);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    t.parcel_ids.push_back(csv::parse_integer<ParcelId>(table.rows[r][0], path, r + 2));
    std::vector<std::size_t> row;
    for (std::size_t c = 1; c < table.rows[r].size(); ++c) {
      row.push_back(csv::parse_integer<std::size_t>(table.rows[r][c], path, r + 2));
    }
    t.counts.push_back(std::move(row));
  }
  return t;
}

}  // namespace parcelsense
