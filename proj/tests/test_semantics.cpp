#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "parcelsense/errors.hpp"
#include "parcelsense/semantics.hpp"
#include "temp_dir.hpp"

using namespace parcelsense;

namespace {

WordFrequencyTable table_of(const std::vector<std::vector<std::size_t>>& rows) {
  WordFrequencyTable t;
  for (std::size_t i = 0; i < rows.front().size(); ++i) t.vocabulary.push_back("w" + std::to_string(i));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    t.parcel_ids.push_back(static_cast<ParcelId>(r + 1));
    t.counts.push_back(rows[r]);
  }
  return t;
}

}  // namespace

TEST_CASE("count_words examples") {
  const auto t = count_words({"a", "b", "c"}, {{1, {"a", "a", "b"}}, {2, {}}});
  CHECK(t.counts[0] == std::vector<std::size_t>{2, 1, 0});
  CHECK(t.counts[1] == std::vector<std::size_t>{0, 0, 0});
  CHECK(t.row_total(0) == 3);
  CHECK_THROWS_AS(count_words({"a"}, {{1, {"z"}}}), DataError);
}

TEST_CASE("term_frequency examples") {
  CHECK(term_frequency(std::vector<std::size_t>{2, 1, 1}) == std::vector<double>{0.5, 0.25, 0.25});
  std::vector<std::size_t> spike(13, 0);
  spike[0] = 300;
  const auto tf = term_frequency(spike);
  CHECK(tf[0] == 1.0);
  CHECK(std::count(tf.begin(), tf.end(), 0.0) == 12);
  CHECK(term_frequency(std::vector<std::size_t>{1, 1, 1, 1}) == std::vector<double>(4, 0.25));
  CHECK_THROWS_AS(term_frequency(std::vector<std::size_t>{0, 0}), EmptyParcelError);
}

TEST_CASE("inverse_document_frequency examples") {
  CorpusStats s;
  s.document_count = 4;
  s.document_frequency = {1, 4, 0};
  const auto idf = inverse_document_frequency(s);
  CHECK(std::abs(idf[0] - 0.693147180559945) < 1e-12);
  CHECK(idf[1] == doctest::Approx(std::log(4.0 / 5.0)));
  CHECK(idf[1] < 0.0);
  CHECK(idf[2] == doctest::Approx(std::log(4.0)));
}

TEST_CASE("tfidf hand-computed corpus") {
  const auto t = count_words({"a", "b"}, {{1, {"a", "a", "b"}}, {2, {"b", "b"}}});
  const auto stats = corpus_stats(t);
  CHECK(stats.document_count == 2);
  CHECK(stats.document_frequency == std::vector<std::size_t>{1, 2});
  const auto f = tfidf_features(t, stats);
  CHECK(f[0].values[0] == 0.0);
  CHECK(std::abs(f[0].values[1] - (-0.135155)) < 1e-6);
  CHECK(std::abs(f[0].values[1] - std::log(2.0 / 3.0) / 3.0) < 1e-15);
  CHECK(f[1].values[0] == 0.0);

  const auto single = count_words({"a"}, {{5, {"a"}}});
  CHECK(tfidf_features(single, corpus_stats(single))[0].values[0] == doctest::Approx(std::log(0.5)));
}

TEST_CASE("empty parcels get flagged zero vectors and are not documents") {
  const auto t = table_of({{1, 0}, {0, 0}, {2, 3}});
  const auto stats = corpus_stats(t);
  CHECK(stats.document_count == 2);
  const auto f = tfidf_features(t, stats);
  CHECK(f[1].empty);
  CHECK(f[1].values == std::vector<double>{0.0, 0.0});
  CHECK_FALSE(f[0].empty);
  CHECK_THROWS_AS(tfidf_row(t.counts[1], inverse_document_frequency(stats)), EmptyParcelError);
}

TEST_CASE("tfidf properties on random corpora") {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t parcels = 1 + rng() % 8, words = 1 + rng() % 6;
    std::vector<std::vector<std::size_t>> rows(parcels, std::vector<std::size_t>(words));
    for (auto& r : rows) {
      for (auto& c : r) c = rng() % 3 == 0 ? rng() % 6 : 0;
    }
    const auto t = table_of(rows);
    const auto stats = corpus_stats(t);
    const auto idf = inverse_document_frequency(stats);
    const auto f = tfidf_features(t, stats);
    const auto expected = oracle::tfidf(rows);
    for (std::size_t r = 0; r < parcels; ++r) {
      if (t.row_total(r) > 0) {
        const auto tf = term_frequency(t.counts[r]);
        double sum = 0.0;
        for (double v : tf) sum += v;
        CHECK(std::abs(sum - 1.0) < 1e-12);
      }
      for (std::size_t i = 0; i < words; ++i) {
        CHECK(std::abs(f[r].values[i] - expected[r][i]) < 1e-12);
        CHECK(std::isfinite(f[r].values[i]));
        if (rows[r][i] == 0 || idf[i] == 0.0) CHECK(f[r].values[i] == 0.0);
      }
    }
  }
}

TEST_CASE("word order does not change features") {
  std::vector<std::string> stream{"a", "b", "b", "c", "a", "a", "c"};
  const std::vector<std::string> vocab{"a", "b", "c"};
  const auto base = count_words(vocab, {{1, stream}, {2, {"b"}}});
  std::mt19937 rng(2);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(stream.begin(), stream.end(), rng);
    const auto t = count_words(vocab, {{1, stream}, {2, {"b"}}});
    CHECK(tfidf_features(t, corpus_stats(t))[0].values == tfidf_features(base, corpus_stats(base))[0].values);
  }
}

TEST_CASE("feature and count CSV round trip") {
  TempDir dir("sem");
  const auto t = table_of({{3, 0, 1}, {0, 0, 0}, {1, 1, 1}});
  const auto f = tfidf_features(t, corpus_stats(t));
  write_feature_csv(dir / "f.csv", t.vocabulary, f);
  const FeatureMatrix back = read_feature_csv(dir / "f.csv");
  CHECK(back.vocabulary == t.vocabulary);
  REQUIRE(back.rows.size() == 3);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(back.rows[r].parcel_id == f[r].parcel_id);
    CHECK(back.rows[r].values == f[r].values);
  }
  CHECK(back.rows[1].empty);

  write_count_csv(dir / "c.csv", t);
  const auto counts = read_count_csv(dir / "c.csv");
  CHECK(counts.counts == t.counts);
  CHECK(counts.parcel_ids == t.parcel_ids);
}
