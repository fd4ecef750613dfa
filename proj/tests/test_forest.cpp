#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "parcelsense/errors.hpp"
#include "parcelsense/forest.hpp"
#include "temp_dir.hpp"

using namespace parcelsense;

namespace {

struct Data {
  std::vector<std::vector<double>> x;
  std::vector<LandUseLabel> y;
};

Data blobs(std::size_t n, std::size_t features, double gap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    const bool second = i % 2 == 1;
    std::vector<double> row(features);
    for (auto& v : row) v = n01(rng);
    row[0] += second ? gap : 0.0;
    d.x.push_back(row);
    d.y.push_back(second ? LandUseLabel::R : LandUseLabel::G);
  }
  return d;
}

}  // namespace

TEST_CASE("bootstrap sample shape") {
  Rng rng(1);
  const auto one = bootstrap_sample(1, rng);
  CHECK(one.in_bag == std::vector<std::size_t>{0});
  CHECK(one.out_of_bag.empty());
  for (std::size_t n : {2U, 17U, 300U}) {
    const auto bs = bootstrap_sample(n, rng);
    CHECK(bs.in_bag.size() == n);
    const std::set<std::size_t> drawn(bs.in_bag.begin(), bs.in_bag.end());
    for (std::size_t i : bs.out_of_bag) CHECK(drawn.count(i) == 0);
    CHECK(drawn.size() + bs.out_of_bag.size() == n);
    CHECK(std::is_sorted(bs.out_of_bag.begin(), bs.out_of_bag.end()));
  }
}

TEST_CASE("out-of-bag fraction approaches e^-1") {
  Rng rng(2);
  double total = 0.0;
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) total += static_cast<double>(bootstrap_sample(1000, rng).out_of_bag.size()) / 1000.0;
  CHECK(std::abs(total / reps - std::pow(1.0 - 1.0 / 1000.0, 1000.0)) < 0.01);
  CHECK(std::abs(total / reps - std::exp(-1.0)) < 0.01);
}

TEST_CASE("grow_tree examples") {
  ForestConfig cfg;
  Rng rng(3);
  std::vector<std::vector<double>> x{{0.0}, {1.0}};
  std::vector<int> y{0, 1};
  const TrainingSet data{x, y, 2};
  const std::vector<std::size_t> both{0, 1};
  const DecisionTree t = grow_tree(data, both, cfg, rng);
  REQUIRE(t.nodes.size() == 3);
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.nodes[0].threshold == 0.5);
  CHECK(t.predict(std::vector<double>{0.0}) == 0);
  CHECK(t.predict(std::vector<double>{1.0}) == 1);

  std::vector<int> same{1, 1};
  const DecisionTree leaf = grow_tree(TrainingSet{x, same, 2}, both, cfg, rng);
  CHECK(leaf.nodes.size() == 1);
  CHECK(leaf.nodes[0].label == 1);
}

TEST_CASE("unpruned tree fits its in-bag set") {
  const Data d = blobs(200, 5, 0.5, 4);
  std::vector<int> y;
  for (auto l : d.y) y.push_back(l == LandUseLabel::R ? 1 : 0);
  ForestConfig cfg;
  Rng rng(5);
  const auto bs = bootstrap_sample(d.x.size(), rng);
  const DecisionTree t = grow_tree(TrainingSet{d.x, y, 2}, bs.in_bag, cfg, rng);
  for (std::size_t i : bs.in_bag) CHECK(t.predict(d.x[i]) == y[i]);
}

TEST_CASE("forest determinism and thread independence") {
  const Data d = blobs(120, 6, 1.5, 6);
  ForestConfig cfg;
  cfg.n_trees = 30;
  cfg.seed = 99;
  const std::string a = forest_to_json(train_forest(d.x, d.y, cfg));
  CHECK(forest_to_json(train_forest(d.x, d.y, cfg)) == a);
  cfg.threads = 4;
  CHECK(forest_to_json(train_forest(d.x, d.y, cfg)) == a);
  cfg.seed = 100;
  CHECK(forest_to_json(train_forest(d.x, d.y, cfg)) != a);
}

TEST_CASE("separable data and the shuffled-label null") {
  const Data d = blobs(200, 4, 8.0, 7);
  ForestConfig cfg;
  cfg.seed = 1;
  CHECK(train_forest(d.x, d.y, cfg).oob_error <= 0.05);

  Data shuffled = blobs(400, 4, 0.0, 8);
  std::mt19937_64 rng(9);
  std::shuffle(shuffled.y.begin(), shuffled.y.end(), rng);
  const double e = train_forest(shuffled.x, shuffled.y, cfg).oob_error;
  CHECK(e >= 0.4);
  CHECK(e <= 0.6);
}

TEST_CASE("oob error equals a naive recomputation") {
  for (std::uint64_t seed : {1U, 2U, 3U, 4U, 5U}) {
    const Data d = blobs(40, 3, 1.0, seed);
    ForestConfig cfg;
    cfg.n_trees = 25;
    cfg.seed = seed * 31;
    const ForestModel m = train_forest(d.x, d.y, cfg);
    std::vector<std::array<int, 2>> votes(d.x.size(), {0, 0});
    for (std::size_t t = 0; t < m.trees.size(); ++t) {
      Rng rng(tree_seed(cfg.seed, t));
      const auto bs = bootstrap_sample(d.x.size(), rng);
      std::vector<bool> in(d.x.size(), false);
      for (auto i : bs.in_bag) in[i] = true;
      for (std::size_t r = 0; r < d.x.size(); ++r) {
        if (!in[r]) ++votes[r][static_cast<std::size_t>(m.trees[t].predict(d.x[r]))];
      }
    }
    int wrong = 0, seen = 0;
    for (std::size_t r = 0; r < d.x.size(); ++r) {
      if (votes[r][0] + votes[r][1] == 0) continue;
      ++seen;
      const LandUseLabel winner = m.classes[votes[r][1] > votes[r][0] ? 1 : 0];
      wrong += winner != d.y[r];
    }
    CHECK(m.oob_evaluated == static_cast<std::size_t>(seen));
    CHECK(m.oob_error == static_cast<double>(wrong) / seen);
  }
}

TEST_CASE("predict tie-break follows the class order") {
  ForestModel m;
  m.classes = {LandUseLabel::I, LandUseLabel::C};
  m.feature_count = 1;
  DecisionTree a, b;
  a.nodes = {{-1, 0.0, -1, -1, 0}};
  b.nodes = {{-1, 0.0, -1, -1, 1}};
  m.trees = {b, a, b, a};
  CHECK(predict(m, std::vector<double>{0.0}) == LandUseLabel::I);
  m.trees = {b};
  CHECK(predict(m, std::vector<double>{0.0}) == LandUseLabel::C);
  m.trees = {b, b, a};
  CHECK(predict(m, std::vector<double>{0.0}) == LandUseLabel::C);
  CHECK_THROWS_AS(predict(m, std::vector<double>{0.0, 1.0}), ConfigError);
}

TEST_CASE("feature scaling keeps the split feature sequence") {
  const Data d = blobs(80, 4, 1.0, 12);
  Data scaled = d;
  for (auto& row : scaled.x) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] *= static_cast<double>(j + 2) * 3.5;
  }
  ForestConfig cfg;
  cfg.n_trees = 10;
  cfg.seed = 5;
  const auto a = train_forest(d.x, d.y, cfg);
  const auto b = train_forest(scaled.x, scaled.y, cfg);
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
    for (std::size_t k = 0; k < a.trees[t].nodes.size(); ++k) {
      CHECK(a.trees[t].nodes[k].feature == b.trees[t].nodes[k].feature);
      CHECK(a.trees[t].nodes[k].label == b.trees[t].nodes[k].label);
    }
  }
}

TEST_CASE("train_forest argument errors") {
  const Data d = blobs(10, 2, 1.0, 1);
  ForestConfig cfg;
  std::vector<LandUseLabel> one(d.x.size(), LandUseLabel::M);
  CHECK_THROWS_AS(train_forest(d.x, one, cfg), ConfigError);
  CHECK_THROWS_AS(train_forest(d.x, std::span(d.y).first(5), cfg), ConfigError);
  cfg.features_per_split = 3;
  CHECK_THROWS_AS(train_forest(d.x, d.y, cfg), ConfigError);
}

TEST_CASE("holdout error tracks oob error") {
  const Data d = blobs(600, 5, 1.2, 21);
  ForestConfig cfg;
  cfg.seed = 3;
  cfg.holdout_fraction = 0.2;
  const ForestModel m = train_forest(d.x, d.y, cfg);
  REQUIRE(m.holdout_error);
  CHECK(std::abs(*m.holdout_error - m.oob_error) <= 0.05);
}

TEST_CASE("forest JSON round trip") {
  TempDir dir("forest");
  const Data d = blobs(60, 3, 2.0, 2);
  ForestConfig cfg;
  cfg.n_trees = 7;
  cfg.holdout_fraction = 0.2;
  const ForestModel m = train_forest(d.x, d.y, cfg);
  save_forest(dir / "f.json", m);
  const ForestModel back = load_forest(dir / "f.json");
  CHECK(forest_to_json(back) == forest_to_json(m));
  for (const auto& row : d.x) CHECK(predict(back, row) == predict(m, row));
  CHECK_THROWS_AS(forest_from_json("{}"), DataError);
  CHECK_THROWS_AS(forest_from_json("[nonsense"), DataError);
}
