#include "parcelsense/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "parcelsense/errors.hpp"
#include "parcelsense/parallel.hpp"

namespace parcelsense {

using nlohmann::json;

int ForestConfig::resolved_features_per_split(std::size_t feature_count) const {
  if (features_per_split > 0) return features_per_split;
  return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(feature_count)))));
}

int DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const Node& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].label;
}

std::size_t DecisionTree::depth() const {
  std::size_t deepest = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes[i].feature >= 0) {
      stack.emplace_back(nodes[i].left, d + 1);
      stack.emplace_back(nodes[i].right, d + 1);
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.feature < 0; }));
}

BootstrapSample bootstrap_sample(std::size_t n, Rng& rng) {
  BootstrapSample s;
  if (n == 0) return s;
  s.in_bag.resize(n);
  std::vector<bool> drawn(n, false);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    s.in_bag[i] = pick(rng);
    drawn[s.in_bag[i]] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!drawn[i]) s.out_of_bag.push_back(i);
  }
  return s;
}

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // n * weighted Gini; lower is better
};

int majority(std::span<const std::size_t> counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

// Best threshold on one feature, or nothing when every candidate leaves a
// child below min_leaf or the feature is constant on this node.
void scan_feature(const TrainingSet& data, std::span<const std::size_t> rows, int feature,
                  int min_leaf, std::vector<std::pair<double, int>>& sorted, SplitChoice& best) {
  sorted.clear();
  for (std::size_t r : rows) {
    sorted.emplace_back(data.features[r][static_cast<std::size_t>(feature)], data.labels[r]);
  }
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front().first == sorted.back().first) return;

  const std::size_t k = static_cast<std::size_t>(data.class_count);
  std::vector<double> left(k, 0.0);
  std::vector<double> right(k, 0.0);
  for (const auto& [v, c] : sorted) right[static_cast<std::size_t>(c)] += 1.0;
  double sq_left = 0.0;
  double sq_right = 0.0;
  for (double c : right) sq_right += c * c;

  const std::size_t n = sorted.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto c = static_cast<std::size_t>(sorted[i].second);
    sq_left += 2.0 * left[c] + 1.0;
    left[c] += 1.0;
    sq_right -= 2.0 * right[c] - 1.0;
    right[c] -= 1.0;
    if (sorted[i].first == sorted[i + 1].first) continue;
    const double n_left = static_cast<double>(i + 1);
    const double n_right = static_cast<double>(n - i - 1);
    if (n_left < min_leaf || n_right < min_leaf) continue;
    const double score = (n_left - sq_left / n_left) + (n_right - sq_right / n_right);
    if (best.feature < 0 || score < best.score) {
      const double a = sorted[i].first;
      const double b = sorted[i + 1].first;
      double mid = a + (b - a) / 2.0;
      if (!(mid < b)) mid = a;
      best = {feature, mid, score};
    }
  }
}

}  // namespace

DecisionTree grow_tree(const TrainingSet& data, std::span<const std::size_t> in_bag,
                       const ForestConfig& config, Rng& rng) {
  if (in_bag.empty()) throw ConfigError("cannot grow a tree on zero samples");
  const std::size_t f_count = data.features[in_bag.front()].size();
  const int mtry = config.resolved_features_per_split(f_count);
  const int min_leaf = std::max(1, config.min_samples_leaf);
  const std::size_t k = static_cast<std::size_t>(data.class_count);

  DecisionTree tree;
  tree.nodes.emplace_back();
  struct Pending {
    int node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  stack.push_back({0, std::vector<std::size_t>(in_bag.begin(), in_bag.end())});
  std::vector<int> order(f_count);
  std::vector<std::pair<double, int>> scratch;
  std::vector<std::size_t> counts(k);

  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();

    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t r : job.rows) ++counts[static_cast<std::size_t>(data.labels[r])];
    const int label = majority(counts);
    tree.nodes[static_cast<std::size_t>(job.node)].label = label;
    const bool pure = counts[static_cast<std::size_t>(label)] == job.rows.size();
    if (pure || job.rows.size() < 2 * static_cast<std::size_t>(min_leaf)) continue;

    // Partial Fisher-Yates: the first mtry draws are always evaluated; more
    // are drawn only while no valid split has been found.
    std::iota(order.begin(), order.end(), 0);
    SplitChoice best;
    for (std::size_t j = 0; j < f_count; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, f_count - 1);
      std::swap(order[j], order[pick(rng)]);
      scan_feature(data, job.rows, order[j], min_leaf, scratch, best);
      if (j + 1 >= static_cast<std::size_t>(mtry) && best.feature >= 0) break;
    }
    if (best.feature < 0) continue;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : job.rows) {
      (data.features[r][static_cast<std::size_t>(best.feature)] <= best.threshold ? left_rows : right_rows)
          .push_back(r);
    }
    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[static_cast<std::size_t>(job.node)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = left + 1;
    // Right first so the left subtree is expanded next (depth-first, left to right).
    stack.push_back({left + 1, std::move(right_rows)});
    stack.push_back({left, std::move(left_rows)});
  }
  return tree;
}

std::vector<int> vote(const ForestModel& model, std::span<const double> feature) {
  if (feature.size() != model.feature_count) {
    throw ConfigError("feature vector has length " + std::to_string(feature.size()) + ", forest expects " +
                      std::to_string(model.feature_count));
  }
  std::vector<int> votes(model.classes.size(), 0);
  for (const auto& t : model.trees) ++votes[static_cast<std::size_t>(t.predict(feature))];
  return votes;
}

LandUseLabel predict(const ForestModel& model, std::span<const double> feature) {
  const auto votes = vote(model, feature);
  return model.classes[static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin())];
}

namespace {

struct Forest {
  std::vector<DecisionTree> trees;
  std::vector<std::vector<std::size_t>> oob;
};

Forest grow_forest(const TrainingSet& data, std::size_t n, const ForestConfig& config) {
  Forest f;
  f.trees.resize(static_cast<std::size_t>(config.n_trees));
  f.oob.resize(static_cast<std::size_t>(config.n_trees));
  std::vector<std::size_t> rows(n);
  parallel_for(f.trees.size(), config.threads, [&](std::size_t t) {
    Rng rng(tree_seed(config.seed, t));
    BootstrapSample bs = bootstrap_sample(n, rng);
    f.trees[t] = grow_tree(data, bs.in_bag, config, rng);
    f.oob[t] = std::move(bs.out_of_bag);
  });
  return f;
}

}  // namespace

ForestModel train_forest(std::span<const std::vector<double>> features,
                         std::span<const LandUseLabel> labels, const ForestConfig& config) {
  if (features.size() != labels.size()) throw ConfigError("feature and label counts differ");
  if (features.empty()) throw ConfigError("no training data");
  if (config.n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (config.holdout_fraction < 0.0 || config.holdout_fraction >= 1.0) {
    throw ConfigError("holdout_fraction must lie in [0, 1)");
  }
  const std::size_t f_count = features.front().size();
  if (f_count == 0) throw ConfigError("feature vectors are empty");
  for (const auto& row : features) {
    if (row.size() != f_count) throw ConfigError("inconsistent feature lengths");
  }
  const int mtry = config.resolved_features_per_split(f_count);
  if (mtry < 1 || static_cast<std::size_t>(mtry) > f_count) {
    throw ConfigError("features_per_split must lie in [1, feature count]");
  }

  ForestModel model;
  model.config = config;
  model.feature_count = f_count;
  std::array<std::size_t, kLandUseCount> label_counts{};
  for (LandUseLabel l : labels) ++label_counts[index_of(l)];
  std::array<int, kLandUseCount> class_index{};
  for (LandUseLabel l : kAllLandUse) {
    if (label_counts[index_of(l)] > 0) {
      class_index[index_of(l)] = static_cast<int>(model.classes.size());
      model.classes.push_back(l);
    }
  }
  if (model.classes.size() < 2) throw ConfigError("training data contains a single class");
  model.fallback = kAllLandUse[static_cast<std::size_t>(
      std::max_element(label_counts.begin(), label_counts.end()) - label_counts.begin())];

  // Optional held-out part, drawn from its own stream.
  std::vector<std::size_t> train_rows(features.size());
  std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
  std::vector<std::size_t> holdout_rows;
  if (config.holdout_fraction > 0.0) {
    Rng rng(derive_seed(config.seed, 0x484F4C44ULL));
    std::shuffle(train_rows.begin(), train_rows.end(), rng);
    const auto held = static_cast<std::size_t>(
        std::floor(config.holdout_fraction * static_cast<double>(features.size()) + 1e-9));
    holdout_rows.assign(train_rows.begin(), train_rows.begin() + static_cast<std::ptrdiff_t>(held));
    train_rows.erase(train_rows.begin(), train_rows.begin() + static_cast<std::ptrdiff_t>(held));
    std::sort(train_rows.begin(), train_rows.end());
    if (train_rows.empty()) throw ConfigError("holdout leaves no training rows");
  }

  std::vector<std::vector<double>> x;
  std::vector<int> y;
  x.reserve(train_rows.size());
  for (std::size_t r : train_rows) {
    x.push_back(features[r]);
    y.push_back(class_index[index_of(labels[r])]);
  }
  const TrainingSet data{x, y, static_cast<int>(model.classes.size())};
  Forest forest = grow_forest(data, x.size(), config);
  model.trees = std::move(forest.trees);

  // Out-of-bag majority vote, trees visited in index order.
  std::vector<std::vector<int>> oob_votes(x.size(), std::vector<int>(model.classes.size(), 0));
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    for (std::size_t r : forest.oob[t]) ++oob_votes[r][static_cast<std::size_t>(model.trees[t].predict(x[r]))];
  }
  std::size_t wrong = 0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    const auto& v = oob_votes[r];
    if (std::all_of(v.begin(), v.end(), [](int c) { return c == 0; })) continue;
    ++model.oob_evaluated;
    const int winner = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    if (winner != y[r]) ++wrong;
  }
  model.oob_error = model.oob_evaluated == 0
                        ? 0.0
                        : static_cast<double>(wrong) / static_cast<double>(model.oob_evaluated);

  if (!holdout_rows.empty()) {
    std::size_t miss = 0;
    for (std::size_t r : holdout_rows) miss += predict(model, features[r]) != labels[r] ? 1 : 0;
    model.holdout_error = static_cast<double>(miss) / static_cast<double>(holdout_rows.size());
  }
  return model;
}

std::string forest_to_json(const ForestModel& model) {
  json trees = json::array();
  for (const auto& t : model.trees) {
    json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
         label = json::array();
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      label.push_back(n.label);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right},
                     {"label", label}});
  }
  json classes = json::array();
  for (LandUseLabel l : model.classes) classes.push_back(to_string(l));
  json doc = {{"format", "parcelsense-forest"},
              {"config",
               {{"n_trees", model.config.n_trees},
                {"features_per_split", model.config.features_per_split},
                {"min_samples_leaf", model.config.min_samples_leaf},
                {"seed", model.config.seed},
                {"holdout_fraction", model.config.holdout_fraction}}},
              {"classes", classes},
              {"feature_count", model.feature_count},
              {"oob_error", model.oob_error},
              {"oob_evaluated", model.oob_evaluated},
              {"holdout_error", model.holdout_error ? json(*model.holdout_error) : json(nullptr)},
              {"fallback", to_string(model.fallback)},
              {"trees", trees}};
  return doc.dump();
}

ForestModel forest_from_json(const std::string& text) {
  auto label_of = [](const std::string& code) {
    auto l = parse_land_use(code);
    if (!l) throw DataError("unknown land-use code '" + code + "' in forest model");
    return *l;
  };
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "parcelsense-forest") throw DataError("not a forest model file");
    ForestModel m;
    const auto& c = doc.at("config");
    m.config.n_trees = c.at("n_trees").get<int>();
    m.config.features_per_split = c.at("features_per_split").get<int>();
    m.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.holdout_fraction = c.at("holdout_fraction").get<double>();
    for (const auto& code : doc.at("classes")) m.classes.push_back(label_of(code.get<std::string>()));
    m.feature_count = doc.at("feature_count").get<std::size_t>();
    m.oob_error = doc.at("oob_error").get<double>();
    m.oob_evaluated = doc.at("oob_evaluated").get<std::size_t>();
    if (!doc.at("holdout_error").is_null()) m.holdout_error = doc.at("holdout_error").get<double>();
    m.fallback = label_of(doc.at("fallback").get<std::string>());
    for (const auto& jt : doc.at("trees")) {
      DecisionTree t;
      const auto feature = jt.at("feature").get<std::vector<int>>();
      const auto threshold = jt.at("threshold").get<std::vector<double>>();
      const auto left = jt.at("left").get<std::vector<int>>();
      const auto right = jt.at("right").get<std::vector<int>>();
      const auto label = jt.at("label").get<std::vector<int>>();
      const std::size_t n = feature.size();
      if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || label.size() != n) {
        throw DataError("inconsistent tree node arrays");
      }
      for (std::size_t i = 0; i < n; ++i) {
        DecisionTree::Node node{feature[i], threshold[i], left[i], right[i], label[i]};
        const bool leaf = node.feature < 0;
        if (!leaf && (static_cast<std::size_t>(node.feature) >= m.feature_count || node.left <= static_cast<int>(i) ||
                      node.right <= static_cast<int>(i) || node.left >= static_cast<int>(n) ||
                      node.right >= static_cast<int>(n))) {
          throw DataError("invalid tree node");
        }
        if (node.label < 0 || static_cast<std::size_t>(node.label) >= m.classes.size()) {
          throw DataError("tree label index out of range");
        }
        t.nodes.push_back(node);
      }
      m.trees.push_back(std::move(t));
    }
    if (m.trees.empty()) throw DataError("forest has no trees");
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed forest JSON: ") + e.what());
  }
}

void save_forest(const std::filesystem::path& path, const ForestModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << forest_to_json(model) << '\n';
}

ForestModel load_forest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return forest_from_json(buffer.str());
}

}  // namespace parcelsense
