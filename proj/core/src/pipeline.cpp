#include "parcelsense/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "parcelsense/csv.hpp"
#include "parcelsense/errors.hpp"
#include "parcelsense/parallel.hpp"
#include "parcelsense/semantics.hpp"

namespace parcelsense {

SceneData load_scene(const std::filesystem::path& dir) {
  SceneData s;
  s.raster = load_raster(dir / "raster.png");
  s.parcels = load_parcel_map(dir / "parcels.png", s.raster);
  const LabelTable labels = load_labels(dir / "labels.csv");
  s.index = build_parcel_records(s.parcels, &labels);
  return s;
}

WordClassMap load_word_map(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  if (t.header.size() != 2 || t.header[0] != "word" || t.header[1] != "land_use") {
    throw DataError("'" + path.string() + "': expected header word,land_use");
  }
  WordClassMap m;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row[0].empty()) throw DataError("'" + path.string() + "' line " + std::to_string(r + 2) + ": empty word");
    std::optional<LandUseLabel> l;
    if (!row[1].empty()) {
      l = parse_land_use(row[1]);
      if (!l) {
        throw DataError("'" + path.string() + "' line " + std::to_string(r + 2) + ": unknown land-use code '" +
                        row[1] + "'");
      }
    }
    if (!m.emplace(row[0], l).second) throw DataError("'" + path.string() + "': duplicate word '" + row[0] + "'");
  }
  return m;
}

void save_word_map(const std::filesystem::path& path, const WordClassMap& map) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "word,land_use\n";
  for (const auto& [w, l] : map) out << w << ',' << (l ? to_string(*l) : "") << '\n';
}

std::vector<std::optional<LandUseLabel>> word_classes_for(const std::vector<std::string>& vocabulary,
                                                          const WordClassMap& map) {
  std::vector<std::optional<LandUseLabel>> out;
  for (const auto& w : vocabulary) {
    auto it = map.find(w);
    out.push_back(it == map.end() ? std::nullopt : it->second);
  }
  return out;
}

std::string to_string(Method method) {
  switch (method) {
    case Method::RECT:
      return "RECT";
    case Method::RAND:
      return "RAND";
    case Method::PROPOSED:
      return "PROPOSED";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view text) {
  for (Method m : kAllMethods) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

void PipelineConfig::validate() const {
  sampler.validate();
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  if (forest.n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (forest.features_per_split < 0) throw ConfigError("features_per_split must be >= 0");
  if (forest.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (forest.holdout_fraction < 0.0 || forest.holdout_fraction >= 1.0) {
    throw ConfigError("holdout_fraction must lie in [0, 1)");
  }
}

namespace {

LandUseLabel most_frequent(std::span<const LandUseLabel> labels) {
  std::array<std::size_t, kLandUseCount> counts{};
  for (LandUseLabel l : labels) ++counts[index_of(l)];
  return kAllLandUse[static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin())];
}

MethodOutcome finish(Method method, std::vector<ParcelId> ids, std::span<const LandUseLabel> truth,
                     std::vector<LandUseLabel> predictions, std::vector<ParcelId> fallback) {
  MethodOutcome o;
  o.method = method;
  o.matrix = confusion_matrix(truth, predictions);
  o.report = accuracy_report(o.matrix);
  o.test_ids = std::move(ids);
  o.predictions = std::move(predictions);
  o.fallback_ids = std::move(fallback);
  return o;
}

}  // namespace

RepetitionResult run_repetition(const SceneData& scene, const PatchLabeler& labeler,
                                std::span<const std::optional<LandUseLabel>> word_classes,
                                const PipelineConfig& config, std::uint64_t rep_seed,
                                std::span<const Method> methods, unsigned threads) {
  config.validate();
  const auto& vocab = labeler.vocabulary();
  if (word_classes.size() != vocab.size()) throw ConfigError("word map does not match the labeler vocabulary");

  std::vector<const ParcelRecord*> labelled;
  for (const auto& r : scene.index.records) {
    if (r.label) labelled.push_back(&r);
  }
  if (labelled.size() < 2) throw DataError("scene needs at least two labelled parcels");

  Rng split_rng = make_rng(rep_seed, 1);
  std::vector<std::size_t> order(labelled.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), split_rng);
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::floor(config.train_fraction * static_cast<double>(labelled.size()) + 1e-9)), 1,
      labelled.size() - 1);
  std::vector<bool> is_train(labelled.size(), false);
  for (std::size_t k = 0; k < n_train; ++k) is_train[order[k]] = true;

  std::vector<std::size_t> train_idx, test_idx;
  std::vector<LandUseLabel> train_labels, test_labels;
  std::vector<ParcelId> test_ids;
  for (std::size_t i = 0; i < labelled.size(); ++i) {
    if (is_train[i]) {
      train_idx.push_back(i);
      train_labels.push_back(*labelled[i]->label);
    } else {
      test_idx.push_back(i);
      test_labels.push_back(*labelled[i]->label);
      test_ids.push_back(labelled[i]->id);
    }
  }
  const LandUseLabel fallback = most_frequent(train_labels);

  const bool need_words = std::any_of(methods.begin(), methods.end(), [](Method m) { return m != Method::RECT; });
  std::vector<std::vector<std::size_t>> counts(labelled.size());
  RepetitionResult result;
  if (need_words) {
    SamplerConfig sampler = config.sampler;
    sampler.seed = derive_seed(rep_seed, 2);
    parallel_for(labelled.size(), threads, [&](std::size_t i) {
      const auto patches = sample_parcel(scene.raster, scene.parcels, *labelled[i], sampler);
      counts[i].assign(vocab.size(), 0);
      if (patches.empty()) return;
      for (std::size_t w : labeler.label(patches)) {
        if (w >= vocab.size()) throw ProtocolError("labeler returned an index outside its vocabulary");
        ++counts[i][w];
      }
    });
    for (std::size_t i = 0; i < labelled.size(); ++i) {
      if (std::all_of(counts[i].begin(), counts[i].end(), [](std::size_t c) { return c == 0; })) {
        result.empty_parcels.push_back(labelled[i]->id);
      }
    }
  }

  for (Method method : methods) {
    std::vector<LandUseLabel> pred;
    std::vector<ParcelId> flagged;
    switch (method) {
      case Method::RECT: {
        std::vector<PatchSample> patches;
        patches.reserve(test_idx.size());
        for (std::size_t i : test_idx) patches.push_back(rect_patch(scene.raster, *labelled[i]));
        const auto words = labeler.label(patches);
        for (std::size_t k = 0; k < test_idx.size(); ++k) {
          if (words[k] >= vocab.size()) throw ProtocolError("labeler returned an index outside its vocabulary");
          const auto c = word_classes[words[k]];
          pred.push_back(c.value_or(fallback));
          if (!c) flagged.push_back(labelled[test_idx[k]]->id);
        }
        break;
      }
      case Method::RAND:
        for (std::size_t i : test_idx) {
          const auto c = rand_vote(counts[i], word_classes);
          pred.push_back(c.value_or(fallback));
          if (!c) flagged.push_back(labelled[i]->id);
        }
        break;
      case Method::PROPOSED: {
        WordFrequencyTable table;
        table.vocabulary = vocab;
        for (std::size_t i = 0; i < labelled.size(); ++i) {
          table.parcel_ids.push_back(labelled[i]->id);
          table.counts.push_back(counts[i]);
        }
        const auto features = tfidf_features(table, corpus_stats(table));
        std::vector<std::vector<double>> x;
        std::vector<LandUseLabel> y;
        for (std::size_t i : train_idx) {
          if (features[i].empty) continue;
          x.push_back(features[i].values);
          y.push_back(*labelled[i]->label);
        }
        ForestConfig fc = config.forest;
        fc.seed = derive_seed(rep_seed, 3);
        fc.threads = threads;
        std::optional<ForestModel> model;
        if (std::set<LandUseLabel>(y.begin(), y.end()).size() >= 2) {
          model = train_forest(x, y, fc);
          result.oob_error = model->oob_error;
        }
        for (std::size_t i : test_idx) {
          if (features[i].empty || !model) {
            pred.push_back(fallback);
            flagged.push_back(labelled[i]->id);
          } else {
            pred.push_back(predict(*model, features[i].values));
          }
        }
        break;
      }
    }
    result.outcomes.push_back(finish(method, test_ids, test_labels, std::move(pred), std::move(flagged)));
  }
  return result;
}

MethodOutcome run_pipeline(const SceneData& scene, const PatchLabeler& labeler,
                           std::span<const std::optional<LandUseLabel>> word_classes,
                           const PipelineConfig& config, Method method) {
  const std::array<Method, 1> one{method};
  auto r = run_repetition(scene, labeler, word_classes, config, repetition_seed(config.seed, 0), one,
                          config.threads);
  return std::move(r.outcomes.front());
}

CompareResult compare_methods(const SceneData& scene, const PatchLabeler& labeler,
                              std::span<const std::optional<LandUseLabel>> word_classes,
                              const PipelineConfig& config, std::size_t repetitions,
                              std::span<const Method> methods) {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (methods.empty()) throw ConfigError("no methods requested");
  config.validate();
  std::vector<RepetitionResult> reps(repetitions);
  const unsigned inner = repetitions == 1 ? config.threads : 1;
  parallel_for(repetitions, repetitions == 1 ? 1 : config.threads, [&](std::size_t r) {
    reps[r] = run_repetition(scene, labeler, word_classes, config, repetition_seed(config.seed, r), methods, inner);
  });

  CompareResult out;
  out.repetitions = repetitions;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodSummary s;
    s.method = methods[m];
    for (const auto& rep : reps) {
      const auto& o = rep.outcomes[m];
      s.oa.push_back(o.report.oa);
      s.kappa.push_back(o.report.kappa);
      s.pooled += o.matrix;
      s.fallback_count += o.fallback_ids.size();
    }
    const double n = static_cast<double>(repetitions);
    s.mean_oa = std::accumulate(s.oa.begin(), s.oa.end(), 0.0) / n;
    s.mean_kappa = std::accumulate(s.kappa.begin(), s.kappa.end(), 0.0) / n;
    s.min_oa = *std::min_element(s.oa.begin(), s.oa.end());
    s.max_oa = *std::max_element(s.oa.begin(), s.oa.end());
    out.methods.push_back(std::move(s));
  }
  for (const auto& rep : reps) out.empty_parcels += rep.empty_parcels.size();
  return out;
}

std::vector<SweepPoint> wmin_sweep(const SceneData& scene, const PatchLabeler& labeler,
                                   std::span<const std::optional<LandUseLabel>> word_classes,
                                   const PipelineConfig& config, std::span<const int> w_values,
                                   std::size_t repetitions) {
  const std::array<Method, 1> proposed{Method::PROPOSED};
  std::vector<SweepPoint> out;
  for (int w : w_values) {
    PipelineConfig c = config;
    c.sampler.w_min = w;
    const auto r = compare_methods(scene, labeler, word_classes, c, repetitions, proposed);
    out.push_back({w, r.methods.front().mean_oa, r.methods.front().mean_kappa,
                   static_cast<double>(r.empty_parcels) / static_cast<double>(repetitions)});
  }
  return out;
}

std::vector<int> default_sweep_widths() { return {10, 20, 30, 40, 50, 60, 70, 80, 90, 100}; }

std::string format_compare_table(const CompareResult& result) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s%10s%12s%10s%10s%10s\n", "method", "mean_oa", "mean_kappa", "min_oa",
                "max_oa", "fallback");
  out << line;
  for (const auto& m : result.methods) {
    std::snprintf(line, sizeof line, "%-10s%10.4f%12.4f%10.4f%10.4f%10zu\n", to_string(m.method).c_str(), m.mean_oa,
                  m.mean_kappa, m.min_oa, m.max_oa, m.fallback_count);
    out << line;
  }
  out << "repetitions " << result.repetitions << ", parcels without valid samples " << result.empty_parcels << '\n';
  return out.str();
}

std::string compare_to_json(const CompareResult& result) {
  using nlohmann::json;
  json methods = json::array();
  for (const auto& m : result.methods) {
    const auto pooled = accuracy_report(m.pooled);
    methods.push_back({{"method", to_string(m.method)},
                       {"mean_oa", m.mean_oa},
                       {"mean_kappa", m.mean_kappa},
                       {"min_oa", m.min_oa},
                       {"max_oa", m.max_oa},
                       {"oa", m.oa},
                       {"kappa", m.kappa},
                       {"fallback_count", m.fallback_count},
                       {"pooled", json::parse(report_to_json(m.pooled, pooled, -1))}});
  }
  json doc = {{"repetitions", result.repetitions}, {"empty_parcels", result.empty_parcels}, {"methods", methods}};
  return doc.dump(2);
}

std::string sweep_to_csv(std::span<const SweepPoint> points) {
  std::ostringstream out;
  out << "w,oa,kappa\n" << std::setprecision(17);
  for (const auto& p : points) out << p.w_min << ',' << p.mean_oa << ',' << p.mean_kappa << '\n';
  return out.str();
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepPoint> points) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << sweep_to_csv(points);
}

}  // namespace parcelsense
