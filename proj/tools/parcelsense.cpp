#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parcelsense/csv.hpp"
#include "parcelsense/errors.hpp"
#include "parcelsense/external_labeler.hpp"
#include "parcelsense/forest.hpp"
#include "parcelsense/labeler.hpp"
#include "parcelsense/metrics.hpp"
#include "parcelsense/parallel.hpp"
#include "parcelsense/pipeline.hpp"
#include "parcelsense/plot.hpp"
#include "parcelsense/run_config.hpp"
#include "parcelsense/sampler.hpp"
#include "parcelsense/semantics.hpp"
#include "parcelsense/synthcity.hpp"

namespace fs = std::filesystem;
using namespace parcelsense;

namespace {

struct CommonFlags {
  std::string config;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  int w_min = 0;
  int attempts = 0;
  std::string labeler;
  std::string out;
  std::string model;
  std::string scene;
  std::string word_map;

  CLI::App* command = nullptr;

  bool given(const std::string& flag) const { return command->get_option(flag)->count() > 0; }
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--threads", f.threads, "worker threads (default: PARCELSENSE_THREADS or 1)");
  cmd->add_option("--wmin", f.w_min, "minimum sampling window width");
  cmd->add_option("--attempts", f.attempts, "sampling attempts per parcel");
  cmd->add_option("--labeler", f.labeler, "native | oracle | exec:<command>");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig rc;
  if (!f.config.empty()) rc = load_run_config(f.config);
  if (!f.given("--threads")) {
    if (const char* env = std::getenv("PARCELSENSE_THREADS"); env && *env) rc.set("threads", env);
  } else {
    rc.threads = f.threads;
  }
  if (f.given("--seed")) rc.seed = f.seed;
  if (f.given("--wmin")) rc.w_min = f.w_min;
  if (f.given("--attempts")) rc.attempts = f.attempts;
  if (f.given("--labeler")) rc.labeler = f.labeler;
  if (rc.threads == 0) throw ConfigError("threads must be >= 1");
  rc.validate();
  return rc;
}

std::uint64_t stage_seed(const RunConfig& rc, std::uint64_t stream) {
  return derive_seed(repetition_seed(rc.seed, 0), stream);
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& l : lines) out << l << '\n';
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

std::unique_ptr<PatchLabeler> make_labeler(const RunConfig& rc, const CommonFlags& f) {
  if (rc.labeler == "native") {
    if (f.model.empty()) throw ConfigError("--labeler native needs --model <softmax model>");
    return std::make_unique<NativeLabeler>(load_model(f.model));
  }
  if (rc.labeler == "oracle") {
    if (f.scene.empty()) throw ConfigError("--labeler oracle needs --scene <synthetic scene>");
    const fs::path dir = f.scene;
    auto vocab = read_lines(dir / "vocabulary.txt");
    const ParcelMap words = load_parcel_map(dir / "words.png");
    for (auto w : words.ids) {
      if (w >= vocab.size()) throw DataError("words.png holds an index outside vocabulary.txt");
    }
    return std::make_unique<OracleLabeler>(std::move(vocab), words.width, words.height, words.ids);
  }
  ExternalLabelerOptions opts;
  opts.timeout = std::chrono::milliseconds(rc.timeout_ms);
  return std::make_unique<ExternalLabeler>(rc.labeler.substr(5), opts);
}

std::vector<std::optional<LandUseLabel>> word_classes(const CommonFlags& f, const PatchLabeler& labeler) {
  fs::path path = f.word_map;
  if (path.empty()) {
    if (f.scene.empty()) throw ConfigError("a word map is needed: pass --word-map or --scene");
    path = fs::path(f.scene) / "word_map.csv";
  }
  return word_classes_for(labeler.vocabulary(), load_word_map(path));
}

LabelTable labels_for(const std::string& labels, const std::string& scene) {
  if (!labels.empty()) return load_labels(labels);
  if (!scene.empty()) return load_labels(fs::path(scene) / "labels.csv");
  throw ConfigError("reference labels are needed: pass --labels or --scene");
}

LandUseLabel most_frequent(const std::vector<LandUseLabel>& labels) {
  std::array<std::size_t, kLandUseCount> counts{};
  for (LandUseLabel l : labels) ++counts[index_of(l)];
  return kAllLandUse[static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin())];
}

// --- commands --------------------------------------------------------------

int cmd_synth(const CommonFlags& f, const std::string& benchmark, int patches) {
  const RunConfig rc = resolve(f);
  if (f.out.empty()) throw ConfigError("synth needs --out");
  SceneSpec spec;
  if (benchmark == "default") spec = default_benchmark(rc.seed);
  else if (benchmark == "thin") spec = thin_parcel_benchmark(rc.seed);
  else throw ConfigError("unknown benchmark '" + benchmark + "' (default | thin)");
  const Scene scene = generate_scene(spec);
  write_scene(f.out, scene, patches, rc.seed, &spec);
  std::cout << "wrote " << scene.labels.size() << " parcels and " << scene.vocabulary.size() << " words to "
            << f.out << '\n';
  return 0;
}

int cmd_train_labeler(const CommonFlags& f, std::string patches) {
  const RunConfig rc = resolve(f);
  if (f.out.empty()) throw ConfigError("train-labeler needs --out");
  if (patches.empty()) {
    if (f.scene.empty()) throw ConfigError("train-labeler needs --patches or --scene");
    patches = (fs::path(f.scene) / "patches").string();
  }
  const PatchDataset ds = load_patch_dataset(patches);
  const LabelerTrainingReport rep = train_labeler(ds, rc.labeler_training());
  save_model(f.out, rep.result.model);
  std::cout << "images train/validation/test: " << rep.image_counts[0] << '/' << rep.image_counts[1] << '/'
            << rep.image_counts[2] << '\n';
  std::cout << "train accuracy: " << rep.result.train_accuracy << '\n';
  if (rep.result.validation_accuracy) std::cout << "validation accuracy: " << *rep.result.validation_accuracy << '\n';
  if (rep.test_accuracy) std::cout << "test accuracy: " << *rep.test_accuracy << '\n';
  return 0;
}

int cmd_sample(const CommonFlags& f, bool no_pixels) {
  const RunConfig rc = resolve(f);
  if (f.scene.empty() || f.out.empty()) throw ConfigError("sample needs --scene and --out");
  const SceneData scene = load_scene(f.scene);
  SamplerConfig sc = rc.pipeline().sampler;
  sc.seed = stage_seed(rc, 2);

  std::vector<std::vector<SampleWindow>> windows(scene.index.records.size());
  parallel_for(windows.size(), rc.threads,
               [&](std::size_t i) { windows[i] = sample_windows(scene.parcels, scene.index.records[i], sc); });

  const fs::path out = f.out;
  fs::create_directories(out);
  std::vector<ManifestRow> rows;
  std::size_t empty = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const ParcelId id = scene.index.records[i].id;
    if (windows[i].empty()) ++empty;
    for (std::size_t k = 0; k < windows[i].size(); ++k) {
      ManifestRow row{id, windows[i][k], ""};
      if (!no_pixels) {
        row.path = "p" + std::to_string(id) + "_" + std::to_string(k) + ".png";
        save_raster(out / row.path, crop(scene.raster, id, windows[i][k].rect()).pixels);
      }
      rows.push_back(std::move(row));
    }
  }
  write_manifest(out / "manifest.csv", rows);
  std::cout << rows.size() << " samples from " << windows.size() << " parcels (" << empty
            << " without a valid window)\n";
  return 0;
}

int cmd_label(const CommonFlags& f, const std::string& manifest_path) {
  const RunConfig rc = resolve(f);
  if (manifest_path.empty() || f.out.empty()) throw ConfigError("label needs --manifest and --out");
  const auto rows = read_manifest(manifest_path);
  std::optional<RasterGrid> raster;
  if (!f.scene.empty()) raster = load_raster(fs::path(f.scene) / "raster.png");
  const fs::path base = fs::path(manifest_path).parent_path();

  auto labeler = make_labeler(rc, f);
  const auto& vocab = labeler->vocabulary();
  std::vector<std::size_t> words;
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < rows.size(); start += kChunk) {
    std::vector<PatchSample> patches;
    for (std::size_t i = start; i < std::min(rows.size(), start + kChunk); ++i) {
      const auto& r = rows[i];
      const PixelRect rect = r.window.rect();
      if (raster) {
        if (rect.x < 0 || rect.y < 0 || rect.x + rect.width > raster->width || rect.y + rect.height > raster->height) {
          throw DataError("manifest window for parcel " + std::to_string(r.parcel_id) + " leaves the raster");
        }
        patches.push_back(crop(*raster, r.parcel_id, rect));
      } else {
        if (r.path.empty()) throw DataError("manifest rows carry no pixels; pass --scene");
        patches.push_back({r.parcel_id, rect, load_raster(base / r.path)});
      }
    }
    for (std::size_t w : labeler->label(patches)) words.push_back(w);
  }

  auto out = open_out(f.out);
  out << "parcel_id,x,y,w,word\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (words[i] >= vocab.size()) throw ProtocolError("labeler returned an index outside its vocabulary");
    out << rows[i].parcel_id << ',' << rows[i].window.x << ',' << rows[i].window.y << ',' << rows[i].window.w << ','
        << vocab[words[i]] << '\n';
  }
  write_lines(fs::path(f.out).string() + ".vocab", vocab);
  std::cout << "labelled " << rows.size() << " samples\n";
  return 0;
}

int cmd_featurize(const CommonFlags& f, const std::string& words_path, std::string vocab_path,
                  const std::string& counts_path) {
  resolve(f);
  if (words_path.empty() || f.out.empty()) throw ConfigError("featurize needs --words and --out");
  if (vocab_path.empty()) vocab_path = words_path + ".vocab";
  const auto vocab = read_lines(vocab_path);

  const csv::Table t = csv::read(words_path);
  const std::vector<std::string> expected{"parcel_id", "x", "y", "w", "word"};
  if (t.header != expected) throw DataError("'" + words_path + "': expected header parcel_id,x,y,w,word");
  std::map<ParcelId, std::vector<std::string>> words;
  if (!f.scene.empty()) {
    const ParcelMap map = load_parcel_map(fs::path(f.scene) / "parcels.png");
    for (const auto& r : build_parcel_records(map).records) words[r.id];
  }
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto id = csv::parse_integer<ParcelId>(t.rows[i][0], words_path, i + 2);
    words[id].push_back(t.rows[i][4]);
  }
  const WordFrequencyTable table = count_words(vocab, words);
  const auto features = tfidf_features(table, corpus_stats(table));
  if (fs::path(f.out).has_parent_path()) fs::create_directories(fs::path(f.out).parent_path());
  write_feature_csv(f.out, vocab, features);
  if (!counts_path.empty()) write_count_csv(counts_path, table);
  const auto n_empty = std::count_if(features.begin(), features.end(), [](const auto& v) { return v.empty; });
  std::cout << features.size() << " parcels, " << n_empty << " without words\n";
  return 0;
}

int cmd_train_rf(const CommonFlags& f, const std::string& features_path, const std::string& labels_path,
                 const std::string& split_path) {
  const RunConfig rc = resolve(f);
  if (features_path.empty() || f.out.empty()) throw ConfigError("train-rf needs --features and --out");
  const LabelTable labels = labels_for(labels_path, f.scene);
  FeatureMatrix fm = read_feature_csv(features_path);
  std::sort(fm.rows.begin(), fm.rows.end(), [](const auto& a, const auto& b) { return a.parcel_id < b.parcel_id; });

  std::vector<const SemanticFeatureVector*> labelled;
  for (const auto& r : fm.rows) {
    if (labels.count(r.parcel_id)) labelled.push_back(&r);
  }
  if (labelled.size() < 2) throw DataError("need at least two labelled parcels");

  const PipelineConfig pc = rc.pipeline();
  Rng split_rng = make_rng(repetition_seed(rc.seed, 0), 1);
  std::vector<std::size_t> order(labelled.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), split_rng);
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::floor(pc.train_fraction * static_cast<double>(labelled.size()) + 1e-9)), 1,
      labelled.size() - 1);
  std::vector<bool> is_train(labelled.size(), false);
  for (std::size_t k = 0; k < n_train; ++k) is_train[order[k]] = true;

  std::vector<std::vector<double>> x;
  std::vector<LandUseLabel> y, all_train;
  for (std::size_t i = 0; i < labelled.size(); ++i) {
    if (!is_train[i]) continue;
    const LandUseLabel l = labels.at(labelled[i]->parcel_id);
    all_train.push_back(l);
    if (labelled[i]->empty) continue;
    x.push_back(labelled[i]->values);
    y.push_back(l);
  }
  if (std::set<LandUseLabel>(y.begin(), y.end()).size() < 2) {
    throw DataError("training parcels with words cover fewer than two classes");
  }
  ForestConfig fc = pc.forest;
  fc.seed = stage_seed(rc, 3);
  fc.threads = rc.threads;
  ForestModel model = train_forest(x, y, fc);
  model.fallback = most_frequent(all_train);
  save_forest(f.out, model);

  if (!split_path.empty()) {
    auto out = open_out(split_path);
    out << "parcel_id,set\n";
    for (std::size_t i = 0; i < labelled.size(); ++i) {
      out << labelled[i]->parcel_id << ',' << (is_train[i] ? "train" : "test") << '\n';
    }
  }
  std::cout << "trained " << model.trees.size() << " trees on " << x.size() << " parcels, oob error "
            << model.oob_error << '\n';
  if (model.holdout_error) std::cout << "holdout error " << *model.holdout_error << '\n';
  return 0;
}

int cmd_classify(const CommonFlags& f, const std::string& features_path, const std::string& split_path) {
  resolve(f);
  if (features_path.empty() || f.model.empty() || f.out.empty()) {
    throw ConfigError("classify needs --features, --model and --out");
  }
  const ForestModel model = load_forest(f.model);
  const FeatureMatrix fm = read_feature_csv(features_path);
  if (fm.vocabulary.size() != model.feature_count) {
    throw DataError("feature file has " + std::to_string(fm.vocabulary.size()) + " columns, model expects " +
                    std::to_string(model.feature_count));
  }
  std::optional<std::set<ParcelId>> keep;
  if (!split_path.empty()) {
    const csv::Table t = csv::read(split_path);
    if (t.header != std::vector<std::string>{"parcel_id", "set"}) {
      throw DataError("'" + split_path + "': expected header parcel_id,set");
    }
    keep.emplace();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (t.rows[i][1] == "test") keep->insert(csv::parse_integer<ParcelId>(t.rows[i][0], split_path, i + 2));
    }
  }
  auto out = open_out(f.out);
  out << "parcel_id,label,empty\n";
  std::size_t n = 0;
  for (const auto& r : fm.rows) {
    if (keep && !keep->count(r.parcel_id)) continue;
    const LandUseLabel l = r.empty ? model.fallback : predict(model, r.values);
    out << r.parcel_id << ',' << to_string(l) << ',' << (r.empty ? 1 : 0) << '\n';
    ++n;
  }
  std::cout << "classified " << n << " parcels\n";
  return 0;
}

int cmd_evaluate(const CommonFlags& f, const std::string& predictions_path, const std::string& labels_path,
                 const std::string& text_path) {
  resolve(f);
  if (predictions_path.empty()) throw ConfigError("evaluate needs --predictions");
  const LabelTable labels = labels_for(labels_path, f.scene);
  const csv::Table t = csv::read(predictions_path);
  if (t.header != std::vector<std::string>{"parcel_id", "label", "empty"}) {
    throw DataError("'" + predictions_path + "': expected header parcel_id,label,empty");
  }
  std::vector<LandUseLabel> truth, pred;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto id = csv::parse_integer<ParcelId>(t.rows[i][0], predictions_path, i + 2);
    const auto l = parse_land_use(t.rows[i][1]);
    if (!l) throw DataError("'" + predictions_path + "' line " + std::to_string(i + 2) + ": unknown class");
    auto it = labels.find(id);
    if (it == labels.end()) {
      ++skipped;
      continue;
    }
    truth.push_back(it->second);
    pred.push_back(*l);
  }
  if (truth.empty()) throw DataError("no predicted parcel has a reference label");
  const ConfusionMatrix cm = confusion_matrix(truth, pred);
  const AccuracyReport report = accuracy_report(cm);
  const std::string table = format_report_table(report);
  std::cout << table;
  if (skipped) std::cerr << skipped << " predicted parcels have no reference label\n";
  if (!f.out.empty()) open_out(f.out) << report_to_json(cm, report) << '\n';
  if (!text_path.empty()) open_out(text_path) << table;
  return 0;
}

int cmd_compare(const CommonFlags& f, int reps) {
  const RunConfig rc = resolve(f);
  if (f.scene.empty()) throw ConfigError("compare needs --scene");
  const SceneData scene = load_scene(f.scene);
  auto labeler = make_labeler(rc, f);
  const auto classes = word_classes(f, *labeler);
  const auto n = static_cast<std::size_t>(reps > 0 ? reps : rc.repetitions);
  const CompareResult result = compare_methods(scene, *labeler, classes, rc.pipeline(), n);
  std::cout << format_compare_table(result);
  if (!f.out.empty()) open_out(f.out) << compare_to_json(result) << '\n';
  return 0;
}

int cmd_sweep(const CommonFlags& f, int reps, std::vector<int> widths, const std::string& plot) {
  const RunConfig rc = resolve(f);
  if (f.scene.empty()) throw ConfigError("sweep needs --scene");
  const SceneData scene = load_scene(f.scene);
  auto labeler = make_labeler(rc, f);
  const auto classes = word_classes(f, *labeler);
  if (widths.empty()) widths = default_sweep_widths();
  const auto n = static_cast<std::size_t>(reps > 0 ? reps : rc.repetitions);
  const auto points = wmin_sweep(scene, *labeler, classes, rc.pipeline(), widths, n);
  const std::string text = sweep_to_csv(points);
  if (f.out.empty()) std::cout << text;
  else open_out(f.out) << text;
  if (!plot.empty()) {
    std::vector<std::pair<double, double>> xy;
    for (const auto& p : points) xy.emplace_back(p.w_min, p.mean_oa);
    if (fs::path(plot).has_parent_path()) fs::create_directories(fs::path(plot).parent_path());
    save_line_plot(plot, xy);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parcelsense: land-use classification of irregular parcels from visual words"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CommonFlags f;
  std::string benchmark = "default", patches_dir, manifest, words, vocab, counts, features, labels, split,
              predictions, text_out, plot;
  int training_patches = 20, reps = 0;
  bool no_pixels = false;
  std::vector<int> widths;

  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  add_common(synth, f);
  synth->add_option("--out", f.out, "output directory")->required();
  synth->add_option("--benchmark", benchmark, "default | thin");
  synth->add_option("--patches", training_patches, "example images per word for labeler training");

  auto* tl = app.add_subcommand("train-labeler", "train the native softmax labeler on a patch directory");
  add_common(tl, f);
  tl->add_option("--patches", patches_dir, "root with one sub-directory per word");
  tl->add_option("--scene", f.scene, "scene directory (uses <scene>/patches)");
  tl->add_option("--out", f.out, "model JSON")->required();

  auto* sample = app.add_subcommand("sample", "draw sampling windows for every parcel");
  add_common(sample, f);
  sample->add_option("--scene", f.scene, "scene directory")->required();
  sample->add_option("--out", f.out, "output directory")->required();
  sample->add_flag("--no-pixels", no_pixels, "write only manifest.csv");

  auto* label = app.add_subcommand("label", "assign a word to every sampled patch");
  add_common(label, f);
  label->add_option("--manifest", manifest, "manifest.csv from sample")->required();
  label->add_option("--scene", f.scene, "scene directory (pixels are cut from its raster)");
  label->add_option("--model", f.model, "softmax model for --labeler native");
  label->add_option("--out", f.out, "words CSV")->required();

  auto* feat = app.add_subcommand("featurize", "TF-IDF features from labelled words");
  add_common(feat, f);
  feat->add_option("--words", words, "words CSV from label")->required();
  feat->add_option("--vocabulary", vocab, "one word per line (default: <words>.vocab)");
  feat->add_option("--scene", f.scene, "include every parcel of the scene, with or without words");
  feat->add_option("--counts", counts, "also write word counts here");
  feat->add_option("--out", f.out, "features CSV")->required();

  auto* trf = app.add_subcommand("train-rf", "train the random forest on a train split");
  add_common(trf, f);
  trf->add_option("--features", features, "features CSV")->required();
  trf->add_option("--labels", labels, "labels CSV");
  trf->add_option("--scene", f.scene, "scene directory (uses <scene>/labels.csv)");
  trf->add_option("--split", split, "write the train/test split here");
  trf->add_option("--out", f.out, "forest JSON")->required();

  auto* cls = app.add_subcommand("classify", "predict a class for every parcel");
  add_common(cls, f);
  cls->add_option("--features", features, "features CSV")->required();
  cls->add_option("--model", f.model, "forest JSON")->required();
  cls->add_option("--split", split, "only classify the test parcels of this split");
  cls->add_option("--out", f.out, "predictions CSV")->required();

  auto* ev = app.add_subcommand("evaluate", "confusion matrix and accuracy report");
  add_common(ev, f);
  ev->add_option("--predictions", predictions, "predictions CSV")->required();
  ev->add_option("--labels", labels, "labels CSV");
  ev->add_option("--scene", f.scene, "scene directory (uses <scene>/labels.csv)");
  ev->add_option("--out", f.out, "report JSON");
  ev->add_option("--text", text_out, "report table");

  auto* cmp = app.add_subcommand("compare", "RECT, RAND and PROPOSED over repeated splits");
  add_common(cmp, f);
  cmp->add_option("--scene", f.scene, "scene directory")->required();
  cmp->add_option("--reps", reps, "repetitions (default: config repetitions)");
  cmp->add_option("--model", f.model, "softmax model for --labeler native");
  cmp->add_option("--word-map", f.word_map, "word,land_use CSV (default: <scene>/word_map.csv)");
  cmp->add_option("--out", f.out, "report JSON");

  auto* sw = app.add_subcommand("sweep", "PROPOSED accuracy against the minimum window width");
  add_common(sw, f);
  sw->add_option("--scene", f.scene, "scene directory")->required();
  sw->add_option("--reps", reps, "repetitions per width (default: config repetitions)");
  sw->add_option("--widths", widths, "w_min values (default: 10 20 ... 100)")->delimiter(',');
  sw->add_option("--model", f.model, "softmax model for --labeler native");
  sw->add_option("--word-map", f.word_map, "word,land_use CSV (default: <scene>/word_map.csv)");
  sw->add_option("--out", f.out, "CSV (default: stdout)");
  sw->add_option("--plot", plot, "PNG line plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    std::cout << (subs.empty() ? app.help() : subs.front()->help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (!app.get_subcommands().empty()) std::cerr << app.get_subcommands().front()->help();
    return 1;
  }

  f.command = app.get_subcommands().front();
  try {
    if (synth->parsed()) return cmd_synth(f, benchmark, training_patches);
    if (tl->parsed()) return cmd_train_labeler(f, patches_dir);
    if (sample->parsed()) return cmd_sample(f, no_pixels);
    if (label->parsed()) return cmd_label(f, manifest);
    if (feat->parsed()) return cmd_featurize(f, words, vocab, counts);
    if (trf->parsed()) return cmd_train_rf(f, features, labels, split);
    if (cls->parsed()) return cmd_classify(f, features, split);
    if (ev->parsed()) return cmd_evaluate(f, predictions, labels, text_out);
    if (cmp->parsed()) return cmd_compare(f, reps);
    if (sw->parsed()) return cmd_sweep(f, reps, widths, plot);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
