#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "parcelsense/labeler.hpp"

namespace parcelsense {

using nlohmann::json;

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = std::exp(logits[j] - peak);
    total += out[j];
  }
  for (double& v : out) v /= total;
  return out;
}

SoftmaxModel make_softmax_model(std::vector<std::string> classes, int bands) {
  if (classes.size() < 2) throw ConfigError("a softmax model needs at least two classes");
  SoftmaxModel model;
  model.classes = std::move(classes);
  model.bands = bands;
  model.feature_count = feature_length(bands);
  model.weights.assign(model.class_count() * model.row_length(), 0.0);
  return model;
}

std::vector<double> SoftmaxModel::logits(std::span<const double> features) const {
  if (features.size() != feature_count) {
    throw ConfigError("feature vector has length " + std::to_string(features.size()) +
                      ", model expects " + std::to_string(feature_count));
  }
  std::vector<double> z(class_count());
  const std::size_t stride = row_length();
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double* row = &weights[k * stride];
    double acc = row[feature_count];
    for (std::size_t i = 0; i < feature_count; ++i) acc += row[i] * features[i];
    z[k] = acc;
  }
  return z;
}

std::size_t SoftmaxModel::predict(std::span<const double> features) const {
  const auto z = logits(features);
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

namespace {

void check_batch(const SoftmaxModel& model, std::span<const LabeledFeatures> batch) {
  for (const auto& s : batch) {
    if (s.features.size() != model.feature_count) {
      throw ConfigError("inconsistent feature lengths in dataset");
    }
    if (s.label >= model.class_count()) throw ConfigError("label index out of range");
  }
}

double log_sum_exp(std::span<const double> z) {
  const double peak = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - peak);
  return peak + std::log(total);
}

// Adds sum over `indices` of (p - onehot) x [features; 1] into grad.
void accumulate_gradient(const SoftmaxModel& model, std::span<const LabeledFeatures> data,
                         std::span<const std::size_t> indices, std::vector<double>& grad) {
  const std::size_t stride = model.row_length();
  for (std::size_t idx : indices) {
    const LabeledFeatures& s = data[idx];
    const auto p = softmax(model.logits(s.features));
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double delta = p[k] - (k == s.label ? 1.0 : 0.0);
      double* g = &grad[k * stride];
      for (std::size_t i = 0; i < model.feature_count; ++i) g[i] += delta * s.features[i];
      g[model.feature_count] += delta;
    }
  }
}

}  // namespace

double cross_entropy_loss(const SoftmaxModel& model, std::span<const LabeledFeatures> batch) {
  check_batch(model, batch);
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : batch) {
    const auto z = model.logits(s.features);
    total += log_sum_exp(z) - z[s.label];
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> cross_entropy_gradient(const SoftmaxModel& model,
                                           std::span<const LabeledFeatures> batch) {
  check_batch(model, batch);
  std::vector<double> grad(model.weights.size(), 0.0);
  if (batch.empty()) return grad;
  std::vector<std::size_t> all(batch.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  accumulate_gradient(model, batch, all, grad);
  for (double& g : grad) g /= static_cast<double>(batch.size());
  return grad;
}

double accuracy(const SoftmaxModel& model, std::span<const LabeledFeatures> data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : data) hits += model.predict(s.features) == s.label ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

SoftmaxTrainResult train_softmax(std::vector<std::string> classes, int bands,
                                 std::span<const LabeledFeatures> train,
                                 std::span<const LabeledFeatures> validation,
                                 const SoftmaxTrainParams& params) {
  if (train.empty()) throw ConfigError("empty training set");
  if (params.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (params.iterations < 0) throw ConfigError("iterations must be >= 0");
  SoftmaxModel model = make_softmax_model(std::move(classes), bands);
  check_batch(model, train);
  check_batch(model, validation);
  std::set<std::size_t> present;
  for (const auto& s : train) present.insert(s.label);
  if (present.size() < 2) throw ConfigError("training data contains a single class");

  const std::size_t n = train.size();
  const bool full_batch = static_cast<std::size_t>(params.batch_size) >= n;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(params.seed);
  std::size_t cursor = n;  // forces a shuffle before the first batch
  std::vector<std::size_t> batch;
  std::vector<double> grad(model.weights.size());

  for (int step = 0; step < params.iterations; ++step) {
    batch.clear();
    if (full_batch) {
      batch = order;
    } else {
      while (batch.size() < static_cast<std::size_t>(params.batch_size)) {
        if (cursor == n) {
          std::shuffle(order.begin(), order.end(), rng);
          cursor = 0;
        }
        batch.push_back(order[cursor++]);
      }
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    accumulate_gradient(model, train, batch, grad);
    const double scale = params.learning_rate / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < grad.size(); ++i) model.weights[i] -= scale * grad[i];
  }

  SoftmaxTrainResult result;
  result.train_accuracy = accuracy(model, train);
  if (!validation.empty()) result.validation_accuracy = accuracy(model, validation);
  result.model = std::move(model);
  return result;
}

std::size_t predict_word(const SoftmaxModel& model, const PatchSample& patch) {
  if (patch.pixels.bands != model.bands) {
    throw ConfigError("patch has " + std::to_string(patch.pixels.bands) + " bands, model expects " +
                      std::to_string(model.bands));
  }
  return model.predict(featurize_patch(patch));
}

std::string model_to_json(const SoftmaxModel& model) {
  json rows = json::array();
  for (std::size_t k = 0; k < model.class_count(); ++k) {
    auto first = model.weights.begin() + static_cast<std::ptrdiff_t>(k * model.row_length());
    rows.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(model.row_length())));
  }
  json doc = {{"format", "parcelsense-softmax"},
              {"layout_version", kFeatureLayoutVersion},
              {"classes", model.classes},
              {"bands", model.bands},
              {"feature_count", model.feature_count},
              {"weights", rows}};
  return doc.dump(1);
}

SoftmaxModel model_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "parcelsense-softmax") throw DataError("not a softmax model file");
    if (doc.at("layout_version").get<int>() != kFeatureLayoutVersion) {
      throw DataError("unsupported feature layout version");
    }
    SoftmaxModel model = make_softmax_model(doc.at("classes").get<std::vector<std::string>>(),
                                            doc.at("bands").get<int>());
    if (doc.at("feature_count").get<std::size_t>() != model.feature_count) {
      throw DataError("feature_count does not match the feature layout");
    }
    const auto& rows = doc.at("weights");
    if (rows.size() != model.class_count()) throw DataError("weight row count != class count");
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto row = rows[k].get<std::vector<double>>();
      if (row.size() != model.row_length()) throw DataError("weight row has the wrong length");
      std::copy(row.begin(), row.end(), model.weights.begin() + static_cast<std::ptrdiff_t>(k * model.row_length()));
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("invalid model: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const SoftmaxModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << model_to_json(model) << '\n';
}

SoftmaxModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& fractions) {
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(total - 1.0) > 1e-9 || fractions[0] < 0 || fractions[1] < 0 || fractions[2] < 0) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  // The epsilon keeps products like 0.29 * 100 from flooring to 28.
  auto part = [n](double f) {
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9));
  };
  const std::size_t a = std::min(part(fractions[0]), n);
  const std::size_t b = std::min(part(fractions[1]), n - a);
  return {a, b, n - a - b};
}

NativeLabeler::NativeLabeler(SoftmaxModel model) : model_(std::move(model)) {}

std::vector<std::size_t> NativeLabeler::label(std::span<const PatchSample> patches) const {
  std::vector<std::size_t> words;
  words.reserve(patches.size());
  for (const auto& p : patches) words.push_back(predict_word(model_, p));
  return words;
}

PatchDataset load_patch_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw DataError("patch dataset root '" + root.string() + "' is not a directory");
  PatchDataset ds;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) ds.classes.push_back(entry.path().filename().string());
  }
  std::sort(ds.classes.begin(), ds.classes.end());
  if (ds.classes.size() < 2) throw DataError("patch dataset needs at least two class directories");
  int bands = 0;
  for (std::size_t c = 0; c < ds.classes.size(); ++c) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root / ds.classes[c])) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      RasterGrid img = load_raster(f);
      if (bands == 0) bands = img.bands;
      if (img.bands != bands) throw DataError("patch dataset mixes band counts: '" + f.string() + "'");
      ds.images.emplace_back(std::move(img), c);
    }
  }
  if (ds.images.empty()) throw DataError("patch dataset contains no PNG images");
  return ds;
}

LabelerTrainingReport train_labeler(const PatchDataset& dataset, const LabelerTrainingConfig& config) {
  if (dataset.images.empty()) throw ConfigError("empty patch dataset");
  const int bands = dataset.images.front().first.bands;
  std::vector<std::size_t> ids(dataset.images.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  Rng split_rng = make_rng(config.softmax.seed, 1);
  const auto parts = split_dataset(ids, config.split, split_rng);

  Rng crop_rng = make_rng(config.softmax.seed, 2);
  std::vector<LabeledFeatures> train;
  for (std::size_t id : parts.train) {
    const auto& [image, label] = dataset.images[id];
    if (config.crops_per_image <= 0) {
      train.push_back({featurize(image), label});
      continue;
    }
    for (const auto& c : multiscale_crops(image, config.crops_per_image, config.scale_lo,
                                          config.scale_hi, crop_rng)) {
      train.push_back({featurize(c.pixels), label});
    }
  }
  auto whole = [&](const std::vector<std::size_t>& part) {
    std::vector<LabeledFeatures> out;
    for (std::size_t id : part) out.push_back({featurize(dataset.images[id].first), dataset.images[id].second});
    return out;
  };
  const auto validation = whole(parts.validation);
  const auto test = whole(parts.test);

  LabelerTrainingReport report;
  report.result = train_softmax(dataset.classes, bands, train, validation, config.softmax);
  if (!test.empty()) report.test_accuracy = accuracy(report.result.model, test);
  report.image_counts = {parts.train.size(), parts.validation.size(), parts.test.size()};
  return report;
}

}  // namespace parcelsense
