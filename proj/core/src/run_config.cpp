#include "parcelsense/run_config.hpp"

#include <charconv>
#include <cmath>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "parcelsense/errors.hpp"

namespace parcelsense {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_int(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const std::string s(v);
    const double d = std::stod(s, &used);
    if (used == s.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view v = trim(raw);
  if (key == "seed") seed = parse_int<std::uint64_t>(key, v);
  else if (key == "threads") threads = parse_int<unsigned>(key, v);
  else if (key == "w_min") w_min = parse_int<int>(key, v);
  else if (key == "attempts") attempts = parse_int<int>(key, v);
  else if (key == "membership_threshold") membership_threshold = parse_real(key, v);
  else if (key == "labeler_train") labeler_split[0] = parse_real(key, v);
  else if (key == "labeler_validation") labeler_split[1] = parse_real(key, v);
  else if (key == "labeler_test") labeler_split[2] = parse_real(key, v);
  else if (key == "learning_rate") learning_rate = parse_real(key, v);
  else if (key == "iterations") iterations = parse_int<int>(key, v);
  else if (key == "batch_size") batch_size = parse_int<int>(key, v);
  else if (key == "crops_per_image") crops_per_image = parse_int<int>(key, v);
  else if (key == "scale_lo") scale_lo = parse_real(key, v);
  else if (key == "scale_hi") scale_hi = parse_real(key, v);
  else if (key == "train_fraction") train_fraction = parse_real(key, v);
  else if (key == "holdout_fraction") holdout_fraction = parse_real(key, v);
  else if (key == "n_trees") n_trees = parse_int<int>(key, v);
  else if (key == "features_per_split") features_per_split = parse_int<int>(key, v);
  else if (key == "min_samples_leaf") min_samples_leaf = parse_int<int>(key, v);
  else if (key == "repetitions") repetitions = parse_int<int>(key, v);
  else if (key == "labeler") labeler = std::string(v);
  else if (key == "timeout_ms") timeout_ms = parse_int<int>(key, v);
  else throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

void RunConfig::merge_text(std::string_view text, const std::string& origin) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(origin + " line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::validate() const {
  pipeline().validate();
  const double sum = labeler_split[0] + labeler_split[1] + labeler_split[2];
  if (std::abs(sum - 1.0) > 1e-9 || labeler_split[0] < 0 || labeler_split[1] < 0 || labeler_split[2] < 0) {
    throw ConfigError("labeler_train + labeler_validation + labeler_test must equal 1");
  }
  if (learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (crops_per_image < 0) throw ConfigError("crops_per_image must be >= 0");
  if (!(scale_lo > 0.0 && scale_lo <= scale_hi && scale_hi <= 1.0)) {
    throw ConfigError("scale range must satisfy 0 < scale_lo <= scale_hi <= 1");
  }
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (timeout_ms < 1) throw ConfigError("timeout_ms must be >= 1");
  if (labeler != "native" && labeler != "oracle" && labeler.rfind("exec:", 0) != 0) {
    throw ConfigError("labeler must be native, oracle or exec:<command>");
  }
}

PipelineConfig RunConfig::pipeline() const {
  PipelineConfig p;
  p.sampler.w_min = w_min;
  p.sampler.attempts = attempts;
  p.sampler.membership_threshold = membership_threshold;
  p.forest.n_trees = n_trees;
  p.forest.features_per_split = features_per_split;
  p.forest.min_samples_leaf = min_samples_leaf;
  p.forest.holdout_fraction = holdout_fraction;
  p.train_fraction = train_fraction;
  p.seed = seed;
  p.threads = std::max(1U, threads);
  return p;
}

LabelerTrainingConfig RunConfig::labeler_training() const {
  LabelerTrainingConfig c;
  c.softmax.learning_rate = learning_rate;
  c.softmax.iterations = iterations;
  c.softmax.batch_size = batch_size;
  c.softmax.seed = seed;
  c.split = labeler_split;
  c.crops_per_image = crops_per_image;
  c.scale_lo = scale_lo;
  c.scale_hi = scale_hi;
  return c;
}

std::string RunConfig::to_text() const {
  std::ostringstream o;
  o << std::setprecision(17);
  o << "seed = " << seed << "\nthreads = " << threads << "\nw_min = " << w_min << "\nattempts = " << attempts
    << "\nmembership_threshold = " << membership_threshold << "\nlabeler_train = " << labeler_split[0]
    << "\nlabeler_validation = " << labeler_split[1] << "\nlabeler_test = " << labeler_split[2]
    << "\nlearning_rate = " << learning_rate << "\niterations = " << iterations << "\nbatch_size = " << batch_size
    << "\ncrops_per_image = " << crops_per_image << "\nscale_lo = " << scale_lo << "\nscale_hi = " << scale_hi
    << "\ntrain_fraction = " << train_fraction << "\nholdout_fraction = " << holdout_fraction
    << "\nn_trees = " << n_trees << "\nfeatures_per_split = " << features_per_split
    << "\nmin_samples_leaf = " << min_samples_leaf << "\nrepetitions = " << repetitions << "\nlabeler = " << labeler
    << "\ntimeout_ms = " << timeout_ms << '\n';
  return o.str();
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig c;
  c.merge_text(buffer.str(), path.string());
  return c;
}

}  // namespace parcelsense
