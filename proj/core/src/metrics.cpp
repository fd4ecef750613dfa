#include "parcelsense/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "parcelsense/errors.hpp"

namespace parcelsense {

ConfusionMatrix::ConfusionMatrix(std::vector<LandUseLabel> cls)
    : classes(std::move(cls)), counts(classes.size(), std::vector<std::size_t>(classes.size(), 0)) {}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t r) const {
  return std::accumulate(counts[r].begin(), counts[r].end(), std::size_t{0});
}

std::size_t ConfusionMatrix::column_sum(std::size_t c) const {
  std::size_t s = 0;
  for (const auto& row : counts) s += row[c];
  return s;
}

std::size_t ConfusionMatrix::index(LandUseLabel label) const {
  auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) throw DataError("label " + to_string(label) + " is not a matrix class");
  return static_cast<std::size_t>(it - classes.begin());
}

void ConfusionMatrix::add(LandUseLabel truth, LandUseLabel prediction, std::size_t n) {
  counts[index(truth)][index(prediction)] += n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t r = 0; r < other.classes.size(); ++r) {
    for (std::size_t c = 0; c < other.classes.size(); ++c) {
      if (other.counts[r][c] > 0) add(other.classes[r], other.classes[c], other.counts[r][c]);
    }
  }
  return *this;
}

ConfusionMatrix confusion_matrix(std::span<const LandUseLabel> truth, std::span<const LandUseLabel> prediction,
                                 std::vector<LandUseLabel> classes) {
  if (truth.size() != prediction.size()) {
    throw DataError("truth has " + std::to_string(truth.size()) + " labels, prediction has " +
                    std::to_string(prediction.size()));
  }
  ConfusionMatrix cm(std::move(classes));
  for (std::size_t k = 0; k < truth.size(); ++k) cm.add(truth[k], prediction[k]);
  return cm;
}

AccuracyReport accuracy_report(const ConfusionMatrix& cm) {
  AccuracyReport rep;
  rep.total = cm.total();
  if (rep.total == 0) throw ConfigError("accuracy report of an empty confusion matrix");
  const double n = static_cast<double>(rep.total);
  std::size_t trace = 0;
  double pe = 0.0;
  for (std::size_t k = 0; k < cm.classes.size(); ++k) {
    trace += cm.counts[k][k];
    ClassAccuracy ca;
    ca.label = cm.classes[k];
    ca.reference = cm.row_sum(k);
    ca.predicted = cm.column_sum(k);
    const double diag = static_cast<double>(cm.counts[k][k]);
    if (ca.reference > 0) {
      ca.pa = diag / static_cast<double>(ca.reference);
      ca.omission = 1.0 - *ca.pa;
    }
    if (ca.predicted > 0) {
      ca.ua = diag / static_cast<double>(ca.predicted);
      ca.commission = 1.0 - *ca.ua;
    }
    pe += static_cast<double>(ca.reference) * static_cast<double>(ca.predicted);
    rep.per_class.push_back(ca);
  }
  rep.oa = static_cast<double>(trace) / n;
  rep.expected_agreement = pe / (n * n);
  if (rep.expected_agreement >= 1.0) {
    rep.kappa = trace == rep.total ? 1.0 : 0.0;
  } else {
    rep.kappa = (rep.oa - rep.expected_agreement) / (1.0 - rep.expected_agreement);
  }
  return rep;
}

std::optional<LandUseLabel> rand_vote(std::span<const std::size_t> word_counts,
                                      std::span<const std::optional<LandUseLabel>> word_classes) {
  if (word_counts.size() != word_classes.size()) throw ConfigError("word counts and word map differ in length");
  std::optional<std::size_t> best;
  for (std::size_t w = 0; w < word_counts.size(); ++w) {
    if (!word_classes[w] || word_counts[w] == 0) continue;
    if (!best || word_counts[w] > word_counts[*best]) best = w;
  }
  if (!best) return std::nullopt;
  return word_classes[*best];
}

std::string report_to_json(const ConfusionMatrix& cm, const AccuracyReport& report, int indent) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json classes = json::array();
  for (LandUseLabel l : cm.classes) classes.push_back(to_string(l));
  json per_class = json::array();
  for (const auto& c : report.per_class) {
    per_class.push_back({{"label", to_string(c.label)},
                         {"reference", c.reference},
                         {"predicted", c.predicted},
                         {"commission", opt(c.commission)},
                         {"omission", opt(c.omission)},
                         {"pa", opt(c.pa)},
                         {"ua", opt(c.ua)}});
  }
  json doc = {{"total", report.total},
              {"oa", report.oa},
              {"kappa", report.kappa},
              {"expected_agreement", report.expected_agreement},
              {"classes", classes},
              {"confusion_matrix", cm.counts},
              {"per_class", per_class}};
  return doc.dump(indent);
}

std::string format_report_table(const AccuracyReport& report) {
  auto cell = [](const std::optional<double>& v) {
    char buf[32];
    if (v) {
      std::snprintf(buf, sizeof buf, "%12.3f", *v);
    } else {
      std::snprintf(buf, sizeof buf, "%12s", "-");
    }
    return std::string(buf);
  };
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "OA %.4f  Kappa %.4f  (n = %zu)\n", report.oa, report.kappa, report.total);
  out << line;
  std::snprintf(line, sizeof line, "%-6s%12s%12s%12s%12s\n", "class", "commission", "omission", "PA", "UA");
  out << line;
  for (const auto& c : report.per_class) {
    out << to_string(c.label) << "     " << cell(c.commission) << cell(c.omission) << cell(c.pa) << cell(c.ua)
        << '\n';
  }
  return out.str();
}

}  // namespace parcelsense
