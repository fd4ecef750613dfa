#pragma once

// Independent reference implementations the tests compare against. They are
// deliberately naive and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "parcelsense/geodata.hpp"

namespace oracle {

/// Parcel map from rows of characters: '.' is background, '1'..'9' ids.
inline parcelsense::ParcelMap map_from_rows(const std::vector<std::string>& rows) {
  parcelsense::ParcelMap m(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const char c = rows[y][x];
      m.at(x, y) = c == '.' ? 0 : static_cast<std::uint16_t>(c - '0');
    }
  }
  return m;
}

/// tf-idf straight from the definitions, looping word by word.
inline std::vector<std::vector<double>> tfidf(const std::vector<std::vector<std::size_t>>& counts) {
  const std::size_t words = counts.empty() ? 0 : counts.front().size();
  double documents = 0.0;
  for (const auto& row : counts) {
    std::size_t total = 0;
    for (auto c : row) total += c;
    if (total > 0) documents += 1.0;
  }
  std::vector<std::vector<double>> out;
  for (const auto& row : counts) {
    std::size_t total = 0;
    for (auto c : row) total += c;
    std::vector<double> v(words, 0.0);
    if (total > 0) {
      for (std::size_t i = 0; i < words; ++i) {
        double df = 0.0;
        for (const auto& other : counts) {
          if (other[i] > 0) df += 1.0;
        }
        const double tf = static_cast<double>(row[i]) / static_cast<double>(total);
        v[i] = tf * std::log(documents / (df + 1.0));
      }
    }
    out.push_back(v);
  }
  return out;
}

/// Probability that one draw (seed, width) yields a valid window, by
/// enumerating every seed and every width with its exact probability.
inline double valid_probability(const parcelsense::ParcelMap& map, std::uint16_t id, int w_min,
                                double threshold) {
  int x_min = map.width, x_max = -1, y_min = map.height, y_max = -1;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      if (map.at(x, y) != id) continue;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  auto valid = [&](int x0, int y0, int w) {
    if (x0 + w > map.width || y0 + w > map.height) return false;
    long members = 0;
    for (int y = y0; y < y0 + w; ++y) {
      for (int x = x0; x < x0 + w; ++x) members += map.at(x, y) == id;
    }
    return static_cast<double>(members) / (static_cast<double>(w) * w) > threshold;
  };
  const double seeds = static_cast<double>(x_max - x_min + 1) * (y_max - y_min + 1);
  double p = 0.0;
  for (int y = y_min; y <= y_max; ++y) {
    for (int x = x_min; x <= x_max; ++x) {
      const int l = std::min(x_max - x, y_max - y);
      if (l < w_min) {
        p += valid(x, y, w_min) ? 1.0 / seeds : 0.0;
        continue;
      }
      const double choices = l - w_min + 1;
      for (int w = w_min; w <= l; ++w) p += valid(x, y, w) ? 1.0 / (seeds * choices) : 0.0;
    }
  }
  return p;
}

/// Cohen's kappa from the textbook formula on a square count matrix.
inline double kappa(const std::vector<std::vector<double>>& m) {
  double n = 0.0, diag = 0.0, pe = 0.0;
  const std::size_t k = m.size();
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) n += m[r][c];
    diag += m[r][r];
  }
  for (std::size_t r = 0; r < k; ++r) {
    double row = 0.0, col = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      row += m[r][c];
      col += m[c][r];
    }
    pe += row * col / (n * n);
  }
  return (diag / n - pe) / (1.0 - pe);
}

}  // namespace oracle
