#include <algorithm>
#include <cmath>

#include "parcelsense/labeler.hpp"

namespace parcelsense {

std::size_t feature_length(int bands) {
  return static_cast<std::size_t>(bands) * (kResampleSide * kResampleSide + kHistogramBins);
}

namespace {

struct Tap {
  int lo;
  int hi;
  double t;
};

// Pixel-center aligned sample positions, clamped at the borders.
std::array<Tap, kResampleSide> taps(int extent) {
  std::array<Tap, kResampleSide> out{};
  for (int o = 0; o < kResampleSide; ++o) {
    double s = (o + 0.5) * extent / kResampleSide - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(extent - 1));
    const int lo = static_cast<int>(std::floor(s));
    out[o] = {lo, std::min(lo + 1, extent - 1), s - lo};
  }
  return out;
}

}  // namespace

std::vector<double> featurize(const RasterGrid& px) {
  const int bands = px.bands;
  std::vector<double> f(feature_length(bands), 0.0);
  const auto tx = taps(px.width);
  const auto ty = taps(px.height);

  constexpr int kBlock = kResampleSide * kResampleSide;
  for (int b = 0; b < bands; ++b) {
    double* block = &f[static_cast<std::size_t>(b) * kBlock];
    for (int oy = 0; oy < kResampleSide; ++oy) {
      const Tap& v = ty[oy];
      for (int ox = 0; ox < kResampleSide; ++ox) {
        const Tap& u = tx[ox];
        const double top = (1.0 - u.t) * px.at(u.lo, v.lo, b) + u.t * px.at(u.hi, v.lo, b);
        const double bottom = (1.0 - u.t) * px.at(u.lo, v.hi, b) + u.t * px.at(u.hi, v.hi, b);
        block[oy * kResampleSide + ox] = ((1.0 - v.t) * top + v.t * bottom) / 255.0;
      }
    }
  }

  const std::size_t hist_offset = static_cast<std::size_t>(bands) * kBlock;
  const std::size_t n = static_cast<std::size_t>(px.width) * px.height;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bands) * kHistogramBins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int b = 0; b < bands; ++b) {
      const int bin = px.pixels[i * bands + b] * kHistogramBins / 256;
      ++counts[static_cast<std::size_t>(b) * kHistogramBins + bin];
    }
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    f[hist_offset + k] = static_cast<double>(counts[k]) / static_cast<double>(n);
  }
  return f;
}

}  // namespace parcelsense
