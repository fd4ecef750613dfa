#include "parcelsense/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "parcelsense/errors.hpp"

namespace parcelsense {

namespace {

void dot(RasterGrid& g, int x, int y, std::array<std::uint8_t, 3> c) {
  if (!g.contains(x, y)) return;
  for (int b = 0; b < 3; ++b) g.at(x, y, b) = c[b];
}

void line(RasterGrid& g, int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> c, int thick = 1) {
  const int steps = std::max({std::abs(x1 - x0), std::abs(y1 - y0), 1});
  for (int s = 0; s <= steps; ++s) {
    const int x = x0 + static_cast<int>(std::lround(static_cast<double>(x1 - x0) * s / steps));
    const int y = y0 + static_cast<int>(std::lround(static_cast<double>(y1 - y0) * s / steps));
    for (int dy = -(thick / 2); dy <= thick / 2; ++dy) {
      for (int dx = -(thick / 2); dx <= thick / 2; ++dx) dot(g, x + dx, y + dy, c);
    }
  }
}

}  // namespace

RasterGrid render_line_plot(std::span<const std::pair<double, double>> points, int width, int height,
                            double y_lo, double y_hi) {
  if (width < 64 || height < 64) throw ConfigError("plot must be at least 64x64");
  if (!(y_hi > y_lo)) throw ConfigError("plot y range is empty");
  RasterGrid g(width, height, 3, 255);
  const int left = 48, right = width - 16, top = 16, bottom = height - 40;
  const std::array<std::uint8_t, 3> black{0, 0, 0}, grid{220, 220, 220}, blue{30, 90, 200};

  for (int k = 0; k <= 10; ++k) {
    const int y = bottom - (bottom - top) * k / 10;
    line(g, left, y, right, y, grid);
    line(g, left - 6, y, left, y, black);
  }
  line(g, left, top, left, bottom, black);
  line(g, left, bottom, right, bottom, black);
  if (points.empty()) return g;

  double x_lo = points.front().first, x_hi = points.front().first;
  for (const auto& [x, y] : points) {
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  auto px = [&](double x) { return left + static_cast<int>(std::lround((x - x_lo) / (x_hi - x_lo) * (right - left))); };
  auto py = [&](double y) {
    const double t = std::clamp((y - y_lo) / (y_hi - y_lo), 0.0, 1.0);
    return bottom - static_cast<int>(std::lround(t * (bottom - top)));
  };
  for (const auto& [x, y] : points) line(g, px(x), bottom, px(x), bottom + 6, black);
  for (std::size_t i = 1; i < points.size(); ++i) {
    line(g, px(points[i - 1].first), py(points[i - 1].second), px(points[i].first), py(points[i].second), blue, 3);
  }
  for (const auto& [x, y] : points) {
    for (int dy = -4; dy <= 4; ++dy) {
      for (int dx = -4; dx <= 4; ++dx) {
        if (dx * dx + dy * dy <= 16) dot(g, px(x) + dx, py(y) + dy, black);
      }
    }
  }
  return g;
}

void save_line_plot(const std::filesystem::path& path, std::span<const std::pair<double, double>> points) {
  save_raster(path, render_line_plot(points));
}

}  // namespace parcelsense
