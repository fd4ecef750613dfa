#pragma once

#include <filesystem>
#include <span>
#include <utility>

#include "parcelsense/geodata.hpp"

namespace parcelsense {

/// Renders (x, y) points as a polyline with markers on a white RGB canvas
/// with axes and tick marks. The y range is [y_lo, y_hi].
RasterGrid render_line_plot(std::span<const std::pair<double, double>> points, int width = 640, int height = 400,
                            double y_lo = 0.0, double y_hi = 1.0);

void save_line_plot(const std::filesystem::path& path, std::span<const std::pair<double, double>> points);

}  // namespace parcelsense
