#include "parcelsense/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "parcelsense/csv.hpp"
#include "parcelsense/errors.hpp"

namespace parcelsense {

void SamplerConfig::validate() const {
  if (w_min < 1) throw ConfigError("w_min must be >= 1");
  if (attempts < 1) throw ConfigError("attempts must be >= 1");
  if (!(membership_threshold > 0.0 && membership_threshold <= 1.0)) {
    throw ConfigError("membership_threshold must lie in (0, 1]");
  }
}

SeedPoint draw_seed(const BoundingBox& bbox, Rng& rng) {
  std::uniform_int_distribution<int> xs(bbox.x_min, bbox.x_max);
  std::uniform_int_distribution<int> ys(bbox.y_min, bbox.y_max);
  const int x = xs(rng);
  const int y = ys(rng);
  return {x, y};
}

int window_width(const BoundingBox& bbox, SeedPoint seed, int w_min, Rng& rng) {
  const int l = std::min(bbox.x_max - seed.x, bbox.y_max - seed.y);
  if (l < w_min) return w_min;
  return std::uniform_int_distribution<int>(w_min, l)(rng);
}

namespace {

bool inside_map(int map_width, int map_height, const SampleWindow& w) {
  return w.w >= 1 && w.x >= 0 && w.y >= 0 && w.x + w.w <= map_width && w.y + w.w <= map_height;
}

bool exceeds(std::size_t members, int w, double threshold) {
  const double area = static_cast<double>(w) * static_cast<double>(w);
  return static_cast<double>(members) / area > threshold;
}

}  // namespace

bool is_valid_window(const ParcelMap& map, ParcelId parcel_id, const SampleWindow& window,
                     double threshold) {
  if (!inside_map(map.width, map.height, window)) return false;
  std::size_t members = 0;
  for (int y = window.y; y < window.y + window.w; ++y) {
    for (int x = window.x; x < window.x + window.w; ++x) {
      if (map.at(x, y) == parcel_id) ++members;
    }
  }
  return exceeds(members, window.w, threshold);
}

ParcelMembership::ParcelMembership(const ParcelMap& map, const ParcelRecord& record)
    : bbox_(record.bbox),
      map_width_(map.width),
      map_height_(map.height),
      stride_(record.bbox.width() + 1),
      table_(static_cast<std::size_t>(record.bbox.width() + 1) * (record.bbox.height() + 1), 0) {
  const int bw = bbox_.width();
  const int bh = bbox_.height();
  for (int j = 0; j < bh; ++j) {
    std::uint32_t row = 0;
    for (int i = 0; i < bw; ++i) {
      row += map.at(bbox_.x_min + i, bbox_.y_min + j) == record.id ? 1U : 0U;
      table_[static_cast<std::size_t>(j + 1) * stride_ + (i + 1)] =
          table_[static_cast<std::size_t>(j) * stride_ + (i + 1)] + row;
    }
  }
}

std::size_t ParcelMembership::count(const SampleWindow& window) const {
  // Member pixels only exist inside the bbox, so clip to it.
  const int x0 = std::max(window.x, bbox_.x_min) - bbox_.x_min;
  const int y0 = std::max(window.y, bbox_.y_min) - bbox_.y_min;
  const int x1 = std::min(window.x + window.w - 1, bbox_.x_max) - bbox_.x_min + 1;
  const int y1 = std::min(window.y + window.w - 1, bbox_.y_max) - bbox_.y_min + 1;
  if (x0 >= x1 || y0 >= y1) return 0;
  auto at = [&](int i, int j) { return table_[static_cast<std::size_t>(j) * stride_ + i]; };
  return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
}

bool ParcelMembership::is_valid(const SampleWindow& window, double threshold) const {
  if (!inside_map(map_width_, map_height_, window)) return false;
  return exceeds(count(window), window.w, threshold);
}

std::vector<SampleWindow> sample_windows(const ParcelMap& map, const ParcelRecord& record,
                                         const SamplerConfig& config) {
  config.validate();
  const ParcelMembership membership(map, record);
  Rng rng = make_rng(config.seed, record.id);
  std::vector<SampleWindow> windows;
  for (int attempt = 0; attempt < config.attempts; ++attempt) {
    const SeedPoint seed = draw_seed(record.bbox, rng);
    const int w = window_width(record.bbox, seed, config.w_min, rng);
    const SampleWindow window{seed.x, seed.y, w};
    if (membership.is_valid(window, config.membership_threshold)) windows.push_back(window);
  }
  return windows;
}

PatchSample crop(const RasterGrid& raster, ParcelId parcel_id, const PixelRect& rect) {
  if (rect.width < 1 || rect.height < 1 || rect.x < 0 || rect.y < 0 ||
      rect.x + rect.width > raster.width || rect.y + rect.height > raster.height) {
    throw ConfigError("crop rectangle outside raster");
  }
  PatchSample patch{parcel_id, rect, RasterGrid(rect.width, rect.height, raster.bands)};
  const std::size_t row_bytes = static_cast<std::size_t>(rect.width) * raster.bands;
  for (int y = 0; y < rect.height; ++y) {
    const auto* src = &raster.pixels[(static_cast<std::size_t>(rect.y + y) * raster.width + rect.x) *
                                     raster.bands];
    std::copy_n(src, row_bytes, &patch.pixels.pixels[static_cast<std::size_t>(y) * row_bytes]);
  }
  return patch;
}

std::vector<PatchSample> sample_parcel(const RasterGrid& raster, const ParcelMap& map,
                                       const ParcelRecord& record, const SamplerConfig& config) {
  std::vector<PatchSample> samples;
  for (const SampleWindow& w : sample_windows(map, record, config)) {
    samples.push_back(crop(raster, record.id, w.rect()));
  }
  return samples;
}

PatchSample rect_patch(const RasterGrid& raster, const ParcelRecord& record) {
  const BoundingBox& b = record.bbox;
  return crop(raster, record.id, {b.x_min, b.y_min, b.width(), b.height()});
}

std::vector<PatchSample> multiscale_crops(const RasterGrid& image, int count, double scale_lo,
                                          double scale_hi, Rng& rng) {
  if (!(scale_lo > 0.0) || scale_hi > 1.0 || scale_lo > scale_hi) {
    throw ConfigError("crop scales must satisfy 0 < scale_lo <= scale_hi <= 1");
  }
  if (image.width < 2 || image.height < 2) {
    throw ConfigError("multiscale crops need an image of at least 2x2");
  }
  const int short_side = std::min(image.width, image.height);
  std::uniform_real_distribution<double> scale(scale_lo, scale_hi);
  std::vector<PatchSample> crops;
  crops.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    const double s = scale_lo == scale_hi ? scale_lo : scale(rng);
    const int side = std::clamp(static_cast<int>(std::lround(s * short_side)), 1, short_side);
    const int x = std::uniform_int_distribution<int>(0, image.width - side)(rng);
    const int y = std::uniform_int_distribution<int>(0, image.height - side)(rng);
    crops.push_back(crop(image, 0, {x, y, side, side}));
  }
  return crops;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestRow> rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "parcel_id,x,y,w,path\n";
  for (const ManifestRow& r : rows) {
    out << r.parcel_id << ',' << r.window.x << ',' << r.window.y << ',' << r.window.w << ','
        << r.path << '\n';
  }
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  if (table.header != std::vector<std::string>{"parcel_id", "x", "y", "w", "path"}) {
    throw DataError("'" + path.string() + "': expected header 'parcel_id,x,y,w,path'");
  }
  std::vector<ManifestRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    ManifestRow row;
    row.parcel_id = csv::parse_integer<ParcelId>(f[0], path, i + 2);
    row.window.x = csv::parse_integer<int>(f[1], path, i + 2);
    row.window.y = csv::parse_integer<int>(f[2], path, i + 2);
    row.window.w = csv::parse_integer<int>(f[3], path, i + 2);
    row.path = f[4];
    if (row.window.w < 1) throw DataError("'" + path.string() + "': window width must be >= 1");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ManifestRow> export_patches(const std::filesystem::path& dir,
                                        std::span<const PatchSample> samples) {
  std::filesystem::create_directories(dir);
  std::vector<ManifestRow> rows;
  rows.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PatchSample& s = samples[i];
    std::ostringstream name;
    name << "p" << s.parcel_id << "_" << i << ".png";
    save_raster(dir / name.str(), s.pixels);
    rows.push_back({s.parcel_id, {s.extent.x, s.extent.y, s.extent.width}, name.str()});
  }
  write_manifest(dir / "manifest.csv", rows);
  return rows;
}

}  // namespace parcelsense
