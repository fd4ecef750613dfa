#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "parcelsense/geodata.hpp"
#include "parcelsense/rng.hpp"

namespace parcelsense {

/// Axis-aligned pixel rectangle, top-left origin.
struct PixelRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Square sampling window anchored at its top-left pixel.
struct SampleWindow {
  int x = 0;
  int y = 0;
  int w = 0;

  PixelRect rect() const { return {x, y, w, w}; }
  friend bool operator==(const SampleWindow&, const SampleWindow&) = default;
};

struct SamplerConfig {
  int w_min = 20;
  int attempts = 300;
  /// A window is valid when strictly more than this fraction of its pixels
  /// belong to the sampled parcel.
  double membership_threshold = 0.80;
  std::uint64_t seed = 0;

  /// Throws ConfigError when a field is outside its range.
  void validate() const;
};

/// A crop of the raster attributed to one parcel (parcel_id 0 for crops not
/// tied to a parcel, e.g. augmentation crops).
struct PatchSample {
  ParcelId parcel_id = 0;
  PixelRect extent;
  RasterGrid pixels;
};

struct SeedPoint {
  int x = 0;
  int y = 0;
  friend bool operator==(const SeedPoint&, const SeedPoint&) = default;
};

/// Uniform integer seed inside the inclusive bbox.
SeedPoint draw_seed(const BoundingBox& bbox, Rng& rng);

/// l = min(x_max - x_seed, y_max - y_seed); w_min when l < w_min, otherwise
/// uniform in [w_min, l].
int window_width(const BoundingBox& bbox, SeedPoint seed, int w_min, Rng& rng);

/// Direct pixel count. Windows that leave the map are invalid.
bool is_valid_window(const ParcelMap& map, ParcelId parcel_id, const SampleWindow& window,
                     double threshold);

/// Summed-area table of one parcel's mask over its bounding box; counts
/// member pixels inside any window in O(1).
class ParcelMembership {
 public:
  ParcelMembership(const ParcelMap& map, const ParcelRecord& record);

  std::size_t count(const SampleWindow& window) const;
  bool is_valid(const SampleWindow& window, double threshold) const;

 private:
  BoundingBox bbox_;
  int map_width_;
  int map_height_;
  int stride_;
  std::vector<std::uint32_t> table_;  // (bw + 1) x (bh + 1)
};

/// The valid windows out of `config.attempts` draws. Draws come from a
/// stream derived from (config.seed, record.id), so parcels can be sampled
/// in any order or in parallel.
std::vector<SampleWindow> sample_windows(const ParcelMap& map, const ParcelRecord& record,
                                         const SamplerConfig& config);

/// sample_windows with the window pixels copied out of the raster.
std::vector<PatchSample> sample_parcel(const RasterGrid& raster, const ParcelMap& map,
                                       const ParcelRecord& record, const SamplerConfig& config);

/// Copies `rect` (which must lie inside the raster) out of `raster`.
PatchSample crop(const RasterGrid& raster, ParcelId parcel_id, const PixelRect& rect);

/// The parcel's whole bounding box, including any non-parcel pixels.
PatchSample rect_patch(const RasterGrid& raster, const ParcelRecord& record);

/// `count` square crops with side round(s * min(width, height)), s uniform in
/// [scale_lo, scale_hi], placed uniformly among in-bounds positions.
std::vector<PatchSample> multiscale_crops(const RasterGrid& image, int count, double scale_lo,
                                          double scale_hi, Rng& rng);

struct ManifestRow {
  ParcelId parcel_id = 0;
  SampleWindow window;
  std::string path;  // empty when pixels were not exported
};

/// Writes `parcel_id,x,y,w,path`.
void write_manifest(const std::filesystem::path& path, std::span<const ManifestRow> rows);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

/// One PNG per sample under `dir` plus `dir/manifest.csv`.
std::vector<ManifestRow> export_patches(const std::filesystem::path& dir,
                                        std::span<const PatchSample> samples);

}  // namespace parcelsense
