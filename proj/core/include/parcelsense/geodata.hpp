#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace parcelsense {

/// Parcel-level land-use class. Enumerator order is the canonical class
/// order used for tie-breaking everywhere.
enum class LandUseLabel : std::uint8_t {
  M = 0,  // public management and services
  I,      // industrial
  G,      // green land
  C,      // commercial
  R,      // residential
  P,      // park
  U,      // urban village
};

inline constexpr std::size_t kLandUseCount = 7;
inline constexpr std::array<LandUseLabel, kLandUseCount> kAllLandUse = {
    LandUseLabel::M, LandUseLabel::I, LandUseLabel::G, LandUseLabel::C,
    LandUseLabel::R, LandUseLabel::P, LandUseLabel::U};

char to_char(LandUseLabel label);
std::string to_string(LandUseLabel label);
/// Parses exactly one of "M","I","G","C","R","P","U".
std::optional<LandUseLabel> parse_land_use(std::string_view code);
inline std::size_t index_of(LandUseLabel label) { return static_cast<std::size_t>(label); }

using ParcelId = std::uint32_t;

/// Multi-band 8-bit image, band-interleaved, row-major, origin top-left.
struct RasterGrid {
  int width = 0;
  int height = 0;
  int bands = 0;
  std::vector<std::uint8_t> pixels;

  RasterGrid() = default;
  RasterGrid(int w, int h, int b, std::uint8_t fill = 0);

  std::uint8_t at(int x, int y, int band) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * bands + band];
  }
  std::uint8_t& at(int x, int y, int band) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * bands + band];
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  friend bool operator==(const RasterGrid&, const RasterGrid&) = default;
};

/// Per-pixel parcel ids; 0 is background.
struct ParcelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> ids;

  ParcelMap() = default;
  ParcelMap(int w, int h) : width(w), height(h), ids(static_cast<std::size_t>(w) * h, 0) {}

  std::uint16_t at(int x, int y) const { return ids[static_cast<std::size_t>(y) * width + x]; }
  std::uint16_t& at(int x, int y) { return ids[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const ParcelMap&, const ParcelMap&) = default;
};

/// Inclusive pixel bounds, x = column, y = row.
struct BoundingBox {
  int x_min = 0;
  int x_max = 0;
  int y_min = 0;
  int y_max = 0;

  int width() const { return x_max - x_min + 1; }
  int height() const { return y_max - y_min + 1; }
  bool contains(int x, int y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct ParcelRecord {
  ParcelId id = 0;
  BoundingBox bbox;
  std::size_t pixel_count = 0;
  std::optional<LandUseLabel> label;
};

using LabelTable = std::map<ParcelId, LandUseLabel>;

struct ParcelIndex {
  std::vector<ParcelRecord> records;  // ascending id
  /// Ids present in the label table but absent from the map.
  std::vector<ParcelId> unmatched_label_ids;

  const ParcelRecord* find(ParcelId id) const;
};

RasterGrid load_raster(const std::filesystem::path& path);
void save_raster(const std::filesystem::path& path, const RasterGrid& raster);

/// Reads a single-channel 16-bit PNG; dimensions must match `raster`.
ParcelMap load_parcel_map(const std::filesystem::path& path, const RasterGrid& raster);
ParcelMap load_parcel_map(const std::filesystem::path& path);
void save_parcel_map(const std::filesystem::path& path, const ParcelMap& map);

/// CSV with header `parcel_id,label`.
LabelTable load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, const LabelTable& labels);

ParcelIndex build_parcel_records(const ParcelMap& map, const LabelTable* labels = nullptr);

}  // namespace parcelsense
