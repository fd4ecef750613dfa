#include "parcelsense/geodata.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>

#include "parcelsense/csv.hpp"
#include "parcelsense/errors.hpp"
#include "png_io.hpp"

namespace parcelsense {

char to_char(LandUseLabel label) {
  static constexpr char kCodes[] = {'M', 'I', 'G', 'C', 'R', 'P', 'U'};
  return kCodes[index_of(label)];
}

std::string to_string(LandUseLabel label) { return std::string(1, to_char(label)); }

std::optional<LandUseLabel> parse_land_use(std::string_view code) {
  if (code.size() != 1) return std::nullopt;
  for (LandUseLabel l : kAllLandUse) {
    if (to_char(l) == code[0]) return l;
  }
  return std::nullopt;
}

RasterGrid::RasterGrid(int w, int h, int b, std::uint8_t fill)
    : width(w), height(h), bands(b),
      pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(b),
             fill) {}

const ParcelRecord* ParcelIndex::find(ParcelId id) const {
  auto it = std::lower_bound(records.begin(), records.end(), id,
                             [](const ParcelRecord& r, ParcelId v) { return r.id < v; });
  return (it != records.end() && it->id == id) ? &*it : nullptr;
}

RasterGrid load_raster(const std::filesystem::path& path) {
  png::Decoded img = png::read(path);
  if (img.bit_depth != 8) {
    throw DataError("unsupported bit depth " + std::to_string(img.bit_depth) + " in '" +
                    path.string() + "' (expected 8)");
  }
  if (img.color != png::ColorKind::Gray && img.color != png::ColorKind::Rgb) {
    throw DataError("unsupported band count in '" + path.string() +
                    "' (expected grayscale or RGB)");
  }
  RasterGrid grid(img.width, img.height, img.channels);
  std::transform(img.samples.begin(), img.samples.end(), grid.pixels.begin(),
                 [](std::uint16_t v) { return static_cast<std::uint8_t>(v); });
  return grid;
}

void save_raster(const std::filesystem::path& path, const RasterGrid& raster) {
  if (raster.bands != 1 && raster.bands != 3) {
    throw DataError("raster must have 1 or 3 bands");
  }
  png::write8(path, raster.width, raster.height, raster.bands, raster.pixels.data());
}

ParcelMap load_parcel_map(const std::filesystem::path& path) {
  png::Decoded img = png::read(path);
  if (img.channels != 1 || img.color != png::ColorKind::Gray) {
    throw DataError("parcel map '" + path.string() + "' must be single-channel");
  }
  if (img.bit_depth != 16) {
    throw DataError("unsupported bit depth " + std::to_string(img.bit_depth) +
                    " in parcel map '" + path.string() + "' (expected 16)");
  }
  ParcelMap map(img.width, img.height);
  map.ids = std::move(img.samples);
  return map;
}

ParcelMap load_parcel_map(const std::filesystem::path& path, const RasterGrid& raster) {
  ParcelMap map = load_parcel_map(path);
  if (map.width != raster.width || map.height != raster.height) {
    throw DataError("dimension mismatch: parcel map is " + std::to_string(map.width) + "x" +
                    std::to_string(map.height) + ", raster is " + std::to_string(raster.width) +
                    "x" + std::to_string(raster.height));
  }
  return map;
}

void save_parcel_map(const std::filesystem::path& path, const ParcelMap& map) {
  png::write16_gray(path, map.width, map.height, map.ids.data());
}

LabelTable load_labels(const std::filesystem::path& path) {
  csv::Table table = csv::read(path);
  if (table.header != std::vector<std::string>{"parcel_id", "label"}) {
    throw DataError("labels '" + path.string() + "': expected header 'parcel_id,label'");
  }
  LabelTable labels;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const ParcelId id = csv::parse_integer<ParcelId>(row[0], path, r + 2);
    if (id == 0 || id > std::numeric_limits<std::uint16_t>::max()) {
      throw DataError("labels '" + path.string() + "' line " + std::to_string(r + 2) +
                      ": parcel id out of range");
    }
    auto label = parse_land_use(row[1]);
    if (!label) {
      throw DataError("labels '" + path.string() + "' line " + std::to_string(r + 2) +
                      ": unknown label code '" + row[1] + "'");
    }
    if (!labels.emplace(id, *label).second) {
      throw DataError("labels '" + path.string() + "': duplicate parcel id " + std::to_string(id));
    }
  }
  return labels;
}

void save_labels(const std::filesystem::path& path, const LabelTable& labels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "parcel_id,label\n";
  for (const auto& [id, label] : labels) out << id << ',' << to_char(label) << '\n';
}

ParcelIndex build_parcel_records(const ParcelMap& map, const LabelTable* labels) {
  // Dense table over the 16-bit id space; pixel_count == 0 marks "unseen".
  std::vector<ParcelRecord> by_id(std::numeric_limits<std::uint16_t>::max() + 1);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const ParcelId id = map.at(x, y);
      if (id == 0) continue;
      ParcelRecord& rec = by_id[id];
      if (rec.pixel_count == 0) {
        rec.id = id;
        rec.bbox = {x, x, y, y};
      } else {
        rec.bbox.x_min = std::min(rec.bbox.x_min, x);
        rec.bbox.x_max = std::max(rec.bbox.x_max, x);
        rec.bbox.y_max = y;  // row-major scan: y never decreases
      }
      ++rec.pixel_count;
    }
  }

  ParcelIndex index;
  for (ParcelRecord& rec : by_id) {
    if (rec.pixel_count == 0) continue;
    if (labels) {
      if (auto it = labels->find(rec.id); it != labels->end()) rec.label = it->second;
    }
    index.records.push_back(rec);
  }
  if (labels) {
    for (const auto& [id, label] : *labels) {
      if (id >= by_id.size() || by_id[id].pixel_count == 0) index.unmatched_label_ids.push_back(id);
    }
  }
  return index;
}

}  // namespace parcelsense
