#include "parcelsense/synthcity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "parcelsense/errors.hpp"
#include "png_io.hpp"

namespace parcelsense {

bool ParcelShape::contains(int x, int y) const {
  if (x < rect.x || y < rect.y || x >= rect.x + rect.width || y >= rect.y + rect.height) return false;
  if (kind != ShapeKind::LShape) return true;
  const bool left = corner == Corner::TopLeft || corner == Corner::BottomLeft;
  const bool top = corner == Corner::TopLeft || corner == Corner::TopRight;
  const bool in_x = left ? x < rect.x + notch_width : x >= rect.x + rect.width - notch_width;
  const bool in_y = top ? y < rect.y + notch_height : y >= rect.y + rect.height - notch_height;
  return !(in_x && in_y);
}

namespace {

void validate(const SceneSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw ConfigError("scene dimensions must be positive");
  if (spec.words.empty() || spec.words.size() > 65535) throw ConfigError("scene needs 1..65535 words");
  if (spec.background_word >= spec.words.size()) throw ConfigError("background word out of range");
  if (spec.cell_size < 1) throw ConfigError("cell_size must be >= 1");
  if (spec.noise < 0 || spec.noise > 127) throw ConfigError("noise must lie in [0, 127]");
  if (spec.speckle_density < 0.0 || spec.speckle_density > 1.0) {
    throw ConfigError("speckle_density must lie in [0, 1]");
  }
  if (spec.speckle_min < 1 || spec.speckle_max < spec.speckle_min) throw ConfigError("invalid speckle sizes");
  std::set<ParcelId> ids;
  for (const auto& p : spec.parcels) {
    if (p.id == 0 || p.id > 65535) throw ConfigError("parcel ids must lie in [1, 65535]");
    if (!ids.insert(p.id).second) throw ConfigError("duplicate parcel id " + std::to_string(p.id));
    const auto& r = p.rect;
    if (r.width < 1 || r.height < 1 || r.x < 0 || r.y < 0 || r.x + r.width > spec.width ||
        r.y + r.height > spec.height) {
      throw ConfigError("parcel " + std::to_string(p.id) + " lies outside the scene");
    }
    if (p.kind == ShapeKind::LShape &&
        (p.notch_width < 1 || p.notch_height < 1 || p.notch_width >= r.width || p.notch_height >= r.height)) {
      throw ConfigError("parcel " + std::to_string(p.id) + " has an invalid notch");
    }
  }
  for (LandUseLabel l : kAllLandUse) {
    const auto& t = spec.textures[index_of(l)];
    double sum = 0.0;
    for (const auto& [w, weight] : t.mixture) {
      if (w >= spec.words.size()) throw ConfigError("texture of class " + to_string(l) + " names an unknown word");
      if (weight < 0.0) throw ConfigError("negative mixture weight");
      sum += weight;
    }
    if (!t.mixture.empty() && std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("mixture weights of class " + to_string(l) + " do not sum to 1");
    }
    for (std::size_t w : t.confusers) {
      if (w >= spec.words.size()) throw ConfigError("confuser word out of range");
    }
  }
  for (const auto& p : spec.parcels) {
    if (spec.textures[index_of(p.label)].mixture.empty()) {
      throw ConfigError("class " + to_string(p.label) + " has no texture");
    }
  }
}

/// Visits cells in random order and gives each the mixture word furthest
/// below its target area, so painted areas track the weights.
std::vector<std::size_t> assign_cells(const std::vector<std::pair<std::size_t, double>>& mixture,
                                      const std::vector<std::size_t>& areas, Rng& rng) {
  const double total = static_cast<double>(std::accumulate(areas.begin(), areas.end(), std::size_t{0}));
  std::vector<std::size_t> order(areas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> assigned(mixture.size(), 0.0);
  std::vector<std::size_t> words(areas.size());
  for (std::size_t c : order) {
    std::size_t best = 0;
    double best_deficit = -1e300;
    for (std::size_t k = 0; k < mixture.size(); ++k) {
      const double deficit = mixture[k].second * total - assigned[k];
      if (deficit > best_deficit) {
        best = k;
        best_deficit = deficit;
      }
    }
    assigned[best] += static_cast<double>(areas[c]);
    words[c] = mixture[best].first;
  }
  return words;
}

std::uint8_t jitter(std::uint8_t base, int noise, Rng& rng) {
  if (noise == 0) return base;
  std::uniform_int_distribution<int> d(-noise, noise);
  return static_cast<std::uint8_t>(std::clamp(base + d(rng), 0, 255));
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  validate(spec);
  Scene scene;
  scene.parcels = ParcelMap(spec.width, spec.height);
  const std::size_t npix = static_cast<std::size_t>(spec.width) * spec.height;
  scene.word_map.assign(npix, static_cast<std::uint16_t>(spec.background_word));
  for (const auto& w : spec.words) {
    scene.vocabulary.push_back(w.name);
    scene.word_classes.push_back(w.land_use);
  }

  for (const auto& p : spec.parcels) {
    for (int y = p.rect.y; y < p.rect.y + p.rect.height; ++y) {
      for (int x = p.rect.x; x < p.rect.x + p.rect.width; ++x) {
        if (!p.contains(x, y)) continue;
        auto& id = scene.parcels.at(x, y);
        if (id != 0) {
          throw ConfigError("parcels " + std::to_string(id) + " and " + std::to_string(p.id) + " overlap");
        }
        id = static_cast<std::uint16_t>(p.id);
      }
    }
    scene.labels[p.id] = p.label;
  }

  Rng rng(spec.seed);
  const int cs = spec.cell_size;
  for (const auto& p : spec.parcels) {
    const auto& tex = spec.textures[index_of(p.label)];
    // Cells of the parcel's own grid with their parcel pixel counts.
    std::vector<std::pair<int, int>> cells;
    std::vector<std::size_t> areas;
    for (int cy = p.rect.y; cy < p.rect.y + p.rect.height; cy += cs) {
      for (int cx = p.rect.x; cx < p.rect.x + p.rect.width; cx += cs) {
        std::size_t area = 0;
        for (int y = cy; y < std::min(cy + cs, p.rect.y + p.rect.height); ++y) {
          for (int x = cx; x < std::min(cx + cs, p.rect.x + p.rect.width); ++x) area += p.contains(x, y);
        }
        if (area > 0) {
          cells.emplace_back(cx, cy);
          areas.push_back(area);
        }
      }
    }
    const auto cell_words = assign_cells(tex.mixture, areas, rng);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto [cx, cy] = cells[c];
      for (int y = cy; y < std::min(cy + cs, p.rect.y + p.rect.height); ++y) {
        for (int x = cx; x < std::min(cx + cs, p.rect.x + p.rect.width); ++x) {
          if (p.contains(x, y)) scene.word_map[static_cast<std::size_t>(y) * spec.width + x] = static_cast<std::uint16_t>(cell_words[c]);
        }
      }
    }

    if (spec.speckle_density > 0.0 && !tex.confusers.empty()) {
      // Confuser objects replace part of the dominant word only, so they win
      // a window only where they cluster locally.
      const auto dominant = static_cast<std::uint16_t>(tex.mixture.front().first);
      std::size_t host = 0;
      for (int y = p.rect.y; y < p.rect.y + p.rect.height; ++y) {
        for (int x = p.rect.x; x < p.rect.x + p.rect.width; ++x) {
          host += p.contains(x, y) && scene.word_map[static_cast<std::size_t>(y) * spec.width + x] == dominant;
        }
      }
      std::uniform_real_distribution<double> density(0.0, spec.speckle_density);
      std::uniform_int_distribution<std::size_t> pick_word(0, tex.confusers.size() - 1);
      std::uniform_int_distribution<int> side(spec.speckle_min, spec.speckle_max);
      std::uniform_int_distribution<int> px(p.rect.x, p.rect.x + p.rect.width - 1);
      std::uniform_int_distribution<int> py(p.rect.y, p.rect.y + p.rect.height - 1);
      const auto word = static_cast<std::uint16_t>(tex.confusers[pick_word(rng)]);
      const auto target = static_cast<std::size_t>(density(rng) * static_cast<double>(host));
      std::size_t converted = 0;
      for (std::size_t tries = 0; converted < target && tries < 4 * host + 16; ++tries) {
        const int s = side(rng);
        const int x0 = px(rng);
        const int y0 = py(rng);
        for (int y = y0; y < std::min(y0 + s, p.rect.y + p.rect.height); ++y) {
          for (int x = x0; x < std::min(x0 + s, p.rect.x + p.rect.width); ++x) {
            auto& w = scene.word_map[static_cast<std::size_t>(y) * spec.width + x];
            if (p.contains(x, y) && w == dominant) {
              w = word;
              ++converted;
            }
          }
        }
      }
    }
  }

  scene.raster = RasterGrid(spec.width, spec.height, 3);
  for (std::size_t i = 0; i < npix; ++i) {
    const auto& color = spec.words[scene.word_map[i]].color;
    for (int b = 0; b < 3; ++b) scene.raster.pixels[i * 3 + b] = jitter(color[b], spec.noise, rng);
  }

  std::map<ParcelId, std::vector<std::size_t>> tally;
  for (const auto& p : spec.parcels) tally[p.id].assign(spec.words.size(), 0);
  for (std::size_t i = 0; i < npix; ++i) {
    if (const auto id = scene.parcels.ids[i]; id != 0) ++tally[id][scene.word_map[i]];
  }
  for (const auto& [id, counts] : tally) {
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    auto& mix = scene.mixtures[id];
    for (std::size_t c : counts) mix.push_back(static_cast<double>(c) / total);
  }
  return scene;
}

std::vector<WordStyle> benchmark_words() {
  using L = LandUseLabel;
  return {
      {"road", {128, 128, 128}, std::nullopt},
      {"buildings", {200, 50, 50}, L::C},
      {"parking_lot", {235, 235, 80}, L::C},
      {"tennis_court", {50, 60, 210}, L::M},
      {"industrial", {130, 70, 10}, L::I},
      {"storage_tanks", {245, 245, 245}, L::I},
      {"forest", {15, 95, 30}, L::G},
      {"grass", {120, 225, 95}, L::G},
      {"water", {30, 170, 230}, L::P},
      {"dense_residential", {150, 30, 150}, L::R},
      {"medium_residential", {235, 140, 205}, L::R},
      {"mobile_home_park", {245, 150, 30}, L::U},
      {"farmland", {175, 160, 105}, L::U},
  };
}

std::array<ClassTexture, kLandUseCount> benchmark_textures() {
  enum : std::size_t {
    road, buildings, parking_lot, tennis_court, industrial, storage_tanks, forest, grass, water,
    dense_residential, medium_residential, mobile_home_park, farmland
  };
  std::array<ClassTexture, kLandUseCount> t;
  // M and C share their dominant word, as do G and P; the secondary words
  // tell them apart.
  t[index_of(LandUseLabel::M)] = {{{buildings, 0.60}, {tennis_court, 0.20}, {forest, 0.20}}, {parking_lot}};
  t[index_of(LandUseLabel::I)] = {{{industrial, 0.55}, {storage_tanks, 0.30}, {parking_lot, 0.15}},
                                  {dense_residential, farmland}};
  t[index_of(LandUseLabel::G)] = {{{forest, 0.60}, {grass, 0.40}}, {water}};
  t[index_of(LandUseLabel::C)] = {{{buildings, 0.60}, {parking_lot, 0.25}, {medium_residential, 0.15}},
                                  {tennis_court}};
  t[index_of(LandUseLabel::R)] = {{{dense_residential, 0.55}, {medium_residential, 0.30}, {forest, 0.15}},
                                  {mobile_home_park, industrial}};
  t[index_of(LandUseLabel::P)] = {{{forest, 0.60}, {water, 0.20}, {grass, 0.20}}, {grass}};
  t[index_of(LandUseLabel::U)] = {{{mobile_home_park, 0.55}, {farmland, 0.25}, {dense_residential, 0.20}},
                                  {medium_residential, storage_tanks}};
  return t;
}

namespace {

constexpr int kPitch = 128;
constexpr int kRoad = 6;
constexpr int kBlock = kPitch - kRoad;

int group_of(LandUseLabel l) {
  switch (l) {
    case LandUseLabel::M:
    case LandUseLabel::C:
      return 0;
    case LandUseLabel::G:
    case LandUseLabel::P:
      return 1;
    default:
      return 2 + static_cast<int>(index_of(l));
  }
}

/// Cuts [0, length) into `parts` pieces with jittered boundaries.
std::vector<std::pair<int, int>> cut(int length, int parts, double jitter, Rng& rng) {
  std::vector<int> edges{0};
  std::uniform_real_distribution<double> j(-jitter, jitter);
  for (int k = 1; k < parts; ++k) {
    edges.push_back(static_cast<int>(std::lround(length * (k + j(rng)) / parts)));
  }
  edges.push_back(length);
  std::vector<std::pair<int, int>> out;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) out.emplace_back(edges[k], edges[k + 1] - edges[k]);
  return out;
}

void add_strips(std::vector<ParcelShape>& shapes, int bx, int by, int parts, double jitter, bool vertical,
                ShapeKind kind, Rng& rng) {
  for (auto [offset, size] : cut(kBlock, parts, jitter, rng)) {
    ParcelShape s;
    s.kind = kind;
    s.rect = vertical ? PixelRect{bx + offset, by, size, kBlock} : PixelRect{bx, by + offset, kBlock, size};
    shapes.push_back(s);
  }
}

void add_l_pair(std::vector<ParcelShape>& shapes, int bx, int by, int notch_lo, int notch_hi, Rng& rng) {
  std::uniform_int_distribution<int> notch(notch_lo, notch_hi);
  std::uniform_int_distribution<int> corner(0, 3);
  ParcelShape l;
  l.kind = ShapeKind::LShape;
  l.rect = {bx, by, kBlock, kBlock};
  l.notch_width = notch(rng);
  l.notch_height = notch(rng);
  l.corner = static_cast<Corner>(corner(rng));
  ParcelShape fill;
  const bool left = l.corner == Corner::TopLeft || l.corner == Corner::BottomLeft;
  const bool top = l.corner == Corner::TopLeft || l.corner == Corner::TopRight;
  fill.rect = {left ? bx : bx + kBlock - l.notch_width, top ? by : by + kBlock - l.notch_height, l.notch_width,
               l.notch_height};
  shapes.push_back(l);
  shapes.push_back(fill);
}

/// Balanced labels: every class appears floor(n/7) or ceil(n/7) times.
/// L-shapes get a label whose dominant word differs from the parcel filling
/// their notch.
void assign_labels(std::vector<ParcelShape>& shapes, Rng& rng) {
  std::vector<LandUseLabel> pool;
  for (std::size_t i = 0; i < shapes.size(); ++i) pool.push_back(kAllLandUse[i % kLandUseCount]);
  std::shuffle(pool.begin(), pool.end(), rng);
  auto take = [&](auto&& accept) {
    auto it = std::find_if(pool.begin(), pool.end(), accept);
    if (it == pool.end()) it = pool.begin();
    const LandUseLabel l = *it;
    pool.erase(it);
    return l;
  };
  std::vector<bool> done(shapes.size(), false);
  for (std::size_t i = 0; i + 1 < shapes.size(); ++i) {
    if (shapes[i].kind != ShapeKind::LShape) continue;
    shapes[i].label = take([](LandUseLabel) { return true; });
    const int g = group_of(shapes[i].label);
    shapes[i + 1].label = take([g](LandUseLabel l) { return group_of(l) != g; });
    done[i] = done[i + 1] = true;
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (!done[i]) shapes[i].label = take([](LandUseLabel) { return true; });
  }
}

SceneSpec benchmark_frame(std::uint64_t seed) {
  SceneSpec spec;
  spec.width = 1024;
  spec.height = 1024;
  spec.words = benchmark_words();
  spec.background_word = 0;
  spec.textures = benchmark_textures();
  spec.seed = seed;
  return spec;
}

void finish(SceneSpec& spec, std::vector<ParcelShape> shapes, Rng& rng) {
  assign_labels(shapes, rng);
  for (std::size_t i = 0; i < shapes.size(); ++i) shapes[i].id = static_cast<ParcelId>(i + 1);
  spec.parcels = std::move(shapes);
}

}  // namespace

SceneSpec default_benchmark(std::uint64_t seed) {
  SceneSpec spec = benchmark_frame(seed);
  spec.speckle_density = 0.25;
  Rng rng(derive_seed(seed, 0xB10C));
  enum Kind { Single, Split2, Split3, Split4, LPair, Thin };
  std::vector<Kind> kinds;
  kinds.insert(kinds.end(), 6, Single);
  kinds.insert(kinds.end(), 12, Split2);
  kinds.insert(kinds.end(), 20, Split3);
  kinds.insert(kinds.end(), 4, Split4);
  kinds.insert(kinds.end(), 20, LPair);
  kinds.insert(kinds.end(), 2, Thin);
  std::shuffle(kinds.begin(), kinds.end(), rng);
  std::vector<ParcelShape> shapes;
  std::bernoulli_distribution coin(0.5);
  for (int b = 0; b < 64; ++b) {
    const int bx = (b % 8) * kPitch + kRoad / 2;
    const int by = (b / 8) * kPitch + kRoad / 2;
    switch (kinds[static_cast<std::size_t>(b)]) {
      case Single:
        add_strips(shapes, bx, by, 1, 0.0, true, ShapeKind::Rectangle, rng);
        break;
      case Split2:
        add_strips(shapes, bx, by, 2, 0.2, coin(rng), ShapeKind::Rectangle, rng);
        break;
      case Split3:
        add_strips(shapes, bx, by, 3, 0.15, coin(rng), ShapeKind::Rectangle, rng);
        break;
      case Split4: {
        const int h = kBlock / 2;
        shapes.push_back({0, ShapeKind::Rectangle, {bx, by, h, h}});
        shapes.push_back({0, ShapeKind::Rectangle, {bx + h, by, kBlock - h, h}});
        shapes.push_back({0, ShapeKind::Rectangle, {bx, by + h, h, kBlock - h}});
        shapes.push_back({0, ShapeKind::Rectangle, {bx + h, by + h, kBlock - h, kBlock - h}});
        break;
      }
      case LPair:
        add_l_pair(shapes, bx, by, 92, 100, rng);
        break;
      case Thin: {
        ParcelShape strip;
        strip.kind = ShapeKind::ThinStrip;
        strip.rect = {bx, by, 5, kBlock};
        shapes.push_back(strip);
        shapes.push_back({0, ShapeKind::Rectangle, {bx + 5, by, kBlock - 5, kBlock}});
        break;
      }
    }
  }
  finish(spec, std::move(shapes), rng);
  return spec;
}

SceneSpec thin_parcel_benchmark(std::uint64_t seed) {
  SceneSpec spec = benchmark_frame(seed);
  spec.speckle_density = 0.4;
  spec.speckle_min = 10;
  spec.speckle_max = 14;
  Rng rng(derive_seed(seed, 0x7412));
  std::vector<ParcelShape> shapes;
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> parts(4, 6);
  for (int b = 0; b < 64; ++b) {
    const int bx = (b % 8) * kPitch + kRoad / 2;
    const int by = (b / 8) * kPitch + kRoad / 2;
    add_strips(shapes, bx, by, parts(rng), 0.08, coin(rng), ShapeKind::ThinStrip, rng);
  }
  finish(spec, std::move(shapes), rng);
  return spec;
}

OracleLabeler::OracleLabeler(std::vector<std::string> vocabulary, int width, int height,
                             std::span<const std::uint16_t> word_map)
    : vocabulary_(std::move(vocabulary)), width_(width), height_(height) {
  if (word_map.size() != static_cast<std::size_t>(width) * height) {
    throw ConfigError("word map size does not match scene dimensions");
  }
  const std::size_t stride = static_cast<std::size_t>(width) + 1;
  const std::size_t plane = stride * (static_cast<std::size_t>(height) + 1);
  tables_.assign(plane * vocabulary_.size(), 0);
  for (std::size_t w = 0; w < vocabulary_.size(); ++w) {
    std::uint32_t* t = tables_.data() + w * plane;
    for (int y = 0; y < height; ++y) {
      std::uint32_t run = 0;
      for (int x = 0; x < width; ++x) {
        const std::uint16_t v = word_map[static_cast<std::size_t>(y) * width + x];
        if (v >= vocabulary_.size()) throw ConfigError("word map holds an index outside the vocabulary");
        run += v == w ? 1U : 0U;
        t[(y + 1) * stride + x + 1] = t[y * stride + x + 1] + run;
      }
    }
  }
}

OracleLabeler::OracleLabeler(const Scene& scene)
    : OracleLabeler(scene.vocabulary, scene.raster.width, scene.raster.height, scene.word_map) {}

std::size_t OracleLabeler::label_rect(const PixelRect& r) const {
  if (r.width < 1 || r.height < 1 || r.x < 0 || r.y < 0 || r.x + r.width > width_ || r.y + r.height > height_) {
    throw ConfigError("patch extent lies outside the oracle scene");
  }
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  const std::size_t plane = stride * (static_cast<std::size_t>(height_) + 1);
  const std::size_t x0 = r.x, y0 = r.y, x1 = r.x + r.width, y1 = r.y + r.height;
  std::size_t best = 0;
  std::uint32_t best_count = 0;
  for (std::size_t w = 0; w < vocabulary_.size(); ++w) {
    const std::uint32_t* t = tables_.data() + w * plane;
    const std::uint32_t c = t[y1 * stride + x1] - t[y0 * stride + x1] - t[y1 * stride + x0] + t[y0 * stride + x0];
    if (c > best_count) {
      best = w;
      best_count = c;
    }
  }
  return best;
}

std::vector<std::size_t> OracleLabeler::label(std::span<const PatchSample> patches) const {
  std::vector<std::size_t> out;
  out.reserve(patches.size());
  for (const auto& p : patches) out.push_back(label_rect(p.extent));
  return out;
}

RasterGrid word_swatch(const WordStyle& style, int side, int noise, Rng& rng) {
  RasterGrid g(side, side, 3);
  for (std::size_t i = 0; i < g.pixels.size(); i += 3) {
    for (int b = 0; b < 3; ++b) g.pixels[i + b] = jitter(style.color[b], noise, rng);
  }
  return g;
}

void write_scene(const std::filesystem::path& dir, const Scene& scene, int training_patches, std::uint64_t seed,
                 const SceneSpec* spec) {
  std::filesystem::create_directories(dir);
  save_raster(dir / "raster.png", scene.raster);
  save_parcel_map(dir / "parcels.png", scene.parcels);
  save_labels(dir / "labels.csv", scene.labels);
  png::write16_gray(dir / "words.png", scene.raster.width, scene.raster.height, scene.word_map.data());
  {
    std::ofstream out(dir / "vocabulary.txt");
    for (const auto& w : scene.vocabulary) out << w << '\n';
    if (!out) throw DataError("cannot write vocabulary.txt");
  }
  {
    std::ofstream out(dir / "word_map.csv");
    out << "word,land_use\n";
    for (std::size_t w = 0; w < scene.vocabulary.size(); ++w) {
      out << scene.vocabulary[w] << ',' << (scene.word_classes[w] ? to_string(*scene.word_classes[w]) : "") << '\n';
    }
    if (!out) throw DataError("cannot write word_map.csv");
  }
  {
    std::ofstream out(dir / "mixtures.csv");
    out << "parcel_id";
    for (const auto& w : scene.vocabulary) out << ',' << w;
    out << '\n' << std::setprecision(17);
    for (const auto& [id, mix] : scene.mixtures) {
      out << id;
      for (double v : mix) out << ',' << v;
      out << '\n';
    }
    if (!out) throw DataError("cannot write mixtures.csv");
  }
  if (training_patches > 0 && spec != nullptr) {
    Rng rng(derive_seed(seed, 0x5A7C));
    std::uniform_int_distribution<int> side(24, 64);
    for (const auto& style : spec->words) {
      const auto sub = dir / "patches" / style.name;
      std::filesystem::create_directories(sub);
      for (int k = 0; k < training_patches; ++k) {
        std::ostringstream name;
        name << std::setw(4) << std::setfill('0') << k << ".png";
        save_raster(sub / name.str(), word_swatch(style, side(rng), spec->noise, rng));
      }
    }
  }
}

}  // namespace parcelsense
