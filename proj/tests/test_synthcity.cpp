#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "oracles.hpp"
#include "parcelsense/errors.hpp"
#include "parcelsense/pipeline.hpp"
#include "parcelsense/synthcity.hpp"
#include "scenes.hpp"
#include "temp_dir.hpp"

using namespace parcelsense;

namespace {

SceneSpec one_rect(int w, int h, std::vector<std::pair<std::size_t, double>> mixture) {
  SceneSpec s;
  s.width = w;
  s.height = h;
  s.words = {{"a", {200, 10, 10}, LandUseLabel::G}, {"b", {10, 10, 200}, LandUseLabel::R}};
  s.textures[index_of(LandUseLabel::G)].mixture = std::move(mixture);
  s.noise = 0;
  ParcelShape p;
  p.id = 1;
  p.rect = {0, 0, w, h};
  p.label = LandUseLabel::G;
  s.parcels.push_back(p);
  return s;
}

}  // namespace

TEST_CASE("single word full-frame rectangle paints a constant raster") {
  const Scene scene = generate_scene(one_rect(30, 20, {{0, 1.0}}));
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 30; ++x) {
      CHECK(scene.raster.at(x, y, 0) == 200);
      CHECK(scene.raster.at(x, y, 2) == 10);
    }
  }
  CHECK(scene.mixtures.at(1) == std::vector<double>{1.0, 0.0});
}

TEST_CASE("two disjoint rectangles give two ids") {
  SceneSpec s = one_rect(40, 20, {{0, 1.0}});
  s.parcels[0].rect = {0, 0, 10, 10};
  ParcelShape q = s.parcels[0];
  q.id = 2;
  q.rect = {20, 5, 10, 10};
  s.parcels.push_back(q);
  const Scene scene = generate_scene(s);
  std::set<std::uint16_t> ids(scene.parcels.ids.begin(), scene.parcels.ids.end());
  ids.erase(0);
  CHECK(ids == std::set<std::uint16_t>{1, 2});

  q.rect = {5, 5, 10, 10};
  s.parcels[1] = q;
  CHECK_THROWS_AS(generate_scene(s), ConfigError);
  q.rect = {35, 5, 10, 10};
  s.parcels[1] = q;
  CHECK_THROWS_AS(generate_scene(s), ConfigError);
}

TEST_CASE("mixture frequencies under a perfect labeler") {
  SceneSpec s = one_rect(480, 480, {{0, 0.7}, {1, 0.3}});
  s.seed = 4;
  const Scene scene = generate_scene(s);
  const auto& mix = scene.mixtures.at(1);
  CHECK(std::abs(mix[0] - 0.7) < 0.01);

  const OracleLabeler labeler(scene);
  Rng rng(5);
  std::uniform_int_distribution<int> pos(0, 479);
  std::vector<PatchSample> patches;
  const int n = 20000;
  for (int i = 0; i < n; ++i) patches.push_back(crop(scene.raster, 1, {pos(rng), pos(rng), 1, 1}));
  const auto words = labeler.label(patches);
  const double freq = static_cast<double>(std::count(words.begin(), words.end(), 0U)) / n;
  const double sigma = std::sqrt(mix[0] * (1 - mix[0]) / n);
  CHECK(std::abs(freq - mix[0]) <= 3 * sigma);
}

TEST_CASE("mixtures equal the painted composition exactly") {
  const SceneSpec spec = default_benchmark(3);
  const Scene scene = generate_scene(spec);
  std::map<ParcelId, std::vector<std::size_t>> counts;
  for (std::size_t i = 0; i < scene.word_map.size(); ++i) {
    const ParcelId id = scene.parcels.ids[i];
    if (id == 0) continue;
    auto& c = counts[id];
    c.resize(scene.vocabulary.size());
    ++c[scene.word_map[i]];
  }
  for (const auto& [id, c] : counts) {
    std::size_t total = 0;
    for (auto v : c) total += v;
    const auto& mix = scene.mixtures.at(id);
    for (std::size_t w = 0; w < c.size(); ++w) CHECK(mix[w] == static_cast<double>(c[w]) / total);
  }
}

TEST_CASE("default benchmark contract") {
  const SceneSpec spec = default_benchmark(1);
  CHECK(spec.width == 1024);
  CHECK(spec.height == 1024);
  const Scene scene = generate_scene(spec);
  std::map<LandUseLabel, int> per_label;
  for (const auto& [id, l] : scene.labels) ++per_label[l];
  CHECK(per_label.size() == 7);
  for (const auto& [l, n] : per_label) CHECK(n >= 20);
  CHECK(scene.labels.size() >= 140);
  bool has_l = false, has_strip = false;
  for (const auto& p : spec.parcels) {
    has_l |= p.kind == ShapeKind::LShape;
    has_strip |= p.kind == ShapeKind::ThinStrip;
  }
  CHECK(has_l);
  CHECK(has_strip);

  const ParcelIndex index = build_parcel_records(scene.parcels);
  int hopeless = 0;
  for (const auto& p : spec.parcels) {
    if (p.kind != ShapeKind::ThinStrip || std::min(p.rect.width, p.rect.height) > 5) continue;
    if (oracle::valid_probability(scene.parcels, static_cast<std::uint16_t>(p.id), 20, 0.8) == 0.0) ++hopeless;
    SamplerConfig cfg;
    CHECK(sample_windows(scene.parcels, *index.find(p.id), cfg).empty());
  }
  CHECK(hopeless >= 1);

  CHECK(generate_scene(default_benchmark(1)).raster == scene.raster);
  CHECK(generate_scene(default_benchmark(2)).raster != scene.raster);
}

TEST_CASE("thin benchmark is made of strips") {
  const SceneSpec spec = thin_parcel_benchmark(1);
  std::size_t strips = 0;
  for (const auto& p : spec.parcels) strips += p.kind == ShapeKind::ThinStrip;
  CHECK(strips * 2 > spec.parcels.size());
  CHECK_NOTHROW(generate_scene(spec));
}

TEST_CASE("oracle labeler examples") {
  SceneSpec s = one_rect(48, 24, {{0, 1.0}});
  s.textures[index_of(LandUseLabel::R)].mixture = {{1, 1.0}};
  s.parcels[0].rect = {0, 0, 24, 24};
  ParcelShape q = s.parcels[0];
  q.id = 2;
  q.rect = {24, 0, 24, 24};
  q.label = LandUseLabel::R;
  s.parcels.push_back(q);
  const Scene scene = generate_scene(s);
  const OracleLabeler labeler(scene);
  CHECK(labeler.label_rect({2, 2, 10, 10}) == 0);
  CHECK(labeler.label_rect({30, 2, 10, 10}) == 1);
  CHECK(labeler.label_rect({20, 0, 10, 10}) == 1);  // 4 columns a, 6 columns b
  CHECK(labeler.label_rect({20, 0, 8, 8}) == 0);    // tie goes to the lower index
  const std::vector<PatchSample> p{crop(scene.raster, 0, {16, 0, 10, 10})};
  CHECK(labeler.label(p) == labeler.label(p));
  CHECK(labeler.label(p)[0] == 0);
}

TEST_CASE("write_scene output loads back") {
  TempDir dir("synth");
  const SceneSpec spec = scenes::solid_tiles(7, 2, 24);
  const Scene scene = generate_scene(spec);
  write_scene(dir.path(), scene, 3, 1, &spec);
  const SceneData loaded = load_scene(dir.path());
  CHECK(loaded.raster == scene.raster);
  CHECK(loaded.parcels == scene.parcels);
  CHECK(loaded.index.records.size() == 14);
  const auto map = load_word_map(dir / "word_map.csv");
  CHECK(map.at("road") == std::nullopt);
  CHECK(map.at("wG") == LandUseLabel::G);
  CHECK(std::filesystem::exists(dir.path() / "patches" / "wR"));
  CHECK(load_parcel_map(dir / "words.png").ids == scene.word_map);
}
