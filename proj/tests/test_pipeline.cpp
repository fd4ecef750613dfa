#include <doctest.h>

#include <json.hpp>

#include "parcelsense/errors.hpp"
#include "parcelsense/pipeline.hpp"
#include "parcelsense/synthcity.hpp"
#include "scenes.hpp"
#include "temp_dir.hpp"

using namespace parcelsense;

namespace {

SceneData as_data(const Scene& scene) {
  SceneData d;
  d.raster = scene.raster;
  d.parcels = scene.parcels;
  d.index = build_parcel_records(scene.parcels, &scene.labels);
  return d;
}

PipelineConfig small_config(std::uint64_t seed) {
  PipelineConfig c;
  c.seed = seed;
  c.sampler.attempts = 60;
  c.forest.n_trees = 30;
  return c;
}

}  // namespace

TEST_CASE("solid tiles are classified perfectly by every method") {
  const Scene scene = generate_scene(scenes::solid_tiles(7, 6, 40));
  const SceneData data = as_data(scene);
  const OracleLabeler labeler(scene);
  for (Method m : kAllMethods) {
    const MethodOutcome out = run_pipeline(data, labeler, scene.word_classes, small_config(3), m);
    CHECK(out.report.oa == 1.0);
    CHECK(out.report.kappa == 1.0);
    CHECK(out.test_ids.size() == out.predictions.size());
    CHECK(out.fallback_ids.empty());
  }
}

TEST_CASE("compare with one repetition equals run_pipeline") {
  const Scene scene = generate_scene(default_benchmark(2));
  const SceneData data = as_data(scene);
  const OracleLabeler labeler(scene);
  const PipelineConfig cfg = small_config(11);
  const CompareResult cmp = compare_methods(data, labeler, scene.word_classes, cfg, 1);
  REQUIRE(cmp.methods.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const MethodOutcome single = run_pipeline(data, labeler, scene.word_classes, cfg, kAllMethods[k]);
    CHECK(cmp.methods[k].method == kAllMethods[k]);
    CHECK(cmp.methods[k].oa.at(0) == single.report.oa);
    CHECK(cmp.methods[k].kappa.at(0) == single.report.kappa);
    CHECK(cmp.methods[k].pooled.counts == single.matrix.counts);
  }
}

TEST_CASE("compare summaries, ordering and thread independence") {
  const Scene scene = generate_scene(default_benchmark(1));
  const SceneData data = as_data(scene);
  const OracleLabeler labeler(scene);
  PipelineConfig cfg = small_config(5);
  const CompareResult a = compare_methods(data, labeler, scene.word_classes, cfg, 3);
  CHECK(a.repetitions == 3);
  for (const auto& s : a.methods) {
    CHECK(s.oa.size() == 3);
    CHECK(s.min_oa <= s.mean_oa);
    CHECK(s.mean_oa <= s.max_oa);
  }
  CHECK(a.methods[0].mean_oa < a.methods[2].mean_oa);
  CHECK(a.empty_parcels >= 3);

  cfg.threads = 3;
  const CompareResult b = compare_methods(data, labeler, scene.word_classes, cfg, 3);
  CHECK(compare_to_json(a) == compare_to_json(b));
  CHECK(format_compare_table(a) == format_compare_table(b));

  const auto doc = nlohmann::json::parse(compare_to_json(a));
  CHECK(doc.at("methods").size() == 3);
  CHECK(doc.at("methods")[0].at("method") == "RECT");
}

TEST_CASE("empty parcels fall back and are reported") {
  const Scene scene = generate_scene(default_benchmark(1));
  const SceneData data = as_data(scene);
  const OracleLabeler labeler(scene);
  const PipelineConfig cfg = small_config(7);
  const RepetitionResult r =
      run_repetition(data, labeler, scene.word_classes, cfg, repetition_seed(cfg.seed, 0), kAllMethods, 1);
  CHECK_FALSE(r.empty_parcels.empty());
  REQUIRE(r.oob_error);
  for (const auto& out : r.outcomes) {
    for (ParcelId id : out.fallback_ids) {
      CHECK(std::find(out.test_ids.begin(), out.test_ids.end(), id) != out.test_ids.end());
    }
  }
  const auto& proposed = r.outcomes[2];
  for (ParcelId id : r.empty_parcels) {
    if (std::find(proposed.test_ids.begin(), proposed.test_ids.end(), id) == proposed.test_ids.end()) continue;
    CHECK(std::find(proposed.fallback_ids.begin(), proposed.fallback_ids.end(), id) != proposed.fallback_ids.end());
  }
}

TEST_CASE("wmin sweep shape") {
  const Scene scene = generate_scene(scenes::solid_tiles(7, 6, 48));
  const SceneData data = as_data(scene);
  const OracleLabeler labeler(scene);
  const std::vector<int> widths{10, 20, 40, 60};
  const auto points = wmin_sweep(data, labeler, scene.word_classes, small_config(1), widths, 2);
  REQUIRE(points.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(points[i].w_min == widths[i]);
  CHECK(points[0].mean_oa == 1.0);
  CHECK(points[3].mean_empty > 0.0);
  CHECK(default_sweep_widths().size() == 10);

  const std::string csv = sweep_to_csv(points);
  CHECK(csv.rfind("w,oa,kappa", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("word map round trip and class lookup") {
  TempDir dir("wm");
  WordClassMap map{{"forest", LandUseLabel::G}, {"road", std::nullopt}, {"harbor", LandUseLabel::P}};
  save_word_map(dir / "m.csv", map);
  CHECK(load_word_map(dir / "m.csv") == map);
  const auto classes = word_classes_for({"harbor", "unseen", "road"}, map);
  CHECK(classes[0] == LandUseLabel::P);
  CHECK_FALSE(classes[1]);
  CHECK_FALSE(classes[2]);
}

TEST_CASE("method names and config validation") {
  for (Method m : kAllMethods) CHECK(parse_method(to_string(m)) == m);
  CHECK_FALSE(parse_method("LRP"));
  PipelineConfig c;
  c.train_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.train_fraction = 0.6;
  c.sampler.w_min = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
