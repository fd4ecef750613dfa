#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "parcelsense/pipeline.hpp"
#include "parcelsense/run_config.hpp"
#include "parcelsense/synthcity.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using namespace parcelsense;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

Run cli(const std::string& args) {
  static int n = 0;
  const fs::path out = fs::temp_directory_path() / ("parcelsense_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
  const std::string cmd = quote(PARCELSENSE_CLI_PATH) + " " + args + " > " + quote(out.string()) + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  fs::remove(out);
  return r;
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

// One default benchmark scene per test run.
const fs::path& scene_dir() {
  static TempDir dir("cli_scene");
  static bool made = false;
  if (!made) {
    REQUIRE(cli("synth --seed 7 --out " + quote(dir.path().string())).code == 0);
    made = true;
  }
  return dir.path();
}

}  // namespace

TEST_CASE("synth is deterministic") {
  TempDir dir("cli_synth");
  REQUIRE(cli("synth --seed 7 --out " + quote((dir / "b").string())).code == 0);
  for (const char* f : {"raster.png", "parcels.png", "labels.csv", "words.png", "vocabulary.txt", "word_map.csv", "mixtures.csv"}) {
    CHECK(slurp(scene_dir() / f) == slurp(dir / "b" / f));
  }
}

TEST_CASE("staged commands reproduce the in-process PROPOSED run") {
  TempDir dir("cli_stage");
  const std::string s = quote(scene_dir().string());
  const auto p = [&](const char* name) { return quote((dir / name).string()); };
  REQUIRE(cli("sample --scene " + s + " --out " + p("samples") + " --no-pixels").code == 0);
  CHECK(fs::exists(dir / "samples" / "manifest.csv"));
  REQUIRE(cli("label --labeler oracle --scene " + s + " --manifest " + quote((dir / "samples" / "manifest.csv").string()) +
              " --out " + p("words.csv")).code == 0);
  CHECK(fs::exists(dir / "words.csv.vocab"));
  REQUIRE(cli("featurize --words " + p("words.csv") + " --scene " + s + " --counts " + p("counts.csv") + " --out " + p("features.csv")).code == 0);
  REQUIRE(cli("train-rf --features " + p("features.csv") + " --scene " + s + " --split " + p("split.csv") + " --out " + p("forest.json")).code == 0);
  REQUIRE(cli("classify --features " + p("features.csv") + " --model " + p("forest.json") + " --split " + p("split.csv") + " --out " + p("pred.csv")).code == 0);
  const Run ev = cli("evaluate --predictions " + p("pred.csv") + " --scene " + s + " --out " + p("report.json"));
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("Kappa") != std::string::npos);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));

  const SceneData scene = load_scene(scene_dir());
  const auto map = load_parcel_map(scene_dir() / "words.png");
  std::vector<std::string> vocab;
  std::ifstream in(scene_dir() / "vocabulary.txt");
  for (std::string w; std::getline(in, w);) {
    if (!w.empty()) vocab.push_back(w);
  }
  const OracleLabeler labeler(vocab, map.width, map.height, map.ids);
  const auto classes = word_classes_for(vocab, load_word_map(scene_dir() / "word_map.csv"));
  const MethodOutcome direct = run_pipeline(scene, labeler, classes, RunConfig{}.pipeline(), Method::PROPOSED);
  CHECK(report.at("oa").get<double>() == direct.report.oa);
  CHECK(report.at("kappa").get<double>() == direct.report.kappa);
  CHECK(report.at("total").get<std::size_t>() == direct.test_ids.size());
}

TEST_CASE("external worker labels through exec:") {
  TempDir dir("cli_exec");
  const std::string s = quote(scene_dir().string());
  REQUIRE(cli("sample --scene " + s + " --attempts 5 --out " + quote((dir / "samples").string())).code == 0);
  const std::string manifest = quote((dir / "samples" / "manifest.csv").string());
  const Run ok = cli("label --labeler " + quote(std::string("exec:") + ECHO_LABELER_PATH + " --vocab x,y") +
                     " --manifest " + manifest + " --out " + quote((dir / "w.csv").string()));
  CHECK(ok.code == 0);
  const std::string words = slurp(dir / "w.csv");
  CHECK(lines(words) > 1);
  CHECK(words.find(",y\n") == std::string::npos);
  const Run bad = cli("label --labeler " + quote(std::string("exec:") + ECHO_LABELER_PATH + " --fail bad-word") +
                      " --manifest " + manifest + " --out " + quote((dir / "x.csv").string()));
  CHECK(bad.code == 2);
}

TEST_CASE("exit codes") {
  TempDir dir("cli_exit");
  CHECK(cli("").code == 1);
  CHECK(cli("compare").code == 1);
  CHECK(cli("compare --scene " + quote((dir / "missing").string()) + " --labeler oracle").code == 2);
  CHECK(cli("compare --scene " + quote(scene_dir().string()) + " --labeler oracle --wmin 0").code == 1);
  CHECK(cli("frobnicate").code == 1);
  std::ofstream(dir / "bad.cfg") << "labeler = magic\n";
  CHECK(cli("compare --scene " + quote(scene_dir().string()) + " --config " + quote((dir / "bad.cfg").string())).code == 1);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("flags override the config file") {
  TempDir dir("cli_cfg");
  std::ofstream(dir / "run.cfg") << "attempts = 0\nrepetitions = 1\n";
  const std::string base = "compare --labeler oracle --scene " + quote(scene_dir().string()) + " --config " +
                           quote((dir / "run.cfg").string());
  CHECK(cli(base).code == 1);
  const Run r = cli(base + " --attempts 40");
  CHECK(r.code == 0);
  for (const char* m : {"RECT", "RAND", "PROPOSED"}) CHECK(r.out.find(m) != std::string::npos);
}

TEST_CASE("compare reports are identical across thread counts") {
  TempDir dir("cli_threads");
  const std::string base = "compare --labeler oracle --reps 2 --attempts 60 --seed 3 --scene " + quote(scene_dir().string());
  const Run one = cli(base + " --threads 1 --out " + quote((dir / "a.json").string()));
  const Run four = cli(base + " --threads 4 --out " + quote((dir / "b.json").string()));
  REQUIRE(one.code == 0);
  REQUIRE(four.code == 0);
  CHECK(one.out == four.out);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(nlohmann::json::parse(slurp(dir / "a.json")).at("methods").size() == 3);
}

TEST_CASE("sweep writes one row per width") {
  TempDir dir("cli_sweep");
  const Run r = cli("sweep --labeler oracle --reps 1 --attempts 40 --scene " + quote(scene_dir().string()) + " --plot " +
                    quote((dir / "s.png").string()));
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("w,oa,kappa", 0) == 0);
  CHECK(lines(r.out) == 11);
  CHECK(fs::file_size(dir / "s.png") > 0);
}
