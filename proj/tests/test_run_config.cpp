#include <doctest.h>

#include <fstream>

#include "parcelsense/errors.hpp"
#include "parcelsense/run_config.hpp"
#include "temp_dir.hpp"

using namespace parcelsense;

TEST_CASE("defaults validate") {
  const RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.w_min == 20);
  CHECK(c.attempts == 300);
  CHECK(c.membership_threshold == 0.80);
  CHECK(c.n_trees == 100);
  CHECK(c.pipeline().sampler.w_min == 20);
  CHECK(c.pipeline().train_fraction == 0.6);
}

TEST_CASE("merge_text applies keys and ignores comments") {
  RunConfig c;
  c.merge_text("# tuned\nw_min = 12\n\nattempts=50  # fewer\nlabeler = exec:python3 worker.py\n");
  CHECK(c.w_min == 12);
  CHECK(c.attempts == 50);
  CHECK(c.labeler == "exec:python3 worker.py");
  CHECK_THROWS_AS(c.merge_text("nonsense = 1"), ConfigError);
  CHECK_THROWS_AS(c.merge_text("w_min = twelve"), ConfigError);
  CHECK_THROWS_AS(c.merge_text("w_min"), ConfigError);
}

TEST_CASE("to_text round trips") {
  RunConfig c;
  c.seed = 77;
  c.learning_rate = 0.0125;
  c.labeler_split = {0.7, 0.2, 0.1};
  c.labeler = "oracle";
  RunConfig back;
  back.merge_text(c.to_text());
  CHECK(back.to_text() == c.to_text());
  CHECK(back.seed == 77);
  CHECK(back.learning_rate == 0.0125);
}

TEST_CASE("validation names bad fields") {
  RunConfig c;
  c.attempts = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("attempts"), ConfigError);
  c = RunConfig{};
  c.labeler = "magic";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.labeler_split = {0.5, 0.1, 0.1};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("load_run_config") {
  TempDir dir("cfg");
  std::ofstream(dir / "run.cfg") << "seed = 9\nthreads = 2\n";
  const RunConfig c = load_run_config(dir / "run.cfg");
  CHECK(c.seed == 9);
  CHECK(c.threads == 2);
  CHECK_THROWS_AS(load_run_config(dir / "missing.cfg"), DataError);
}
