#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "rmued/run_config.hpp"
#include "rmued/serialization.hpp"

using namespace rmued;
using namespace fixtures;

TEST_CASE("run config defaults round-trip through JSON") {
  RunConfig base;
  Json j = to_json(base);
  CHECK(j.size() == run_config_keys().size());
  RunConfig again = run_config_from_json(j);
  CHECK(dump_line(to_json(again)) == dump_line(j));
  CHECK(j["replay_rate"].is_null());
}

TEST_CASE("run config keys and validation") {
  Json j{{"algorithm", "ACCEL0"}, {"rooms", {1}}, {"object_count", {1, 1}}, {"gamma", 0.95}};
  RunConfig c = run_config_from_json(j);
  CHECK(c.curriculum.algorithm == Algorithm::accel0);
  CHECK(c.curriculum.generator.level.room_choices == std::vector<int>{1});
  CHECK(c.curriculum.gamma == 0.95);
  CHECK(c.student.planner.gamma == 0.95);

  CHECK_THROWS_AS(run_config_from_json(Json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(Json{{"algorithm", "PLR"}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(Json{{"buffer_capacity", 0}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(Json{{"rooms", {3}}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(Json::array()), ConfigError);
}

TEST_CASE("overrides parse JSON values or fall back to strings") {
  CHECK(parse_override("steps=20") == Json{{"steps", 20}});
  CHECK(parse_override("algorithm=DR") == Json{{"algorithm", "DR"}});
  CHECK(parse_override("rooms=[1,2]") == Json{{"rooms", {1, 2}}});
  CHECK_THROWS_AS(parse_override("steps"), ConfigError);
}

TEST_CASE("problem JSON round-trips") {
  Problem p = fig1_problem();
  p.level.carried = obj(ObjectKind::key, Color::red);
  CHECK(problem_from_json(to_json(p)) == p);
  CHECK(rm_from_json(to_json(p.rm)) == p.rm);
}

TEST_CASE("problem sets report the failing line") {
  auto path = std::filesystem::temp_directory_path() / "rmued_problem_set.jsonl";
  {
    std::ofstream out(path);
    out << dump_line(to_json(fig1_problem())) << "\n\n" << dump_line(to_json(fig1_problem()))
        << "\n";
  }
  CHECK(read_problem_set(path.string()).size() == 2);
  {
    std::ofstream out(path, std::ios::app);
    out << "{\"rm\": 3}\n";
  }
  try {
    read_problem_set(path.string());
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("atomic writes replace the file") {
  auto path = (std::filesystem::temp_directory_path() / "rmued_atomic.txt").string();
  write_file_atomic(path, "one");
  write_file_atomic(path, "two");
  CHECK(read_file(path) == "two");
  std::filesystem::remove(path);
}
