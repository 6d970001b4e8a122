#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace cubicdyn;
using namespace testing_support;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kMinimal = R"({
  "surface": {"0,1,0,2": 1, "0,2,1,0": 1, "3,0,0,0": -1, "0,0,3,0": "-4"},
  "x": [0, 1, 0, 0],
  "y": [0, -2, 1, 0]
})";

std::string position_of(const std::string& text) {
  try {
    parse_input(text);
  } catch (const ParseError& e) {
    return e.position();
  }
  return "no error";
}

std::string with(const std::string& field, const std::string& value) {
  json j = json::parse(kMinimal);
  j[field] = json::parse(value);
  return j.dump();
}

}  // namespace

TEST_CASE("input parsing") {
  const ProblemInput in = parse_input(kMinimal);
  CHECK(in.surface.size() == 4);
  CHECK(in.surface.at(Exponent{0, 0, 3, 0}) == -4);
  CHECK(in.x == std::vector<Integer>{0, 1, 0, 0});
  CHECK(in.scan.N == 12);
  CHECK(in.scan.p_max == 200);
  CHECK(in.scan.brute_p_max == 97);
  CHECK_FALSE(in.analyze_rejected_pair);

  const ProblemInput r = load("period2_rank0");
  REQUIRE(r.ranks.size() == 2);
  CHECK(r.ranks[0].fiber == FiberParam::at(q(0)));
  CHECK(r.ranks[1].fiber == FiberParam::infinity());
  CHECK(r.ranks[1].rank == 0);
}

TEST_CASE("parse errors carry a position") {
  CHECK(position_of("{\n  \"surface\": {,\n}") == "line 2, column 15");
  CHECK(position_of("[1, 2]") == "/");
  CHECK(position_of(with("colour", "\"red\"")) == "/colour");
  CHECK(position_of(with("surface", R"({"1,1,0,0": 1})")) == "/surface/1,1,0,0");
  CHECK(position_of(with("surface", R"({"3,0,0": 1})")) == "/surface/3,0,0");
  CHECK(position_of(with("surface", R"({"3,0,0,0": "1.5"})")) == "/surface/3,0,0,0");
  CHECK(position_of(with("x", "[0, 1, 0]")) == "/x");
  CHECK(position_of(with("y", "[0, 0, 0, 0]")) == "/y");
  CHECK(position_of(with("ranks", R"([{"fiber": "1/0", "rank": 0}])")) == "/ranks/0/fiber");
  CHECK(position_of(with("ranks", R"([{"fiber": "0", "rank": -1}])")) == "/ranks/0/rank");
  CHECK(position_of(with("ranks", R"([{"fiber": "0", "rank": 0}, {"fiber": 0, "rank": 1}])")) == "/ranks/1");
  CHECK(position_of(with("scan", R"({"N_max": 30})")) == "/scan/N_max");
  CHECK(position_of(with("scan", R"({"p_max": 1})")) == "/scan/p_max");
  CHECK(position_of(with("analyze_rejected_pair", "1")) == "/analyze_rejected_pair");
  CHECK(position_of(R"({"x": [0, 1, 0, 0], "y": [0, -2, 1, 0]})") == "/surface");

  try {
    parse_input("{");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).rfind("parse error at line 1", 0) == 0);
  }
  CHECK_THROWS_AS(read_input_file(fixture("does_not_exist.json")), ParseError);
}

TEST_CASE("stage lists") {
  CHECK(parse_stages("verify, divpoly") == std::set<Stage>{Stage::verify, Stage::divpoly});
  try {
    parse_stages("verify,srpp");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == "--stages, character 8");
  }
  CHECK_THROWS_AS(parse_stages(" , "), ParseError);
  CHECK(with_dependencies({Stage::srp}) == std::set<Stage>{Stage::verify, Stage::fibration, Stage::divpoly,
                                                            Stage::periodic, Stage::residual, Stage::srp});
  CHECK(with_dependencies({Stage::mwcheck}) ==
        std::set<Stage>{Stage::verify, Stage::fibration, Stage::divpoly, Stage::mwcheck});
  CHECK(with_dependencies({Stage::fibration}) == std::set<Stage>{Stage::verify, Stage::fibration});

  const AnalysisReport r = run_pipeline(parse_input(kMinimal), {Stage::fibration});
  CHECK(r.status == RunStatus::ok);
  CHECK(r.pencil);
  CHECK(r.model);
  CHECK_FALSE(r.dps);
  CHECK_FALSE(r.scan);
}

TEST_CASE("rejections and exit codes") {
  ProblemInput in = parse_input(kMinimal);
  CHECK(exit_code(run_pipeline(in, {Stage::verify})) == 0);

  ProblemInput same = in;
  same.y = same.x;
  AnalysisReport r = run_pipeline(same, {Stage::verify});
  CHECK(r.status == RunStatus::rejected);
  CHECK(exit_code(r) == 3);

  ProblemInput off = in;
  off.y = {1, 0, 0, 0};
  CHECK(exit_code(run_pipeline(off, {Stage::verify})) == 3);

  // X^3 + Y^3 + Z^3 is a cone
  ProblemInput cone = in;
  cone.surface = {{Exponent{3, 0, 0, 0}, 1}, {Exponent{0, 3, 0, 0}, 1}, {Exponent{0, 0, 3, 0}, 1}};
  cone.x = {1, -1, 0, 0};
  cone.y = {0, 0, 0, 1};
  r = run_pipeline(cone, {Stage::verify});
  CHECK(r.status == RunStatus::rejected);
  REQUIRE_FALSE(r.errors.empty());
  CHECK(r.errors[0].find("surface") != std::string::npos);

  ProblemInput tangent = in;
  tangent.y = {1, 1, 0, 1};
  r = run_pipeline(tangent, {Stage::srp});
  CHECK(r.pair_rejected);
  CHECK(exit_code(r) == 3);
  CHECK_FALSE(r.pencil);

  r = run_pipeline(load("nodal_fiber"), {Stage::mwcheck});
  CHECK(r.pair_rejected);
  CHECK(exit_code(r) == 3);
  REQUIRE(r.resultants);
  CHECK(sgn(r.resultants->at(2)) == 0);

  AnalysisReport broken;
  broken.status = RunStatus::consistency_error;
  CHECK(exit_code(broken) == 4);
}

TEST_CASE("reports are deterministic and canonical") {
  const ProblemInput in = load("period2_rank0");
  const std::set<Stage> stages{Stage::periodic, Stage::mwcheck};
  const std::string a = report_json(run_pipeline(in, stages), {false});
  const std::string b = report_json(run_pipeline(read_input_file(fixture("period2_rank0.json")), stages), {false});
  CHECK(a == b);
  CHECK(a.back() == '\n');
  const json j = json::parse(a);
  CHECK(j.dump(2) + "\n" == a);
  CHECK_FALSE(j.contains("generated_at"));
  CHECK(json::parse(report_json(run_pipeline(in, {Stage::verify}))).contains("generated_at"));

  CHECK(j["status"] == "ok");
  CHECK(j["fibration"]["weierstrass"]["B"] == json::array({"4/1"}));
  const auto& fibers = j["periodic"]["periodic_fibers"];
  REQUIRE(fibers.size() == 2);
  CHECK(j["mwcheck"]["all_nonzero"] == true);
}

TEST_CASE("oracle dump") {
  AnalysisReport r = run_pipeline(load("period3_rank0"), {Stage::periodic});
  bool consistent = false;
  const json j = json::parse(oracle_json(r, 11, {false}, &consistent));
  CHECK(consistent);
  const auto& o = j["oracle"];
  CHECK(o["p"] == 11);
  CHECK(o["good_reduction"] == true);
  CHECK(o["points"].size() == o["point_count"].get<std::size_t>());
  CHECK(oracle_json(r, 11, {false}) == oracle_json(r, 11, {false}));
  const json bad = json::parse(oracle_json(r, 2, {false}, &consistent));
  CHECK(bad["oracle"]["good_reduction"] == false);
}

TEST_CASE("fixtures parse") {
  for (const std::string name : {"period3_rank0", "period2_rank0", "period3_rank1", "nodal_fiber"}) {
    CAPTURE(name);
    const ProblemInput in = load(name);
    CHECK(in.ranks.empty() == (name == "nodal_fiber"));
    CHECK(json::parse(slurp(fixture(name + ".json"))).contains("scan"));
  }
}
