#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "steinrmt/cli/experiment.hpp"
#include "steinrmt/errors.hpp"

using namespace steinrmt;
using namespace steinrmt::cli;
namespace fs = std::filesystem;

namespace {

int call(std::vector<std::string> args) {
  args.insert(args.begin(), "stein_rmt");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

std::string without_wall_time(Json j) {
  j.erase("wall_time_seconds");
  return j.dump();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("steinrmt_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config round trip") {
  ExperimentConfig c;
  c.command = "conditions";
  c.ensemble = "sphere";
  c.n = 17;
  c.seed = 0xFFFFFFFFFFFFFFFFULL;
  c.t_grid = {0.1, 0.03, 1e-7};
  c.dt = 0.1 + 0.2;
  c.threads = 3u;
  const auto back = from_json(Json::parse(to_json(c).dump()));
  REQUIRE(to_json(back).dump() == to_json(c).dump());
  REQUIRE(back.seed == c.seed);
  REQUIRE(back.dt == c.dt);
  REQUIRE(back.threads == c.threads);
  REQUIRE_FALSE(to_json(c, false).contains("threads"));
}

TEST_CASE("config validation") {
  REQUIRE_THROWS_AS(from_json(Json{{"no_such_key", 1}}), InvalidArgument);
  REQUIRE_THROWS_AS(from_json(Json{{"n", "ten"}}), InvalidArgument);
  ExperimentConfig c;
  validate(c);
  c.n = 0;
  REQUIRE_THROWS_AS(validate(c), InvalidArgument);
  c = {};
  c.command = "nope";
  REQUIRE_THROWS_AS(validate(c), InvalidArgument);
  c = {};
  c.format = "xml";
  REQUIRE_THROWS_AS(validate(c), InvalidArgument);
  c = {};
  c.t_grid = {0.1, -0.1, 0.05};
  REQUIRE_THROWS_AS(validate(c), InvalidArgument);
}

TEST_CASE("real formatting") {
  REQUIRE(format_real(0.1) == "0.10000000000000001");
  REQUIRE(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
  REQUIRE(format_real(-2.5e-300).find(',') == std::string::npos);
}

TEST_CASE("bounds command") {
  ExperimentConfig c;
  c.command = "bounds";
  c.n = 50;
  c.k = 1;
  const auto out = run(c);
  REQUIRE(out.exit_code == 0);
  const auto& m = out.report["metrics"];
  REQUIRE(m["bound_cue"].get<double>() == Catch::Approx(0.49626018).epsilon(1e-8));
  REQUIRE(m["bound_sphere"].get<double>() == Catch::Approx(0.05603318).epsilon(1e-7));
  REQUIRE(out.report["command"] == "bounds");
  REQUIRE(out.report.contains("version"));
  REQUIRE(out.report.contains("wall_time_seconds"));
  REQUIRE(out.report["config"]["n"] == 50);
  REQUIRE(out.report["pass"] == true);
}

TEST_CASE("moments command") {
  ExperimentConfig c;
  c.command = "moments";
  c.n = 10;
  c.samples = 100000;
  c.seed = 7;
  const auto out = run(c);
  REQUIRE(out.exit_code == 0);
  REQUIRE(out.report["metrics"]["max_z"].get<double>() <= 4.0);
  REQUIRE(out.report["metrics"]["pairs_checked"].get<std::size_t>() > 20);
}

TEST_CASE("reports do not depend on the thread count") {
  for (const std::string cmd : {"sample", "moments", "distance", "conditions"}) {
    ExperimentConfig c;
    c.command = cmd;
    c.ensemble = cmd == "conditions" ? "sphere" : "cue";
    c.n = 8;
    c.samples = 3000;
    c.threads = 1u;
    const auto a = run(c);
    c.threads = 3u;
    const auto b = run(c);
    REQUIRE(without_wall_time(a.report) == without_wall_time(b.report));
    REQUIRE(a.csv == b.csv);
  }
  ExperimentConfig c;
  c.command = "sample";
  c.ensemble = "cbe";
  c.beta = 1.0;
  c.n = 6;
  c.samples = 500;
  c.chains = 5;
  c.threads = 1u;
  const auto a = run(c);
  c.threads = 4u;
  REQUIRE(without_wall_time(a.report) == without_wall_time(run(c).report));
}

TEST_CASE("exit codes") {
  REQUIRE(call({"bounds", "--n", "20"}) == 0);
  REQUIRE(call({"frobnicate"}) == 2);
  REQUIRE(call({"bounds", "--n", "0"}) == 2);
  REQUIRE(call({"bounds", "--bogus-flag", "1"}) == 2);
  REQUIRE(call({"distance", "--ensemble", "cbe", "--n", "3", "--k", "2", "--beta", "1"}) == 2);
}

TEST_CASE("config file with flag override, csv and report outputs") {
  const auto dir = scratch("files");
  {
    std::ofstream f(dir / "cfg.json");
    f << R"({"command": "sample", "ensemble": "sphere", "n": 5, "samples": 10, "seed": 3})";
  }
  const auto out_json = (dir / "sample.json").string();
  REQUIRE(call({"--config", (dir / "cfg.json").string(), "--n", "6", "--format", "csv", "--output", out_json}) == 0);
  const auto j = Json::parse(slurp(out_json));
  REQUIRE(j["config"]["n"] == 6);
  REQUIRE(j["config"]["samples"] == 10);
  const auto csv = slurp(dir / "sample.csv");
  REQUIRE(csv.rfind("sample,coordinate,value\n", 0) == 0);
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 1 + 10 * 6);

  REQUIRE(call({"bounds", "--n", "12", "--output", (dir / "bounds.json").string()}) == 0);
  const auto rep = (dir / "summary.json").string();
  REQUIRE(call({"report", "--input-dir", dir.string(), "--output", rep}) == 0);
  const auto s = Json::parse(slurp(rep));
  REQUIRE(s["command"] == "report");
  REQUIRE(fs::exists(dir / "summary.md"));
  REQUIRE(slurp(dir / "summary.md").find("sphere_rewalk") != std::string::npos);
  REQUIRE(call({"sample", "--format", "csv"}) == 2);
}

TEST_CASE("identical seeds give identical reports") {
  ExperimentConfig c;
  c.command = "identities";
  c.samples = 50;
  const auto a = run(c);
  const auto b = run(c);
  REQUIRE(without_wall_time(a.report) == without_wall_time(b.report));
  c.seed = 2;
  REQUIRE(without_wall_time(a.report) != without_wall_time(run(c).report));
}

TEST_CASE("every command runs") {
  for (const auto& cmd : kCommands) {
    if (cmd == "report") continue;
    ExperimentConfig c;
    c.command = cmd;
    c.n = 8;
    c.samples = 200;
    c.ensemble = "sphere";
    if (cmd == "moments" || cmd == "sample") c.ensemble = "cue";
    const auto out = run(c);
    REQUIRE(out.report["command"] == cmd);
    REQUIRE(out.report["checks"].is_array());
  }
}
