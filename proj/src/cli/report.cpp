#include <algorithm>
#include <filesystem>
#include <fstream>

#include "commands.hpp"
#include "steinrmt/errors.hpp"

namespace steinrmt::cli {

Json make_check(const std::string& name, const std::string& statement, bool pass, bool asserted) {
  Json j;
  j["name"] = name;
  j["statement"] = statement;
  j["pass"] = pass;
  j["asserted"] = asserted;
  return j;
}

int finish(Json& report) {
  bool ok = true;
  for (const auto& ch : report["checks"])
    if (ch.value("asserted", true) && !ch.value("pass", false)) ok = false;
  report["pass"] = ok;
  return ok ? 0 : 1;
}

RunOutcome run_report(const ExperimentConfig& c) {
  namespace fs = std::filesystem;
  const fs::path dir(c.input_dir);
  if (!fs::is_directory(dir)) throw InvalidArgument("input_dir is not a directory: " + c.input_dir);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  RunOutcome out;
  Json report;
  report["command"] = c.command;
  report["version"] = STEIN_RMT_VERSION;
  report["config"] = to_json(c, false);
  Json runs = Json::array();
  Json checks = Json::array();
  std::string md = "# Verification summary\n\n";
  md += "| run | command | check | statement | result |\n|---|---|---|---|---|\n";
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t informational = 0;
  for (const auto& path : files) {
    if (!c.output_path.empty() && fs::exists(c.output_path) && fs::equivalent(path, c.output_path)) continue;
    std::ifstream f(path);
    Json j;
    try {
      j = Json::parse(f);
    } catch (const nlohmann::json::exception&) {
      continue;
    }
    if (!j.is_object() || !j.contains("command") || !j.contains("checks") || j["command"] == "report") continue;
    Json run;
    run["file"] = path.filename().string();
    run["command"] = j["command"];
    run["pass"] = j.value("pass", false);
    run["checks"] = j["checks"];
    runs.push_back(run);
    for (const auto& ch : j["checks"]) {
      const bool asserted = ch.value("asserted", true);
      const bool pass = ch.value("pass", false);
      std::string verdict = !asserted ? (pass ? "reported (holds)" : "reported (does not hold)") : (pass ? "pass" : "FAIL");
      if (!asserted) ++informational;
      else if (pass) ++passed;
      else ++failed;
      md += "| " + path.filename().string() + " | " + j["command"].get<std::string>() + " | " +
            ch.value("name", std::string()) + " | " + ch.value("statement", std::string()) + " | " + verdict + " |\n";
      Json row = ch;
      row["file"] = path.filename().string();
      checks.push_back(row);
    }
  }
  md += "\nAsserted checks passed: " + std::to_string(passed) + ", failed: " + std::to_string(failed) +
        ", reported only: " + std::to_string(informational) + ".\n";
  report["metrics"] = {{"runs", runs.size()}, {"passed", passed}, {"failed", failed}, {"reported_only", informational}};
  report["runs"] = runs;
  report["checks"] = checks;
  report["pass"] = failed == 0;
  out.report = report;
  out.markdown = md;
  out.exit_code = failed == 0 ? 0 : 1;
  return out;
}

}  // namespace steinrmt::cli
