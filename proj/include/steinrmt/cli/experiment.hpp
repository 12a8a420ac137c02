#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace steinrmt::cli {

using Json = nlohmann::ordered_json;

inline const std::vector<std::string> kCommands = {"sample",   "moments", "identities", "stein-check",
                                                   "distance", "bounds",  "conditions", "report"};

/// Every experiment parameter. JSON keys and command-line flags share the
/// field names (with '-' for '_' on the command line).
struct ExperimentConfig {
  std::string command = "bounds";
  std::string ensemble = "cue";  // cue | cbe | sphere
  long n = 10;
  long k = 1;
  double beta = 2.0;
  long samples = 100000;
  std::uint64_t seed = 1;
  // For cue/cbe the conditions command uses t = value/(nβ).
  std::vector<double> t_grid = {1e-2, 5e-3, 2.5e-3};
  double dt = 1e-4;
  double T = 0.1;
  double rho = 0.1;
  double delta = 0.5;
  int degree = 6;
  double confidence = 0.99;
  long chains = 64;
  long thin_sweeps = 5;
  long moment_samples = 0;
  std::string input_dir = ".";
  std::string output_path;
  std::string format = "json";  // json | csv
  // Execution setting only; never part of a report.
  std::optional<unsigned> threads;
};

Json to_json(const ExperimentConfig& c, bool include_threads = true);
// Unknown keys and ill-typed values throw InvalidArgument.
ExperimentConfig from_json(const Json& j, ExperimentConfig base = {});
// Throws InvalidArgument on out-of-range fields.
void validate(const ExperimentConfig& c);

struct RunOutcome {
  int exit_code = 0;
  Json report;
  // Raw per-sample or per-point rows, written when format is csv.
  std::string csv;
  // Markdown summary of the report command.
  std::string markdown;
};

// Runs the configured command and returns its report; does not write files.
// Throws the library's exception types on failure.
RunOutcome run(const ExperimentConfig& config);

// Writes the JSON report (stdout when output_path is empty), the CSV next to
// it (same stem, .csv) when requested, and the markdown summary (.md) of the
// report command.
void write_outputs(const ExperimentConfig& config, const RunOutcome& outcome);

// Entry point used by the executable: parses flags, optionally a --config
// JSON file, runs, writes and maps errors to exit codes 0/1/2/3.
int main_entry(int argc, char** argv);

// CSV cell for a real: 17 significant digits, locale independent.
std::string format_real(double v);

}  // namespace steinrmt::cli
