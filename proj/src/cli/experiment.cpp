#include "steinrmt/cli/experiment.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "steinrmt/errors.hpp"

namespace steinrmt::cli {

namespace {

template <class T>
void read_field(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Json to_json(const ExperimentConfig& c, bool include_threads) {
  Json j;
  j["command"] = c.command;
  j["ensemble"] = c.ensemble;
  j["n"] = c.n;
  j["k"] = c.k;
  j["beta"] = c.beta;
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["t_grid"] = c.t_grid;
  j["dt"] = c.dt;
  j["T"] = c.T;
  j["rho"] = c.rho;
  j["delta"] = c.delta;
  j["degree"] = c.degree;
  j["confidence"] = c.confidence;
  j["chains"] = c.chains;
  j["thin_sweeps"] = c.thin_sweeps;
  j["moment_samples"] = c.moment_samples;
  j["input_dir"] = c.input_dir;
  j["output_path"] = c.output_path;
  j["format"] = c.format;
  if (include_threads && c.threads) j["threads"] = *c.threads;
  return j;
}

ExperimentConfig from_json(const Json& j, ExperimentConfig c) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  static const std::vector<std::string> known = {
      "command", "ensemble",    "n",          "k",     "beta",           "samples",   "seed",
      "t_grid",  "dt",          "T",          "rho",   "delta",          "degree",    "confidence",
      "chains",  "thin_sweeps", "moment_samples", "input_dir", "output_path", "format", "threads"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw InvalidArgument("unknown config key '" + key + "'");
  }
  read_field(j, "command", c.command);
  read_field(j, "ensemble", c.ensemble);
  read_field(j, "n", c.n);
  read_field(j, "k", c.k);
  read_field(j, "beta", c.beta);
  read_field(j, "samples", c.samples);
  read_field(j, "seed", c.seed);
  read_field(j, "t_grid", c.t_grid);
  read_field(j, "dt", c.dt);
  read_field(j, "T", c.T);
  read_field(j, "rho", c.rho);
  read_field(j, "delta", c.delta);
  read_field(j, "degree", c.degree);
  read_field(j, "confidence", c.confidence);
  read_field(j, "chains", c.chains);
  read_field(j, "thin_sweeps", c.thin_sweeps);
  read_field(j, "moment_samples", c.moment_samples);
  read_field(j, "input_dir", c.input_dir);
  read_field(j, "output_path", c.output_path);
  read_field(j, "format", c.format);
  if (j.contains("threads")) {
    unsigned t = 0;
    read_field(j, "threads", t);
    c.threads = t;
  }
  return c;
}

void validate(const ExperimentConfig& c) {
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end())
    throw InvalidArgument("unknown command '" + c.command + "'");
  if (c.ensemble != "cue" && c.ensemble != "cbe" && c.ensemble != "sphere")
    throw InvalidArgument("ensemble must be cue, cbe or sphere");
  if (c.n < 1) throw InvalidArgument("n must be positive");
  if (c.k < 1) throw InvalidArgument("k must be positive");
  if (!(c.beta > 0.0)) throw InvalidArgument("beta must be positive");
  if (c.samples < 1) throw InvalidArgument("samples must be positive");
  for (double t : c.t_grid)
    if (!(t > 0.0)) throw InvalidArgument("t_grid values must be positive");
  if (!(c.dt > 0.0) || !(c.T > 0.0)) throw InvalidArgument("dt and T must be positive");
  if (!(c.rho > 0.0) || !(c.delta > 0.0)) throw InvalidArgument("rho and delta must be positive");
  if (c.degree < 1 || c.degree > 16) throw InvalidArgument("degree must be in [1, 16]");
  if (!(c.confidence > 0.0 && c.confidence < 1.0)) throw InvalidArgument("confidence must be in (0, 1)");
  if (c.chains < 1 || c.thin_sweeps < 1) throw InvalidArgument("chains and thin_sweeps must be positive");
  if (c.moment_samples < 0) throw InvalidArgument("moment_samples must be non-negative");
  if (c.format != "json" && c.format != "csv") throw InvalidArgument("format must be json or csv");
  if (c.threads && *c.threads == 0) throw InvalidArgument("threads must be positive");
}

RunOutcome run(const ExperimentConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  const std::string& cmd = config.command;
  if (cmd == "sample") out = run_sample(config);
  else if (cmd == "moments") out = run_moments(config);
  else if (cmd == "identities") out = run_identities(config);
  else if (cmd == "stein-check") out = run_stein_check(config);
  else if (cmd == "distance") out = run_distance(config);
  else if (cmd == "bounds") out = run_bounds(config);
  else if (cmd == "conditions") out = run_conditions(config);
  else out = run_report(config);
  out.report["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_outputs(const ExperimentConfig& config, const RunOutcome& outcome) {
  const std::string text = outcome.report.dump(2) + "\n";
  if (config.output_path.empty()) {
    std::cout << text;
  } else {
    const std::filesystem::path path(config.output_path);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write " + config.output_path);
    f << text;
  }
  if (!outcome.markdown.empty() && !config.output_path.empty()) {
    std::filesystem::path md_path(config.output_path);
    md_path.replace_extension(".md");
    std::ofstream f(md_path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write " + md_path.string());
    f << outcome.markdown;
  }
  if (config.format == "csv" && config.command != "report") {
    if (config.output_path.empty()) throw InvalidArgument("csv output needs --output");
    std::filesystem::path csv_path(config.output_path);
    csv_path.replace_extension(".csv");
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write " + csv_path.string());
    f << outcome.csv;
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Verification experiments for Stein's method on random matrix ensembles"};
  app.set_version_flag("--version", std::string(STEIN_RMT_VERSION));
  ExperimentConfig flags;
  std::string config_path;
  std::string command;
  app.add_option("command", command,
                 "sample | moments | identities | stein-check | distance | bounds | conditions | report "
                 "(may come from --config instead)");
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--ensemble", flags.ensemble, "cue | cbe | sphere");
  app.add_option("--n", flags.n, "dimension / number of eigenvalues");
  app.add_option("--k", flags.k, "power-sum index");
  app.add_option("--beta", flags.beta, "ensemble parameter");
  app.add_option("--samples", flags.samples, "Monte Carlo sample count");
  app.add_option("--seed", flags.seed, "root seed");
  app.add_option("--t-grid", flags.t_grid, "perturbation times for the condition checks")->expected(1, -1);
  app.add_option("--dt", flags.dt, "CDBM base step");
  app.add_option("--T", flags.T, "CDBM horizon");
  app.add_option("--rho", flags.rho, "threshold of the tail condition");
  app.add_option("--delta", flags.delta, "smoothing width");
  app.add_option("--degree", flags.degree, "largest total degree for the moment table");
  app.add_option("--confidence", flags.confidence, "confidence of the DKW margin");
  app.add_option("--chains", flags.chains, "independent MCMC chains for cbe");
  app.add_option("--thin-sweeps", flags.thin_sweeps, "MCMC sweeps between cbe draws");
  app.add_option("--moment-samples", flags.moment_samples, "samples for the moment comparison in bounds");
  app.add_option("--input-dir", flags.input_dir, "directory of reports for the report command");
  app.add_option("--output", flags.output_path, "JSON report path (stdout when omitted)");
  app.add_option("--format", flags.format, "json | csv");
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker cap (default: STEIN_RMT_THREADS or all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ExperimentConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw InvalidArgument("cannot read " + config_path);
      Json j;
      try {
        j = Json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config parse error: ") + e.what());
      }
      config = from_json(j);
    }
    if (!command.empty()) config.command = command;
    else if (config_path.empty()) throw InvalidArgument("command is required");
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--ensemble")) config.ensemble = flags.ensemble;
    if (given("--n")) config.n = flags.n;
    if (given("--k")) config.k = flags.k;
    if (given("--beta")) config.beta = flags.beta;
    if (given("--samples")) config.samples = flags.samples;
    if (given("--seed")) config.seed = flags.seed;
    if (given("--t-grid")) config.t_grid = flags.t_grid;
    if (given("--dt")) config.dt = flags.dt;
    if (given("--T")) config.T = flags.T;
    if (given("--rho")) config.rho = flags.rho;
    if (given("--delta")) config.delta = flags.delta;
    if (given("--degree")) config.degree = flags.degree;
    if (given("--confidence")) config.confidence = flags.confidence;
    if (given("--chains")) config.chains = flags.chains;
    if (given("--thin-sweeps")) config.thin_sweeps = flags.thin_sweeps;
    if (given("--moment-samples")) config.moment_samples = flags.moment_samples;
    if (given("--input-dir")) config.input_dir = flags.input_dir;
    if (given("--output")) config.output_path = flags.output_path;
    if (given("--format")) config.format = flags.format;
    if (given("--threads")) config.threads = threads;
    validate(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    const RunOutcome outcome = run(config);
    write_outputs(config, outcome);
    return outcome.exit_code;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const OutOfRegime& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace steinrmt::cli
