#pragma once

#include "steinrmt/cli/experiment.hpp"

namespace steinrmt::cli {

RunOutcome run_sample(const ExperimentConfig& c);
RunOutcome run_moments(const ExperimentConfig& c);
RunOutcome run_identities(const ExperimentConfig& c);
RunOutcome run_stein_check(const ExperimentConfig& c);
RunOutcome run_distance(const ExperimentConfig& c);
RunOutcome run_bounds(const ExperimentConfig& c);
RunOutcome run_conditions(const ExperimentConfig& c);
RunOutcome run_report(const ExperimentConfig& c);

// {"name", "statement", "pass", "asserted"} plus extra fields.
Json make_check(const std::string& name, const std::string& statement, bool pass, bool asserted = true);

// Exit code 0 when every asserted check passed, else 1; sets report["pass"].
int finish(Json& report);

}  // namespace steinrmt::cli
