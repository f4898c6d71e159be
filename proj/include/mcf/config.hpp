#pragma once
// Single-file JSON run configuration: one flat section per module, strict
// unknown-key rejection naming the offending JSON path, and a stable content
// hash so every artifact can name the configuration that produced it.

#include <cstdint>
#include <string>
#include <vector>

#include "mcf/deploy.hpp"
#include "mcf/evalkit.hpp"
#include "mcf/trainer.hpp"

namespace mcf {

struct RunConfig {
    TrainConfig train;      // carries the gating/sac/apf/env subsections
    EvalSuiteOptions eval;  // episode count, seed base, planner resolution
    DeployOptions deploy;
    std::string out;        // default output directory; --out overrides
    std::string log_level;  // honored only when MCF_LOG is unset; "" = leave alone
};

// Sections: train, gating, sac, apf, env, deploy, eval; scalars: out,
// log_level. Any unknown key anywhere is a ConfigError naming its JSON path
// (e.g. `sac.learning_rate`). A "gating" section pins the schedule's midpoint
// and steepness; its total always follows train.total_steps.
RunConfig load_run_config(const std::string& path);

// The effective configuration (defaults resolved) in canonical form: sorted
// keys, stable number formatting. Equal strings <=> equal behavior-relevant
// configuration.
std::string run_config_json(const RunConfig& cfg);

// FNV-1a 64 over the canonical form, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// "0,1,2" -> {0,1,2}; ParamError on empty items or non-numeric text.
std::vector<uint64_t> parse_seed_list(const std::string& csv);
// "mcf,e2e" -> {"mcf","e2e"}; ParamError on empty items.
std::vector<std::string> parse_name_list(const std::string& csv);

}  // namespace mcf
