#pragma once

#include <cstdint>
#include <string>

#include "scout/env.hpp"
#include "scout/planner.hpp"

namespace scout {

// Everything that pins down one exploration run. Field defaults are the
// open-labyrinth values; default_config swaps in the per-environment ones.
// Config files may omit any field and inherit the default for their env.
struct RunConfig {
    EnvKind env = EnvKind::OpenLabyrinth;
    std::string policy = "novelty";  // novelty | random | count | hash | pred_error
    std::uint64_t seed = 0;
    int n_init = 64;      // warmup steps under the uniform policy
    int n_max = 1000;     // environment-step horizon
    int n_freq = 1;       // environment steps between training rounds
    int n_iters = 30000;  // iteration cap per training round
    double lr = 0.00025;
    double gamma = 0.8;
    int buffer_capacity = 1000;
    int batch_size = 64;
    double omega = 0.5;
    double delta = 6.0;
    int k = 5;
    double c_d1 = 5.0;
    int n_x = 2;
    PlanConfig plan;

    bool operator==(const RunConfig&) const = default;
};

RunConfig default_config(EnvKind env);

// Parse a JSON object; absent keys fall back to the defaults for the config's
// environment. A nonempty env_override replaces the file's env before the
// defaults resolve, so explicit file fields still win over defaults.
RunConfig parse_config(const std::string& json_text, const std::string& env_override = "");
RunConfig parse_config_file(const std::string& path, const std::string& env_override = "");

// Full explicit form; parse_config(serialize_config(c)) reproduces c exactly.
std::string serialize_config(const RunConfig& cfg);

}  // namespace scout
