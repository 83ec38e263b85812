#pragma once

#include <memory>
#include <string>
#include <vector>

#include "scout/config.hpp"
#include "scout/env.hpp"
#include "scout/losses.hpp"
#include "scout/optim.hpp"
#include "scout/planner.hpp"
#include "scout/replay.hpp"

namespace scout {

// One logged environment transition plus the coverage picture after it.
struct StepLog {
    int t = 0;  // 1-based environment step index, strictly increasing
    int state_id = -1;
    int next_state_id = -1;
    int action = 0;
    bool random_action = false;  // exploration draw, not a scored choice
    double r_extr = 0.0;
    double r_intr = 0.0;
    double gamma = 0.0;
    bool terminal = false;
    int unique_visited = 0;
    double coverage_fraction = 0.0;
    double visited_once_fraction = 0.0;
    double mean_r_intr = 0.0;  // buffer mean after this record was inserted

    bool operator==(const StepLog&) const = default;
};

// One gated training round; t is the step count when the round ran, so the
// round precedes environment step t + 1.
struct TrainRound {
    int t = 0;
    int iters = 0;
    double gate_mean = 0.0;
    LossReport last;

    bool operator==(const TrainRound&) const = default;
};

struct RunLog {
    RunConfig config;
    int initial_state_id = -1;
    std::vector<StepLog> steps;
    std::vector<TrainRound> rounds;
    bool terminal = false;  // episode ended in a terminal state
    bool aborted = false;   // run stopped early; partial log retained
    std::string abort_reason;
    int steps_taken = 0;
    int unique_visited = 0;
    double coverage_fraction = 0.0;
    double visited_once_fraction = 0.0;

    bool operator==(const RunLog&) const = default;
};

// Scored planner decision at step t (random draws leave no entry).
struct PlanTraceEntry {
    int t = 0;
    int chosen = 0;
    std::vector<PlanNode> nodes;
};

// What a finished run leaves behind besides the log. nets and opt are only
// produced by the model-based policies; every policy fills the buffer.
struct RunArtifacts {
    std::unique_ptr<ModelNets> nets;
    std::unique_ptr<RmsProp> opt;
    std::unique_ptr<HistoryBuffer> buffer;
};

// Run one exploration episode under the configured policy:
//   novelty     warmup, gated model training, planner actions, buffered
//               novelty bonuses refreshed after every round
//   pred_error  same loop, but the bonus is the squared transition error
//               of each record at experience time and is never refreshed
//   random      uniform actions, no training
//   count       greedy over 1/sqrt(n(s') + 1) across true successors
//   hash        value learning on observations with a hashed count bonus
// A diverged loss aborts the run and returns the partial log with the
// diagnostic in abort_reason. plan_trace, when given, collects every scored
// planner decision (novelty and pred_error policies only).
RunLog run_exploration(const RunConfig& cfg, Env env,
                       std::vector<PlanTraceEntry>* plan_trace = nullptr,
                       RunArtifacts* artifacts = nullptr);
RunLog run_exploration(const RunConfig& cfg, std::vector<PlanTraceEntry>* plan_trace = nullptr,
                       RunArtifacts* artifacts = nullptr);

}  // namespace scout
