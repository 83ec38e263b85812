#pragma once

#include <string>
#include <vector>

#include "scout/agent.hpp"
#include "scout/env.hpp"
#include "scout/mlp.hpp"
#include "scout/replay.hpp"
#include "scout/tensor.hpp"

namespace scout {

// Coverage picture after a given step, recomputable from a persisted log.
struct CoverageMetrics {
    int step = 0;
    int unique_visited = 0;
    double coverage_fraction = 0.0;
    double visited_once_fraction = 0.0;
    double mean_r_intr = 0.0;

    bool operator==(const CoverageMetrics&) const = default;
};

// Replay the logged transitions and rebuild the coverage series from scratch.
// Equal to the values recorded online, entry for entry.
std::vector<CoverageMetrics> compute_coverage(const RunLog& log, const Env& env);

// One row per environment step:
//   step, unique_visited, coverage_fraction, visited_once_fraction,
//   mean_r_intr, L_Q, L_R, L_G, L_tau, L_d1, L_csc, iters_used
// iters_used is the size of the training round that ran right before the
// step, zero otherwise; the loss columns carry the latest finished round
// forward and are zero before the first one.
void write_metrics_csv(const RunLog& log, const std::string& path);

// Arrival counts per grid cell (key flag folded away); the start state is
// not an arrival, so the counts sum to the number of steps taken.
Tensor visit_heatmap(const RunLog& log, const Env& env);
void write_heatmap_csv(const Tensor& grid, const std::string& path);

// States CSV: state_id, row, col, has_key, then the encoded coordinates.
// Transitions CSV: from_id, action, to_id, distinct and sorted. The buffer
// variant covers the states it still holds; the id-list variant regenerates
// observations through the environment and can cover a whole log.
void export_representation(const HistoryBuffer& buffer, const Mlp& encoder, const Env& env,
                           const std::string& states_path, const std::string& transitions_path);
void export_representation_for_ids(const std::vector<int>& ids,
                                   const std::vector<std::array<int, 3>>& transitions,
                                   const Mlp& encoder, Env& env, const std::string& states_path,
                                   const std::string& transitions_path);

// NDJSON log: one run line, then step and round lines in event order, then a
// summary line. Writing is deterministic byte for byte, and reading restores
// a RunLog that compares equal to the one written.
void write_runlog_ndjson(const RunLog& log, const std::string& path);
RunLog read_runlog_ndjson(const std::string& path);

void write_summary_json(const RunLog& log, const std::string& path);

// One row per metric: metric, mean, stderr, n over the given runs. stderr is
// the sample standard deviation over sqrt(n), zero for a single run.
void write_aggregate_csv(const std::vector<RunLog>& logs, const std::string& path);

void write_plan_trace_ndjson(const std::vector<PlanTraceEntry>& trace, const std::string& path);

}  // namespace scout
