#include "scout/cli.hpp"

#include <atomic>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "scout/agent.hpp"
#include "scout/common.hpp"
#include "scout/config.hpp"
#include "scout/env.hpp"
#include "scout/logging.hpp"
#include "scout/metrics.hpp"
#include "scout/nets.hpp"

namespace scout {

namespace {

namespace fs = std::filesystem;

struct RunFlags {
    std::string config_path;
    std::string env_name;
    std::string policy;
    std::string out_dir;
    int seed = 0;
    int depth = 0;
    int seeds = 1;
    bool plan_trace = false;
};

void add_config_flags(CLI::App& sub, RunFlags& f) {
    sub.add_option("--config", f.config_path, "run configuration JSON");
    sub.add_option("--env", f.env_name, "environment name")
        ->check(CLI::IsMember({"open_labyrinth", "four_room", "key_maze"}));
    sub.add_option("--policy", f.policy, "exploration policy")
        ->check(CLI::IsMember({"novelty", "random", "count", "hash", "pred_error"}));
    sub.add_option("--seed", f.seed, "base random seed")->check(CLI::NonNegativeNumber);
    sub.add_option("--depth", f.depth, "planner depth")->check(CLI::NonNegativeNumber);
    sub.add_flag("--plan-trace", f.plan_trace, "record every scored planner decision");
    sub.add_option("--out", f.out_dir, "output directory")->required();
}

// file config (if any) under the env override, then explicit flag overrides
RunConfig resolve_config(const CLI::App& sub, const RunFlags& f) {
    RunConfig cfg;
    if (!f.config_path.empty()) {
        cfg = parse_config_file(f.config_path, f.env_name);
    } else if (!f.env_name.empty()) {
        cfg = default_config(env_kind_from_name(f.env_name));
    } else {
        cfg = default_config(EnvKind::OpenLabyrinth);
    }
    if (sub.count("--seed") > 0) cfg.seed = f.seed;
    if (sub.count("--policy") > 0) cfg.policy = f.policy;
    if (sub.count("--depth") > 0) cfg.plan.depth = f.depth;
    return cfg;
}

bool model_based(const RunConfig& cfg) {
    return cfg.policy == "novelty" || cfg.policy == "pred_error";
}

RunLog run_seeded(const RunConfig& cfg, bool want_trace, const fs::path& dir) {
    std::vector<PlanTraceEntry> trace;
    std::vector<PlanTraceEntry>* trace_ptr = want_trace && model_based(cfg) ? &trace : nullptr;
    RunArtifacts art;
    RunLog log = run_exploration(cfg, trace_ptr, &art);

    fs::create_directories(dir);
    write_runlog_ndjson(log, (dir / "runlog.ndjson").string());
    write_metrics_csv(log, (dir / "metrics.csv").string());
    write_summary_json(log, (dir / "summary.json").string());
    Env env = Env::load(cfg.env, cfg.gamma);
    write_heatmap_csv(visit_heatmap(log, env), (dir / "heatmap.csv").string());
    if (art.nets != nullptr) {
        save_checkpoint((dir / "checkpoint.json").string(), *art.nets, art.opt.get());
        if (art.buffer != nullptr && art.buffer->size() > 0)
            export_representation(*art.buffer, art.nets->encoder, env,
                                  (dir / "representation.csv").string(),
                                  (dir / "transitions.csv").string());
    }
    if (trace_ptr != nullptr)
        write_plan_trace_ndjson(trace, (dir / "plan_trace.ndjson").string());

    log_info("seed " + std::to_string(cfg.seed) + ": steps=" + std::to_string(log.steps_taken) +
             " unique=" + std::to_string(log.unique_visited) + " rounds=" +
             std::to_string(log.rounds.size()) + (log.terminal ? " terminal" : "") +
             (log.aborted ? " ABORTED" : ""));
    return log;
}

int cmd_run(const RunConfig& cfg, const RunFlags& f) {
    log_info("run: env=" + env_kind_name(cfg.env) + " policy=" + cfg.policy +
             " seed=" + std::to_string(cfg.seed) + " n_max=" + std::to_string(cfg.n_max));
    RunLog log = run_seeded(cfg, f.plan_trace, f.out_dir);
    if (log.aborted) {
        log_error("run aborted: " + log.abort_reason);
        return 1;
    }
    return 0;
}

int cmd_sweep(const RunConfig& base, const RunFlags& f) {
    const int n = f.seeds;
    log_info("sweep: env=" + env_kind_name(base.env) + " policy=" + base.policy + " seeds=" +
             std::to_string(base.seed) + ".." + std::to_string(base.seed + n - 1));
    std::vector<RunConfig> cfgs(static_cast<size_t>(n), base);
    for (int i = 0; i < n; ++i) cfgs[static_cast<size_t>(i)].seed = base.seed + i;

    std::vector<RunLog> logs(static_cast<size_t>(n));
    std::vector<std::string> errors(static_cast<size_t>(n));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i; (i = next.fetch_add(1)) < n;) {
            const RunConfig& cfg = cfgs[static_cast<size_t>(i)];
            fs::path dir = fs::path(f.out_dir) / ("seed_" + std::to_string(cfg.seed));
            try {
                logs[static_cast<size_t>(i)] = run_seeded(cfg, f.plan_trace, dir);
            } catch (const std::exception& e) {
                errors[static_cast<size_t>(i)] = e.what();
            }
        }
    };
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned workers = std::min(static_cast<unsigned>(n), hw);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();

    bool failed = false;
    for (int i = 0; i < n; ++i) {
        if (!errors[static_cast<size_t>(i)].empty()) {
            log_error("seed " + std::to_string(cfgs[static_cast<size_t>(i)].seed) +
                      " failed: " + errors[static_cast<size_t>(i)]);
            failed = true;
        } else if (logs[static_cast<size_t>(i)].aborted) {
            log_error("seed " + std::to_string(cfgs[static_cast<size_t>(i)].seed) +
                      " aborted: " + logs[static_cast<size_t>(i)].abort_reason);
            failed = true;
        }
    }
    if (failed) return 1;
    write_aggregate_csv(logs, (fs::path(f.out_dir) / "aggregate.csv").string());
    return 0;
}

int cmd_metrics(const RunLog& log, const std::string& out_dir) {
    Env env = Env::load(log.config.env, log.config.gamma);
    std::vector<CoverageMetrics> replay = compute_coverage(log, env);
    check(replay.size() == log.steps.size(), "cli: replayed step count mismatch");
    for (size_t i = 0; i < replay.size(); ++i) {
        const StepLog& s = log.steps[i];
        const CoverageMetrics& m = replay[i];
        bool same = m.step == s.t && m.unique_visited == s.unique_visited &&
                    m.coverage_fraction == s.coverage_fraction &&
                    m.visited_once_fraction == s.visited_once_fraction;
        check(same, "cli: replayed coverage disagrees with the log at step " +
                        std::to_string(s.t));
    }
    write_metrics_csv(log, (fs::path(out_dir) / "metrics.csv").string());
    log_info("metrics: verified " + std::to_string(replay.size()) + " steps");
    return 0;
}

int cmd_export(const RunLog& log, const std::string& out_dir) {
    Env env = Env::load(log.config.env, log.config.gamma);
    fs::path dir(out_dir);
    write_heatmap_csv(visit_heatmap(log, env), (dir / "heatmap.csv").string());

    fs::path ckpt = dir / "checkpoint.json";
    if (fs::exists(ckpt)) {
        ModelNets nets(env.obs_dim(), log.config.n_x, env.num_actions());
        load_checkpoint(ckpt.string(), nets, nullptr);
        std::vector<int> ids;
        ids.push_back(log.initial_state_id);
        std::vector<std::array<int, 3>> triples;
        for (const StepLog& s : log.steps) {
            ids.push_back(s.state_id);
            ids.push_back(s.next_state_id);
            triples.push_back({s.state_id, s.action, s.next_state_id});
        }
        export_representation_for_ids(ids, triples, nets.encoder, env,
                                      (dir / "representation.csv").string(),
                                      (dir / "transitions.csv").string());
        log_info("export: heatmap and representation rebuilt");
    } else {
        log_info("export: heatmap rebuilt (no checkpoint present)");
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"exploration runs over learned abstract representations"};
    app.require_subcommand(1);

    RunFlags run_f;
    CLI::App* run_sub = app.add_subcommand("run", "one seeded exploration run");
    add_config_flags(*run_sub, run_f);

    RunFlags sweep_f;
    CLI::App* sweep_sub = app.add_subcommand("sweep", "several seeds, aggregated");
    add_config_flags(*sweep_sub, sweep_f);
    sweep_sub->add_option("--seeds", sweep_f.seeds, "number of consecutive seeds")
        ->required()
        ->check(CLI::PositiveNumber);

    std::string metrics_out;
    CLI::App* metrics_sub =
        app.add_subcommand("metrics", "recompute metrics.csv from runlog.ndjson");
    metrics_sub->add_option("--out", metrics_out, "run directory")->required();

    std::string export_out;
    CLI::App* export_sub =
        app.add_subcommand("export", "regenerate heatmap and representation exports");
    export_sub->add_option("--out", export_out, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    // resolving inputs exits 2; failures while executing exit 1
    try {
        if (run_sub->parsed() || sweep_sub->parsed()) {
            const bool is_run = run_sub->parsed();
            RunConfig cfg;
            try {
                cfg = resolve_config(is_run ? *run_sub : *sweep_sub, is_run ? run_f : sweep_f);
            } catch (const std::exception& e) {
                log_error(e.what());
                return 2;
            }
            return is_run ? cmd_run(cfg, run_f) : cmd_sweep(cfg, sweep_f);
        }
        const bool is_metrics = metrics_sub->parsed();
        const std::string& dir = is_metrics ? metrics_out : export_out;
        RunLog log;
        try {
            log = read_runlog_ndjson((fs::path(dir) / "runlog.ndjson").string());
        } catch (const std::exception& e) {
            log_error(e.what());
            return 2;
        }
        return is_metrics ? cmd_metrics(log, dir) : cmd_export(log, dir);
    } catch (const std::exception& e) {
        log_error(e.what());
        return 1;
    }
}

}  // namespace scout
