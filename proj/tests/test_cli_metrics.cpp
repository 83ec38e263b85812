#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scout/agent.hpp"
#include "scout/cli.hpp"
#include "scout/config.hpp"
#include "scout/env.hpp"
#include "scout/metrics.hpp"
#include "scout/nets.hpp"

using namespace scout;
namespace fs = std::filesystem;

namespace {

const char* kCorridor =
    "#####\n"
    "#S..#\n"
    "#####\n";

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(static_cast<bool>(is));
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("scout_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int cli(std::vector<std::string> args) {
    std::vector<const char*> argv;
    argv.push_back("scout");
    for (const std::string& s : args) argv.push_back(s.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

StepLog make_step(int t, int from, int to, int action) {
    StepLog s;
    s.t = t;
    s.state_id = from;
    s.next_state_id = to;
    s.action = action;
    return s;
}

RunConfig fast_config(const std::string& policy, EnvKind env) {
    RunConfig cfg = default_config(env);
    cfg.policy = policy;
    cfg.seed = 3;
    cfg.n_init = 4;
    cfg.n_max = 8;
    cfg.n_freq = 2;
    cfg.n_iters = 5;
    cfg.batch_size = 4;
    cfg.plan.depth = 1;
    cfg.plan.b = 1;
    return cfg;
}

}  // namespace

TEST_SUITE("cli_metrics") {

TEST_CASE("empty config object yields the per-environment defaults") {
    RunConfig open = parse_config("{}");
    CHECK(open.env == EnvKind::OpenLabyrinth);
    CHECK(open.policy == "novelty");
    CHECK(open.n_max == 1000);
    CHECK(open.n_freq == 1);
    CHECK(open.lr == 0.00025);
    CHECK(open.n_iters == 30000);
    CHECK(open.n_x == 2);
    CHECK(open.k == 5);
    CHECK(open.plan.depth == 5);
    CHECK(open.plan.epsilon == 0.0);
    CHECK(open.omega == 0.5);
    CHECK(open.delta == 6.0);
    CHECK(open.buffer_capacity == 1000);

    RunConfig four = parse_config("{\"env\":\"four_room\"}");
    CHECK(four.n_max == 2000);
    CHECK(four.n_freq == 3);
    CHECK(four.plan.epsilon == 0.2);

    RunConfig maze = parse_config("{\"env\":\"key_maze\"}");
    CHECK(maze.n_max == 4000);
    CHECK(maze.n_x == 3);
    CHECK(maze.lr == 0.000025);
    CHECK(maze.n_iters == 50000);
    CHECK(maze.plan.epsilon == 0.1);
}

TEST_CASE("config validation names the key and the constraint") {
    CHECK_THROWS_WITH(parse_config("{\"epsilon\":1.5}"),
                      "config: epsilon must lie in [0, 1]");
    CHECK_THROWS_WITH(parse_config("{\"chi\":1}"), "config: unknown key \"chi\"");
    CHECK_THROWS_WITH(parse_config("{\"gamma\":1.0}"),
                      "config: gamma must lie in [0, 1)");
}

TEST_CASE("serialize and parse round-trip the config") {
    RunConfig cfg = default_config(EnvKind::FourRoom);
    cfg.policy = "hash";
    cfg.seed = 17;
    cfg.lr = 0.125;
    cfg.plan.depth = 3;
    cfg.plan.b = 2;
    RunConfig back = parse_config(serialize_config(cfg));
    CHECK(back == cfg);
}

TEST_CASE("env override rebuilds defaults before applying file keys") {
    RunConfig cfg = parse_config("{\"env\":\"four_room\",\"seed\":9}", "open_labyrinth");
    CHECK(cfg.env == EnvKind::OpenLabyrinth);
    CHECK(cfg.n_max == 1000);  // open defaults, not four_room's 2000
    CHECK(cfg.seed == 9);
}

TEST_CASE("coverage replay matches the worked examples") {
    Env env = Env::from_layout_text(kCorridor);
    RunLog log;
    log.config = default_config(EnvKind::OpenLabyrinth);
    log.initial_state_id = 0;

    SUBCASE("one step visits two states, both exactly once") {
        log.steps.push_back(make_step(1, 0, 1, 3));
        auto series = compute_coverage(log, env);
        REQUIRE(series.size() == 1);
        CHECK(series[0].unique_visited == 2);
        CHECK(series[0].visited_once_fraction == 1.0);
        CHECK(series[0].coverage_fraction == doctest::Approx(2.0 / 3.0));
    }

    SUBCASE("oscillating between two cells drives the once-fraction to zero") {
        for (int t = 1; t <= 100; ++t) {
            int from = t % 2 == 1 ? 0 : 1;
            log.steps.push_back(make_step(t, from, 1 - from, t % 2 == 1 ? 3 : 2));
        }
        auto series = compute_coverage(log, env);
        REQUIRE(series.size() == 100);
        CHECK(series.back().unique_visited == 2);
        CHECK(series.back().visited_once_fraction == 0.0);
    }
}

TEST_CASE("coverage replay agrees with the online log of a real run") {
    RunConfig cfg = fast_config("novelty", EnvKind::OpenLabyrinth);
    Env env = Env::load(EnvKind::OpenLabyrinth, cfg.gamma);
    RunLog log = run_exploration(cfg, env);
    REQUIRE(!log.aborted);
    auto series = compute_coverage(log, env);
    REQUIRE(series.size() == log.steps.size());
    for (size_t i = 0; i < series.size(); ++i) {
        CHECK(series[i].step == log.steps[i].t);
        CHECK(series[i].unique_visited == log.steps[i].unique_visited);
        CHECK(series[i].coverage_fraction == log.steps[i].coverage_fraction);
        CHECK(series[i].visited_once_fraction == log.steps[i].visited_once_fraction);
        CHECK(series[i].mean_r_intr == log.steps[i].mean_r_intr);
    }
}

TEST_CASE("metrics csv rows join loss reports onto steps") {
    RunLog log;
    log.config = default_config(EnvKind::OpenLabyrinth);
    log.initial_state_id = 0;
    StepLog s1 = make_step(1, 0, 1, 3);
    s1.unique_visited = 2;
    s1.coverage_fraction = 0.5;
    s1.visited_once_fraction = 1.0;
    s1.mean_r_intr = 0.25;
    StepLog s2 = make_step(2, 1, 0, 2);
    s2.unique_visited = 2;
    s2.coverage_fraction = 0.5;
    s2.visited_once_fraction = 0.5;
    s2.mean_r_intr = 0.5;
    StepLog s3 = make_step(3, 0, 1, 3);
    s3.unique_visited = 2;
    s3.coverage_fraction = 0.5;
    s3.visited_once_fraction = 0.0;
    s3.mean_r_intr = 0.75;
    log.steps = {s1, s2, s3};
    TrainRound round;
    round.t = 1;
    round.iters = 7;
    round.gate_mean = 0.5;
    round.last.l_q = 0.5;
    round.last.l_r = 0.25;
    round.last.l_g = 1.0;
    round.last.l_tau = 0.125;
    round.last.l_d1 = 2.0;
    round.last.l_csc = 4.0;
    log.rounds = {round};
    log.steps_taken = 3;

    fs::path dir = fresh_dir("metrics_csv");
    write_metrics_csv(log, (dir / "metrics.csv").string());
    std::string text = slurp(dir / "metrics.csv");
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    CHECK(line ==
          "step,unique_visited,coverage_fraction,visited_once_fraction,mean_r_intr,"
          "L_Q,L_R,L_G,L_tau,L_d1,L_csc,iters_used");
    std::getline(is, line);
    CHECK(line == "1,2,0.5,1.0,0.25,0.0,0.0,0.0,0.0,0.0,0.0,0");
    std::getline(is, line);
    CHECK(line == "2,2,0.5,0.5,0.5,0.5,0.25,1.0,0.125,2.0,4.0,7");
    std::getline(is, line);
    CHECK(line == "3,2,0.5,0.0,0.75,0.5,0.25,1.0,0.125,2.0,4.0,0");
}

TEST_CASE("runlog ndjson round-trips and rewrites byte for byte") {
    RunConfig cfg = fast_config("novelty", EnvKind::OpenLabyrinth);
    RunLog log = run_exploration(cfg);
    REQUIRE(!log.aborted);
    REQUIRE(!log.rounds.empty());

    fs::path dir = fresh_dir("runlog");
    write_runlog_ndjson(log, (dir / "a.ndjson").string());
    RunLog back = read_runlog_ndjson((dir / "a.ndjson").string());
    CHECK(back == log);
    write_runlog_ndjson(back, (dir / "b.ndjson").string());
    CHECK(slurp(dir / "a.ndjson") == slurp(dir / "b.ndjson"));
}

TEST_CASE("heatmap counts arrivals and sums to the steps taken") {
    Env env = Env::from_layout_text(kCorridor);
    RunConfig cfg = fast_config("count", EnvKind::OpenLabyrinth);
    cfg.n_max = 4;
    RunLog log = run_exploration(cfg, env);
    Tensor grid = visit_heatmap(log, env);
    REQUIRE(grid.rows == 3);
    REQUIRE(grid.cols == 5);
    double sum = 0.0;
    for (double v : grid.data) sum += v;
    CHECK(sum == 4.0);
    // arrivals from the hand walk: (1,2) twice, (1,3) twice, start never
    CHECK(grid.at(1, 1) == 0.0);
    CHECK(grid.at(1, 2) == 2.0);
    CHECK(grid.at(1, 3) == 2.0);

    fs::path dir = fresh_dir("heatmap");
    write_heatmap_csv(grid, (dir / "heatmap.csv").string());
    CHECK(slurp(dir / "heatmap.csv") == "0,0,0,0,0\n0,0,2,2,0\n0,0,0,0,0\n");
}

TEST_CASE("aggregate rows match hand-computed mean and stderr") {
    std::vector<RunLog> logs(3);
    int steps[3] = {10, 20, 30};
    double cov[3] = {0.25, 0.5, 0.75};
    for (int i = 0; i < 3; ++i) {
        logs[static_cast<size_t>(i)].config = default_config(EnvKind::OpenLabyrinth);
        logs[static_cast<size_t>(i)].steps_taken = steps[i];
        logs[static_cast<size_t>(i)].unique_visited = steps[i];
        logs[static_cast<size_t>(i)].coverage_fraction = cov[i];
        logs[static_cast<size_t>(i)].visited_once_fraction = 0.5;
    }
    logs[2].terminal = true;  // steps_to_goal: 1000, 1000, 30

    fs::path dir = fresh_dir("aggregate");
    write_aggregate_csv(logs, (dir / "aggregate.csv").string());
    std::istringstream is(slurp(dir / "aggregate.csv"));
    std::string line;
    std::getline(is, line);
    CHECK(line == "metric,mean,stderr,n");
    auto next_row = [&](const std::string& name) {
        std::getline(is, line);
        REQUIRE(line.rfind(name + ",", 0) == 0);
        std::istringstream row(line.substr(name.size() + 1));
        double mean = 0.0, se = 0.0;
        char comma = 0;
        row >> mean >> comma >> se;
        return std::pair<double, double>(mean, se);
    };
    auto [m1, s1] = next_row("steps_taken");
    CHECK(m1 == doctest::Approx(20.0));
    CHECK(s1 == doctest::Approx(10.0 / std::sqrt(3.0)).epsilon(1e-12));
    auto [m2, s2] = next_row("steps_to_goal");
    double goal_mean = (1000.0 + 1000.0 + 30.0) / 3.0;
    double goal_ss = 2.0 * (1000.0 - goal_mean) * (1000.0 - goal_mean) +
                     (30.0 - goal_mean) * (30.0 - goal_mean);
    CHECK(m2 == doctest::Approx(goal_mean));
    CHECK(s2 == doctest::Approx(std::sqrt(goal_ss / 2.0) / std::sqrt(3.0)).epsilon(1e-12));
    auto [m3, s3] = next_row("unique_visited");
    CHECK(m3 == doctest::Approx(20.0));
    auto [m4, s4] = next_row("coverage_fraction");
    CHECK(m4 == doctest::Approx(0.5));
    CHECK(s4 == doctest::Approx(0.25 / std::sqrt(3.0)).epsilon(1e-12));
    auto [m5, s5] = next_row("visited_once_fraction");
    CHECK(m5 == doctest::Approx(0.5));
    CHECK(s5 == doctest::Approx(0.0));
}

TEST_CASE("single-run aggregate reports zero stderr") {
    std::vector<RunLog> logs(1);
    logs[0].config = default_config(EnvKind::OpenLabyrinth);
    logs[0].steps_taken = 42;
    fs::path dir = fresh_dir("aggregate_one");
    write_aggregate_csv(logs, (dir / "aggregate.csv").string());
    std::istringstream is(slurp(dir / "aggregate.csv"));
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    CHECK(line == "steps_taken,42.0,0.0,1");
}

TEST_CASE("representation export lists distinct buffered states") {
    RunConfig cfg = fast_config("novelty", EnvKind::KeyMaze);
    cfg.n_max = 12;
    Env env = Env::load(EnvKind::KeyMaze, cfg.gamma);
    RunArtifacts art;
    RunLog log = run_exploration(cfg, env, nullptr, &art);
    REQUIRE(!log.aborted);
    REQUIRE(art.nets != nullptr);
    REQUIRE(art.buffer != nullptr);

    fs::path dir = fresh_dir("repr");
    export_representation(*art.buffer, art.nets->encoder, env, (dir / "states.csv").string(),
                          (dir / "transitions.csv").string());
    std::istringstream is(slurp(dir / "states.csv"));
    std::string header;
    std::getline(is, header);
    CHECK(header == "state_id,row,col,has_key,x0,x1,x2");  // three encoded coordinates

    std::set<int> distinct;
    for (int i = 0; i < art.buffer->size(); ++i) {
        distinct.insert((*art.buffer)[i].state_id);
        distinct.insert((*art.buffer)[i].next_state_id);
    }
    int rows = 0;
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == static_cast<int>(distinct.size()));

    // exporting again without touching anything reproduces the bytes
    export_representation(*art.buffer, art.nets->encoder, env, (dir / "states2.csv").string(),
                          (dir / "transitions2.csv").string());
    CHECK(slurp(dir / "states.csv") == slurp(dir / "states2.csv"));
    CHECK(slurp(dir / "transitions.csv") == slurp(dir / "transitions2.csv"));
}

TEST_CASE("id-based export regenerates the buffer-based files") {
    Env env = Env::from_layout_text(kCorridor);
    RunConfig cfg = fast_config("count", EnvKind::OpenLabyrinth);
    cfg.n_max = 4;
    RunArtifacts art;
    RunLog log = run_exploration(cfg, env, nullptr, &art);
    REQUIRE(art.buffer != nullptr);

    ModelNets nets(env.obs_dim(), 2, env.num_actions());
    nets.init(11);
    fs::path dir = fresh_dir("repr_ids");
    export_representation(*art.buffer, nets.encoder, env, (dir / "a_states.csv").string(),
                          (dir / "a_transitions.csv").string());

    std::vector<int> ids{log.initial_state_id};
    std::vector<std::array<int, 3>> triples;
    for (const StepLog& s : log.steps) {
        ids.push_back(s.state_id);
        ids.push_back(s.next_state_id);
        triples.push_back({s.state_id, s.action, s.next_state_id});
    }
    Env probe = Env::from_layout_text(kCorridor);
    export_representation_for_ids(ids, triples, nets.encoder, probe,
                                  (dir / "b_states.csv").string(),
                                  (dir / "b_transitions.csv").string());
    CHECK(slurp(dir / "a_states.csv") == slurp(dir / "b_states.csv"));
    CHECK(slurp(dir / "a_transitions.csv") == slurp(dir / "b_transitions.csv"));
}

TEST_CASE("summary json records goal steps and totals") {
    fs::path dir = fresh_dir("summary");

    RunConfig cfg = fast_config("count", EnvKind::OpenLabyrinth);
    cfg.n_max = 50;
    RunLog maze_log = run_exploration(cfg, Env::from_layout_text(
                                               "#####\n"
                                               "#SKR#\n"
                                               "#####\n"));
    REQUIRE(maze_log.terminal);
    write_summary_json(maze_log, (dir / "maze.json").string());
    nlohmann::json maze = nlohmann::json::parse(slurp(dir / "maze.json"));
    CHECK(maze.at("steps_to_goal").get<int>() == 5);
    CHECK(maze.at("terminal").get<bool>());

    cfg.n_max = 4;
    RunLog open_log = run_exploration(cfg, Env::from_layout_text(kCorridor));
    write_summary_json(open_log, (dir / "open.json").string());
    nlohmann::json open = nlohmann::json::parse(slurp(dir / "open.json"));
    CHECK(open.at("steps_to_goal").get<int>() == 4);  // the cap, never terminal
    CHECK(open.at("config").at("policy").get<std::string>() == "count");
}

TEST_CASE("cli run writes the artifact set and honors exit codes") {
    setenv("SCOUT_LOG_LEVEL", "error", 1);
    fs::path dir = fresh_dir("cli_run");
    fs::path cfg_path = dir / "config.json";
    {
        std::ofstream os(cfg_path);
        os << "{\"policy\":\"novelty\",\"seed\":3,\"n_init\":4,\"n_max\":8,\"n_freq\":2,"
              "\"n_iters\":5,\"batch_size\":4,\"depth\":1,\"b\":1}\n";
    }
    fs::path out = dir / "out";
    int code = cli({"run", "--config", cfg_path.string(), "--out", out.string(),
                    "--plan-trace"});
    CHECK(code == 0);
    for (const char* name : {"runlog.ndjson", "metrics.csv", "summary.json", "heatmap.csv",
                             "checkpoint.json", "representation.csv", "transitions.csv",
                             "plan_trace.ndjson"})
        CHECK(fs::exists(out / name));

    SUBCASE("metrics recomputes and rewrites the same csv") {
        std::string before = slurp(out / "metrics.csv");
        CHECK(cli({"metrics", "--out", out.string()}) == 0);
        CHECK(slurp(out / "metrics.csv") == before);
    }

    SUBCASE("export regenerates heatmap and representation identically") {
        std::string heat = slurp(out / "heatmap.csv");
        std::string states = slurp(out / "representation.csv");
        std::string trans = slurp(out / "transitions.csv");
        CHECK(cli({"export", "--out", out.string()}) == 0);
        CHECK(slurp(out / "heatmap.csv") == heat);
        CHECK(slurp(out / "representation.csv") == states);
        CHECK(slurp(out / "transitions.csv") == trans);
    }

    SUBCASE("tampered log fails replay verification") {
        RunLog log = read_runlog_ndjson((out / "runlog.ndjson").string());
        log.steps.back().unique_visited += 1;
        fs::path bad = dir / "bad";
        fs::create_directories(bad);
        write_runlog_ndjson(log, (bad / "runlog.ndjson").string());
        CHECK(cli({"metrics", "--out", bad.string()}) == 1);
    }
}

TEST_CASE("cli rejects bad invocations with exit 2") {
    setenv("SCOUT_LOG_LEVEL", "error", 1);
    fs::path dir = fresh_dir("cli_bad");
    CHECK(cli({"run", "--config", (dir / "missing.json").string(),
               "--out", (dir / "out").string()}) == 2);
    CHECK(cli({"run", "--bogus"}) == 2);
    CHECK(cli({"run", "--env", "pacman", "--out", (dir / "out").string()}) == 2);
    CHECK(cli({"metrics", "--out", (dir / "nothing_here").string()}) == 2);
    CHECK(cli({}) == 2);
}

TEST_CASE("cli reports an aborted run with exit 1") {
    setenv("SCOUT_LOG_LEVEL", "error", 1);
    fs::path dir = fresh_dir("cli_abort");
    fs::path cfg_path = dir / "config.json";
    {
        std::ofstream os(cfg_path);
        os << "{\"policy\":\"novelty\",\"lr\":1e200,\"n_init\":4,\"n_max\":8,\"n_freq\":1,"
              "\"n_iters\":5,\"batch_size\":4,\"depth\":1,\"b\":1}\n";
    }
    fs::path out = dir / "out";
    CHECK(cli({"run", "--config", cfg_path.string(), "--out", out.string()}) == 1);
    CHECK(fs::exists(out / "runlog.ndjson"));  // the partial log is still persisted
}

TEST_CASE("cli sweep produces per-seed directories and an aggregate") {
    setenv("SCOUT_LOG_LEVEL", "error", 1);
    fs::path dir = fresh_dir("cli_sweep");
    fs::path out = dir / "out";
    int code = cli({"sweep", "--policy", "random", "--seed", "3", "--seeds", "2",
                    "--out", out.string()});
    CHECK(code == 0);
    CHECK(fs::exists(out / "seed_3" / "runlog.ndjson"));
    CHECK(fs::exists(out / "seed_4" / "runlog.ndjson"));
    CHECK(fs::exists(out / "aggregate.csv"));
    RunLog a = read_runlog_ndjson((out / "seed_3" / "runlog.ndjson").string());
    RunLog b = read_runlog_ndjson((out / "seed_4" / "runlog.ndjson").string());
    CHECK(a.config.seed == 3);
    CHECK(b.config.seed == 4);
    CHECK(a.steps != b.steps);
}

}  // TEST_SUITE
