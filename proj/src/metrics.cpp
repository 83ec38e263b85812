#include "scout/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scout/common.hpp"

namespace scout {

namespace {

using njson = nlohmann::ordered_json;

// shortest representation that parses back to the same double
std::string num(double x) { return njson(x).dump(); }

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    check(static_cast<bool>(os), "metrics: cannot write file: " + path);
    return os;
}

njson step_line(const StepLog& s) {
    njson j;
    j["type"] = "step";
    j["t"] = s.t;
    j["state_id"] = s.state_id;
    j["next_state_id"] = s.next_state_id;
    j["action"] = s.action;
    j["random_action"] = s.random_action;
    j["r_extr"] = s.r_extr;
    j["r_intr"] = s.r_intr;
    j["gamma"] = s.gamma;
    j["terminal"] = s.terminal;
    j["unique_visited"] = s.unique_visited;
    j["coverage_fraction"] = s.coverage_fraction;
    j["visited_once_fraction"] = s.visited_once_fraction;
    j["mean_r_intr"] = s.mean_r_intr;
    return j;
}

njson round_line(const TrainRound& r) {
    njson j;
    j["type"] = "round";
    j["t"] = r.t;
    j["iters"] = r.iters;
    j["gate_mean"] = r.gate_mean;
    j["L_Q"] = r.last.l_q;
    j["L_R"] = r.last.l_r;
    j["L_G"] = r.last.l_g;
    j["L_tau"] = r.last.l_tau;
    j["L_d1"] = r.last.l_d1;
    j["L_csc"] = r.last.l_csc;
    j["total"] = r.last.total;
    return j;
}

StepLog parse_step(const njson& j) {
    StepLog s;
    s.t = j.at("t").get<int>();
    s.state_id = j.at("state_id").get<int>();
    s.next_state_id = j.at("next_state_id").get<int>();
    s.action = j.at("action").get<int>();
    s.random_action = j.at("random_action").get<bool>();
    s.r_extr = j.at("r_extr").get<double>();
    s.r_intr = j.at("r_intr").get<double>();
    s.gamma = j.at("gamma").get<double>();
    s.terminal = j.at("terminal").get<bool>();
    s.unique_visited = j.at("unique_visited").get<int>();
    s.coverage_fraction = j.at("coverage_fraction").get<double>();
    s.visited_once_fraction = j.at("visited_once_fraction").get<double>();
    s.mean_r_intr = j.at("mean_r_intr").get<double>();
    return s;
}

TrainRound parse_round(const njson& j) {
    TrainRound r;
    r.t = j.at("t").get<int>();
    r.iters = j.at("iters").get<int>();
    r.gate_mean = j.at("gate_mean").get<double>();
    r.last.l_q = j.at("L_Q").get<double>();
    r.last.l_r = j.at("L_R").get<double>();
    r.last.l_g = j.at("L_G").get<double>();
    r.last.l_tau = j.at("L_tau").get<double>();
    r.last.l_d1 = j.at("L_d1").get<double>();
    r.last.l_csc = j.at("L_csc").get<double>();
    r.last.total = j.at("total").get<double>();
    return r;
}

void write_states_csv(const std::vector<int>& ids, const Tensor& encoded, const Env& env,
                      const std::string& path) {
    std::ofstream os = open_out(path);
    os << "state_id,row,col,has_key";
    for (int j = 0; j < encoded.cols; ++j) os << ",x" << j;
    os << "\n";
    for (size_t i = 0; i < ids.size(); ++i) {
        Env::StateInfo info = env.state_info(ids[i]);
        os << ids[i] << "," << info.row << "," << info.col << "," << (info.has_key ? 1 : 0);
        for (int j = 0; j < encoded.cols; ++j)
            os << "," << num(encoded.at(static_cast<int>(i), j));
        os << "\n";
    }
}

void write_transitions_csv(const std::set<std::array<int, 3>>& triples, const std::string& path) {
    std::ofstream os = open_out(path);
    os << "from_id,action,to_id\n";
    for (const auto& tr : triples) os << tr[0] << "," << tr[1] << "," << tr[2] << "\n";
}

}  // namespace

std::vector<CoverageMetrics> compute_coverage(const RunLog& log, const Env& env) {
    std::vector<int> counts(static_cast<size_t>(env.num_states()), 0);
    int unique = 0;
    int once = 0;
    auto visit = [&](int id) {
        check(id >= 0 && id < env.num_states(), "metrics: state id out of range");
        int& c = counts[static_cast<size_t>(id)];
        if (c == 0) {
            ++unique;
            ++once;
        } else if (c == 1) {
            --once;
        }
        ++c;
    };
    visit(log.initial_state_id);

    std::vector<CoverageMetrics> out;
    out.reserve(log.steps.size());
    for (const StepLog& s : log.steps) {
        visit(s.next_state_id);
        CoverageMetrics m;
        m.step = s.t;
        m.unique_visited = unique;
        m.coverage_fraction = static_cast<double>(unique) / env.num_states();
        m.visited_once_fraction =
            unique == 0 ? 0.0 : static_cast<double>(once) / static_cast<double>(unique);
        m.mean_r_intr = s.mean_r_intr;
        out.push_back(m);
    }
    return out;
}

void write_metrics_csv(const RunLog& log, const std::string& path) {
    std::ofstream os = open_out(path);
    os << "step,unique_visited,coverage_fraction,visited_once_fraction,mean_r_intr,"
          "L_Q,L_R,L_G,L_tau,L_d1,L_csc,iters_used\n";
    size_t ri = 0;
    LossReport cur;  // zeros until the first round finishes
    for (const StepLog& s : log.steps) {
        int iters_used = 0;
        while (ri < log.rounds.size() && log.rounds[ri].t <= s.t - 1) {
            cur = log.rounds[ri].last;
            if (log.rounds[ri].t == s.t - 1) iters_used = log.rounds[ri].iters;
            ++ri;
        }
        os << s.t << "," << s.unique_visited << "," << num(s.coverage_fraction) << ","
           << num(s.visited_once_fraction) << "," << num(s.mean_r_intr) << "," << num(cur.l_q)
           << "," << num(cur.l_r) << "," << num(cur.l_g) << "," << num(cur.l_tau) << ","
           << num(cur.l_d1) << "," << num(cur.l_csc) << "," << iters_used << "\n";
    }
}

Tensor visit_heatmap(const RunLog& log, const Env& env) {
    Tensor grid(env.height(), env.width(), 0.0);
    for (const StepLog& s : log.steps) {
        Env::StateInfo info = env.state_info(s.next_state_id);
        grid.at(info.row, info.col) += 1.0;
    }
    return grid;
}

void write_heatmap_csv(const Tensor& grid, const std::string& path) {
    std::ofstream os = open_out(path);
    for (int i = 0; i < grid.rows; ++i) {
        for (int j = 0; j < grid.cols; ++j) {
            if (j > 0) os << ",";
            os << static_cast<long long>(grid.at(i, j));
        }
        os << "\n";
    }
}

void export_representation(const HistoryBuffer& buffer, const Mlp& encoder, const Env& env,
                           const std::string& states_path, const std::string& transitions_path) {
    std::map<int, const Tensor*> obs_of;
    std::set<std::array<int, 3>> triples;
    for (int i = 0; i < buffer.size(); ++i) {
        const TransitionRecord& rec = buffer[i];
        obs_of.emplace(rec.state_id, &rec.obs);
        obs_of.emplace(rec.next_state_id, &rec.next_obs);
        triples.insert({rec.state_id, rec.action, rec.next_state_id});
    }
    check(!obs_of.empty(), "metrics: empty buffer");

    std::vector<int> ids;
    ids.reserve(obs_of.size());
    Tensor batch(static_cast<int>(obs_of.size()), env.obs_dim());
    int r = 0;
    for (const auto& [id, obs] : obs_of) {
        ids.push_back(id);
        for (int j = 0; j < env.obs_dim(); ++j) batch.at(r, j) = obs->at(0, j);
        ++r;
    }
    write_states_csv(ids, encoder.forward(batch), env, states_path);
    write_transitions_csv(triples, transitions_path);
}

void export_representation_for_ids(const std::vector<int>& ids,
                                   const std::vector<std::array<int, 3>>& transitions,
                                   const Mlp& encoder, Env& env, const std::string& states_path,
                                   const std::string& transitions_path) {
    std::vector<int> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    check(!sorted.empty(), "metrics: no states to export");

    Tensor batch(static_cast<int>(sorted.size()), env.obs_dim());
    for (size_t i = 0; i < sorted.size(); ++i) {
        Env::StateInfo info = env.state_info(sorted[i]);
        env.teleport(info.row, info.col, info.has_key);
        Tensor obs = env.obs();
        for (int j = 0; j < env.obs_dim(); ++j) batch.at(static_cast<int>(i), j) = obs.at(0, j);
    }
    std::set<std::array<int, 3>> triples(transitions.begin(), transitions.end());
    write_states_csv(sorted, encoder.forward(batch), env, states_path);
    write_transitions_csv(triples, transitions_path);
}

void write_runlog_ndjson(const RunLog& log, const std::string& path) {
    std::ofstream os = open_out(path);
    {
        njson j;
        j["type"] = "run";
        j["config"] = njson::parse(serialize_config(log.config));
        j["initial_state_id"] = log.initial_state_id;
        os << j.dump() << "\n";
    }
    size_t ri = 0;
    for (const StepLog& s : log.steps) {
        while (ri < log.rounds.size() && log.rounds[ri].t < s.t) {
            os << round_line(log.rounds[ri]).dump() << "\n";
            ++ri;
        }
        os << step_line(s).dump() << "\n";
    }
    for (; ri < log.rounds.size(); ++ri) os << round_line(log.rounds[ri]).dump() << "\n";
    {
        njson j;
        j["type"] = "summary";
        j["terminal"] = log.terminal;
        j["aborted"] = log.aborted;
        j["abort_reason"] = log.abort_reason;
        j["steps_taken"] = log.steps_taken;
        j["unique_visited"] = log.unique_visited;
        j["coverage_fraction"] = log.coverage_fraction;
        j["visited_once_fraction"] = log.visited_once_fraction;
        os << j.dump() << "\n";
    }
}

RunLog read_runlog_ndjson(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    check(static_cast<bool>(is), "metrics: cannot open file: " + path);
    RunLog log;
    bool saw_run = false;
    bool saw_summary = false;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        njson j;
        try {
            j = njson::parse(line);
        } catch (const std::exception&) {
            fail("metrics: bad json on line " + std::to_string(lineno) + " of " + path);
        }
        const std::string type = j.at("type").get<std::string>();
        if (type == "run") {
            log.config = parse_config(j.at("config").dump());
            log.initial_state_id = j.at("initial_state_id").get<int>();
            saw_run = true;
        } else if (type == "step") {
            log.steps.push_back(parse_step(j));
        } else if (type == "round") {
            log.rounds.push_back(parse_round(j));
        } else if (type == "summary") {
            log.terminal = j.at("terminal").get<bool>();
            log.aborted = j.at("aborted").get<bool>();
            log.abort_reason = j.at("abort_reason").get<std::string>();
            log.steps_taken = j.at("steps_taken").get<int>();
            log.unique_visited = j.at("unique_visited").get<int>();
            log.coverage_fraction = j.at("coverage_fraction").get<double>();
            log.visited_once_fraction = j.at("visited_once_fraction").get<double>();
            saw_summary = true;
        } else {
            fail("metrics: unknown line type: " + type);
        }
    }
    check(saw_run, "metrics: log has no run line: " + path);
    check(saw_summary, "metrics: log has no summary line: " + path);
    return log;
}

void write_summary_json(const RunLog& log, const std::string& path) {
    njson j;
    j["config"] = njson::parse(serialize_config(log.config));
    j["steps_taken"] = log.steps_taken;
    j["terminal"] = log.terminal;
    j["aborted"] = log.aborted;
    j["abort_reason"] = log.abort_reason;
    // steps to the terminal state, with unfinished runs counted at the cap
    j["steps_to_goal"] = log.terminal ? log.steps_taken : log.config.n_max;
    j["unique_visited"] = log.unique_visited;
    j["coverage_fraction"] = log.coverage_fraction;
    j["visited_once_fraction"] = log.visited_once_fraction;
    j["mean_r_intr_final"] = log.steps.empty() ? 0.0 : log.steps.back().mean_r_intr;
    long long iters_total = 0;
    for (const TrainRound& r : log.rounds) iters_total += r.iters;
    j["rounds"] = log.rounds.size();
    j["iters_total"] = iters_total;
    std::ofstream os = open_out(path);
    os << j.dump(2) << "\n";
}

void write_aggregate_csv(const std::vector<RunLog>& logs, const std::string& path) {
    check(!logs.empty(), "metrics: no runs to aggregate");
    std::ofstream os = open_out(path);
    os << "metric,mean,stderr,n\n";
    const size_t n = logs.size();
    auto emit = [&](const char* name, auto value_of) {
        double mean = 0.0;
        for (const RunLog& l : logs) mean += value_of(l);
        mean /= static_cast<double>(n);
        double se = 0.0;
        if (n > 1) {
            double ss = 0.0;
            for (const RunLog& l : logs) {
                double d = value_of(l) - mean;
                ss += d * d;
            }
            se = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
        }
        os << name << "," << num(mean) << "," << num(se) << "," << n << "\n";
    };
    emit("steps_taken", [](const RunLog& l) { return static_cast<double>(l.steps_taken); });
    emit("steps_to_goal", [](const RunLog& l) {
        return static_cast<double>(l.terminal ? l.steps_taken : l.config.n_max);
    });
    emit("unique_visited", [](const RunLog& l) { return static_cast<double>(l.unique_visited); });
    emit("coverage_fraction", [](const RunLog& l) { return l.coverage_fraction; });
    emit("visited_once_fraction", [](const RunLog& l) { return l.visited_once_fraction; });
}

void write_plan_trace_ndjson(const std::vector<PlanTraceEntry>& trace, const std::string& path) {
    std::ofstream os = open_out(path);
    for (const PlanTraceEntry& e : trace) {
        njson j;
        j["type"] = "plan";
        j["t"] = e.t;
        j["chosen"] = e.chosen;
        njson nodes = njson::array();
        for (const PlanNode& n : e.nodes) {
            njson jn;
            jn["path"] = n.path;
            jn["budget"] = n.budget;
            jn["x"] = n.x.data;
            jn["expansion"] = n.expansion;
            njson rows = njson::array();
            for (int d = 0; d < n.q_hat.rows; ++d) {
                njson row = njson::array();
                for (int c = 0; c < n.q_hat.cols; ++c) row.push_back(n.q_hat.at(d, c));
                rows.push_back(row);
            }
            jn["q_hat"] = rows;
            nodes.push_back(std::move(jn));
        }
        j["nodes"] = std::move(nodes);
        os << j.dump() << "\n";
    }
}

}  // namespace scout
