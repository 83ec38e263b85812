#include "scout/agent.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <unordered_map>
#include <utility>

#include "scout/common.hpp"
#include "scout/novelty.hpp"
#include "scout/rng.hpp"
#include "scout/tape.hpp"

namespace scout {

namespace {

constexpr std::uint64_t kActionStream = 20;
constexpr std::uint64_t kHashProjStream = 21;
constexpr std::uint64_t kQSampleStream = 22;
constexpr std::uint64_t kObsQInitStream = 23;

constexpr int kHashBits = 16;
constexpr int kObsQSyncInterval = 1000;

// arrival counts over reachable-state ids; the start state counts as visited
class CoverageTracker {
  public:
    explicit CoverageTracker(int num_states) : counts_(static_cast<size_t>(num_states), 0) {}

    void visit(int id) {
        int& c = counts_[static_cast<size_t>(id)];
        if (c == 0) {
            ++unique_;
            ++once_;
        } else if (c == 1) {
            --once_;
        }
        ++c;
    }

    int count(int id) const { return counts_[static_cast<size_t>(id)]; }
    int unique() const { return unique_; }
    double coverage() const {
        return static_cast<double>(unique_) / static_cast<double>(counts_.size());
    }
    double once_fraction() const {
        return unique_ == 0 ? 0.0
                            : static_cast<double>(once_) / static_cast<double>(unique_);
    }

  private:
    std::vector<int> counts_;
    int unique_ = 0;
    int once_ = 0;
};

TransitionRecord make_record(const Tensor& obs, const Env::StepResult& sr, int action,
                             double r_intr, int sid, int spid) {
    TransitionRecord r;
    r.obs = obs;
    r.next_obs = sr.obs;
    r.action = action;
    r.r_extr = sr.r_extr;
    r.r_intr = r_intr;
    r.gamma = sr.gamma;
    r.terminal = sr.terminal;
    r.state_id = sid;
    r.next_state_id = spid;
    return r;
}

void log_step(RunLog& log, CoverageTracker& cov, const HistoryBuffer& buffer, int t, int sid,
              int spid, int action, bool random_action, const Env::StepResult& sr,
              double r_intr) {
    cov.visit(spid);
    StepLog s;
    s.t = t;
    s.state_id = sid;
    s.next_state_id = spid;
    s.action = action;
    s.random_action = random_action;
    s.r_extr = sr.r_extr;
    s.r_intr = r_intr;
    s.gamma = sr.gamma;
    s.terminal = sr.terminal;
    s.unique_visited = cov.unique();
    s.coverage_fraction = cov.coverage();
    s.visited_once_fraction = cov.once_fraction();
    s.mean_r_intr = buffer.mean_r_intr();
    log.steps.push_back(std::move(s));
}

void finalize(RunLog& log, const CoverageTracker& cov, const Env& env, int t) {
    log.terminal = env.terminated();
    log.steps_taken = t;
    log.unique_visited = cov.unique();
    log.coverage_fraction = cov.coverage();
    log.visited_once_fraction = cov.once_fraction();
}

// grow or roll the planner's point matrix in lockstep with the buffer
void append_point(Tensor& points, const Tensor& row, int capacity) {
    if (points.rows < capacity) {
        Tensor grown(points.rows + 1, row.cols);
        std::copy(points.data.begin(), points.data.end(), grown.data.begin());
        for (int j = 0; j < row.cols; ++j) grown.at(points.rows, j) = row.at(0, j);
        points = std::move(grown);
    } else {
        std::copy(points.data.begin() + points.cols, points.data.end(), points.data.begin());
        for (int j = 0; j < row.cols; ++j) points.at(points.rows - 1, j) = row.at(0, j);
    }
}

// novelty and pred_error share the training loop; only the bonus differs
RunLog run_model_based(const RunConfig& cfg, Env& env, bool pred_error,
                       std::vector<PlanTraceEntry>* plan_trace, RunArtifacts* artifacts) {
    RunLog log;
    log.config = cfg;
    Tensor obs = env.reset();
    int sid = env.state_id();
    log.initial_state_id = sid;
    CoverageTracker cov(env.num_states());
    cov.visit(sid);

    // heap-owned so the finished model and history can outlive this frame
    auto nets_owner = std::make_unique<ModelNets>(env.obs_dim(), cfg.n_x, env.num_actions());
    ModelNets& nets = *nets_owner;
    nets.init(cfg.seed);
    TrainerConfig tcfg;
    tcfg.batch_size = cfg.batch_size;
    tcfg.lr = cfg.lr;
    tcfg.c_d1 = cfg.c_d1;
    tcfg.omega = cfg.omega;
    tcfg.delta = cfg.delta;
    tcfg.seed = cfg.seed;
    Trainer trainer(nets, tcfg);
    auto buffer_owner = std::make_unique<HistoryBuffer>(cfg.buffer_capacity);
    HistoryBuffer& buffer = *buffer_owner;
    Tensor points(0, cfg.n_x);
    Rng action_rng = Rng::stream(cfg.seed, kActionStream);

    int t = 0;
    try {
        while (t < cfg.n_max && !env.terminated()) {
            bool warm = t < cfg.n_init;
            if (!warm && t % cfg.n_freq == 0) {
                Trainer::GateResult g = trainer.train_to_gate(buffer, cfg.n_iters);
                log.rounds.push_back(TrainRound{t, g.iters, g.gate_mean, g.last});
                // buffered novelty bonuses track the new encoder; prediction
                // errors stay as scored at experience time
                if (!pred_error) refresh_intrinsic_rewards(buffer, nets.encoder, cfg.k);
                points = encode_buffer_next(buffer, nets.encoder);
            }

            int a = 0;
            bool random_action = true;
            if (warm) {
                a = action_rng.uniform_int(env.num_actions());
            } else {
                Planner planner(nets, points, cfg.k, cfg.plan);
                PlanTraceEntry entry;
                std::vector<PlanNode>* sink = plan_trace != nullptr ? &entry.nodes : nullptr;
                a = planner.select_action(nets.encode(obs), action_rng, sink, &random_action);
                if (plan_trace != nullptr && !random_action) {
                    entry.t = t + 1;
                    entry.chosen = a;
                    plan_trace->push_back(std::move(entry));
                }
            }

            Env::StepResult sr = env.step(a);
            int spid = env.state_id();
            Tensor xp = nets.encode(sr.obs);
            double ri = 0.0;
            if (!warm) {
                if (pred_error) {
                    Tensor pred = nets.predict_transition(nets.encode(obs), a);
                    for (int j = 0; j < cfg.n_x; ++j) {
                        double d = pred.at(0, j) - xp.at(0, j);
                        ri += d * d;
                    }
                } else {
                    // scored against the buffer as it stands, before insertion
                    ri = novelty_score(xp, points, cfg.k);
                }
            }
            buffer.push(make_record(obs, sr, a, ri, sid, spid));
            append_point(points, xp, cfg.buffer_capacity);
            ++t;
            log_step(log, cov, buffer, t, sid, spid, a, random_action, sr, ri);
            obs = sr.obs;
            sid = spid;
        }
    } catch (const std::exception& e) {
        log.aborted = true;
        log.abort_reason = e.what();
    }
    finalize(log, cov, env, t);
    if (artifacts != nullptr) {
        artifacts->nets = std::move(nets_owner);
        artifacts->opt = std::make_unique<RmsProp>(std::move(trainer.optimizer()));
        artifacts->buffer = std::move(buffer_owner);
    }
    return log;
}

RunLog run_random(const RunConfig& cfg, Env& env, RunArtifacts* artifacts) {
    RunLog log;
    log.config = cfg;
    Tensor obs = env.reset();
    int sid = env.state_id();
    log.initial_state_id = sid;
    CoverageTracker cov(env.num_states());
    cov.visit(sid);
    auto buffer_owner = std::make_unique<HistoryBuffer>(cfg.buffer_capacity);
    HistoryBuffer& buffer = *buffer_owner;
    Rng action_rng = Rng::stream(cfg.seed, kActionStream);

    int t = 0;
    while (t < cfg.n_max && !env.terminated()) {
        int a = action_rng.uniform_int(env.num_actions());
        Env::StepResult sr = env.step(a);
        int spid = env.state_id();
        buffer.push(make_record(obs, sr, a, 0.0, sid, spid));
        ++t;
        log_step(log, cov, buffer, t, sid, spid, a, true, sr, 0.0);
        obs = sr.obs;
        sid = spid;
    }
    finalize(log, cov, env, t);
    if (artifacts != nullptr) artifacts->buffer = std::move(buffer_owner);
    return log;
}

RunLog run_count(const RunConfig& cfg, Env& env, RunArtifacts* artifacts) {
    RunLog log;
    log.config = cfg;
    Tensor obs = env.reset();
    int sid = env.state_id();
    log.initial_state_id = sid;
    CoverageTracker cov(env.num_states());
    cov.visit(sid);
    auto buffer_owner = std::make_unique<HistoryBuffer>(cfg.buffer_capacity);
    HistoryBuffer& buffer = *buffer_owner;

    int t = 0;
    while (t < cfg.n_max && !env.terminated()) {
        // greedy over the count bonus of each true one-step successor
        int best_a = 0;
        double best_bonus = -1.0;
        for (int a = 0; a < env.num_actions(); ++a) {
            int nid = env.peek_state_id(a);
            double bonus = 1.0 / std::sqrt(static_cast<double>(cov.count(nid)) + 1.0);
            if (bonus > best_bonus) {
                best_bonus = bonus;
                best_a = a;
            }
        }
        Env::StepResult sr = env.step(best_a);
        int spid = env.state_id();
        buffer.push(make_record(obs, sr, best_a, best_bonus, sid, spid));
        ++t;
        log_step(log, cov, buffer, t, sid, spid, best_a, false, sr, best_bonus);
        obs = sr.obs;
        sid = spid;
    }
    finalize(log, cov, env, t);
    if (artifacts != nullptr) artifacts->buffer = std::move(buffer_owner);
    return log;
}

// value learning on raw observations with a hashed count bonus
RunLog run_hash(const RunConfig& cfg, Env& env, RunArtifacts* artifacts) {
    RunLog log;
    log.config = cfg;
    Tensor obs = env.reset();
    int sid = env.state_id();
    log.initial_state_id = sid;
    CoverageTracker cov(env.num_states());
    cov.visit(sid);
    auto buffer_owner = std::make_unique<HistoryBuffer>(cfg.buffer_capacity);
    HistoryBuffer& buffer = *buffer_owner;

    Rng proj_rng = Rng::stream(cfg.seed, kHashProjStream);
    Tensor proj(kHashBits, env.obs_dim());
    for (double& v : proj.data) v = proj_rng.normal();
    auto code_of = [&proj](const Tensor& o) {
        int code = 0;
        for (int i = 0; i < kHashBits; ++i) {
            double dot = 0.0;
            for (int j = 0; j < proj.cols; ++j) dot += proj.at(i, j) * o.at(0, j);
            if (dot > 0.0) code |= 1 << i;
        }
        return code;
    };
    std::unordered_map<int, int> code_counts;
    ++code_counts[code_of(obs)];

    Mlp qnet = make_obs_q_net(env.obs_dim(), env.num_actions());
    Mlp qtgt = make_obs_q_net(env.obs_dim(), env.num_actions());
    Rng init_rng = Rng::stream(cfg.seed, kObsQInitStream);
    qnet.init(init_rng);
    qtgt.copy_params_from(qnet);
    RmsProp opt(cfg.lr);
    qnet.attach(opt);
    Rng sample_rng = Rng::stream(cfg.seed, kQSampleStream);
    Rng action_rng = Rng::stream(cfg.seed, kActionStream);
    int since_sync = 0;

    // one bootstrapped value update on a sampled batch
    auto q_update = [&]() {
        std::vector<int> idx = buffer.sample(sample_rng, cfg.batch_size);
        int b = static_cast<int>(idx.size());

        // deduplicate observations by state id so each is pushed through once
        std::unordered_map<int, int> seen;
        std::vector<int> s_row(static_cast<size_t>(b)), sp_row(static_cast<size_t>(b));
        std::vector<const Tensor*> uniques;
        auto row_of = [&](int id, const Tensor& o) {
            auto [it, inserted] = seen.try_emplace(id, static_cast<int>(uniques.size()));
            if (inserted) uniques.push_back(&o);
            return it->second;
        };
        for (int i = 0; i < b; ++i) {
            const TransitionRecord& rec = buffer[idx[static_cast<size_t>(i)]];
            s_row[static_cast<size_t>(i)] = row_of(rec.state_id, rec.obs);
            sp_row[static_cast<size_t>(i)] = row_of(rec.next_state_id, rec.next_obs);
        }
        Tensor unique_obs(static_cast<int>(uniques.size()), env.obs_dim());
        for (size_t u = 0; u < uniques.size(); ++u)
            for (int j = 0; j < env.obs_dim(); ++j) unique_obs.at(static_cast<int>(u), j) = uniques[u]->at(0, j);

        Tensor q_next = qnet.forward(unique_obs);
        Tensor q_next_tgt = qtgt.forward(unique_obs);
        Tensor y(b, 1);
        std::vector<int> actions(static_cast<size_t>(b));
        for (int i = 0; i < b; ++i) {
            const TransitionRecord& rec = buffer[idx[static_cast<size_t>(i)]];
            actions[static_cast<size_t>(i)] = rec.action;
            int urow = sp_row[static_cast<size_t>(i)];
            int astar = argmax_lowest(q_next.row(urow), q_next.cols);
            y.at(i, 0) =
                (rec.r_extr + rec.r_intr) + rec.gamma * q_next_tgt.at(urow, astar);
        }

        Tape tape;
        Mlp::Bound bound = qnet.bind(tape);
        int x = tape.input(unique_obs);
        int qall = qnet.forward_tape(tape, bound, x);
        int qsel = tape.select_cols(tape.gather_rows(qall, s_row), actions);
        int diff = tape.sub(qsel, tape.input(y));
        int loss = tape.mean(tape.mul(diff, diff));
        check(std::isfinite(tape.scalar_val(loss)),
              "agent: value loss diverged to a non-finite value");
        tape.backward(loss);
        opt.step();
        if (++since_sync >= kObsQSyncInterval) {
            qtgt.copy_params_from(qnet);
            since_sync = 0;
        }
    };

    int t = 0;
    try {
        while (t < cfg.n_max && !env.terminated()) {
            bool warm = t < cfg.n_init;
            if (!warm) q_update();

            int a = 0;
            bool random_action = true;
            if (warm) {
                a = action_rng.uniform_int(env.num_actions());
            } else {
                random_action = action_rng.uniform() < cfg.plan.epsilon;
                if (random_action) {
                    a = action_rng.uniform_int(env.num_actions());
                } else {
                    Tensor qv = qnet.forward(obs);
                    a = argmax_lowest(qv.row(0), qv.cols);
                }
            }

            Env::StepResult sr = env.step(a);
            int spid = env.state_id();
            int code = code_of(sr.obs);
            double bonus = 1.0 / std::sqrt(static_cast<double>(code_counts[code]) + 1.0);
            ++code_counts[code];
            buffer.push(make_record(obs, sr, a, bonus, sid, spid));
            ++t;
            log_step(log, cov, buffer, t, sid, spid, a, random_action, sr, bonus);
            obs = sr.obs;
            sid = spid;
        }
    } catch (const std::exception& e) {
        log.aborted = true;
        log.abort_reason = e.what();
    }
    finalize(log, cov, env, t);
    if (artifacts != nullptr) artifacts->buffer = std::move(buffer_owner);
    return log;
}

}  // namespace

RunLog run_exploration(const RunConfig& cfg, Env env, std::vector<PlanTraceEntry>* plan_trace,
                       RunArtifacts* artifacts) {
    if (cfg.policy == "novelty") return run_model_based(cfg, env, false, plan_trace, artifacts);
    if (cfg.policy == "pred_error") return run_model_based(cfg, env, true, plan_trace, artifacts);
    if (cfg.policy == "random") return run_random(cfg, env, artifacts);
    if (cfg.policy == "count") return run_count(cfg, env, artifacts);
    if (cfg.policy == "hash") return run_hash(cfg, env, artifacts);
    fail("agent: unknown policy: " + cfg.policy);
}

RunLog run_exploration(const RunConfig& cfg, std::vector<PlanTraceEntry>* plan_trace,
                       RunArtifacts* artifacts) {
    return run_exploration(cfg, Env::load(cfg.env, cfg.gamma), plan_trace, artifacts);
}

}  // namespace scout
