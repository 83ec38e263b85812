#include "scout/losses.hpp"

#include <cmath>
#include <deque>
#include <string>

#include "scout/common.hpp"
#include "scout/tape.hpp"

namespace scout {

namespace {
// sub-stream roles under the trainer's seed
constexpr std::uint64_t kSampleStream = 10;
constexpr std::uint64_t kShuffleStream = 11;
constexpr std::uint64_t kDropoutStream = 12;
}  // namespace

Trainer::Trainer(ModelNets& nets, TrainerConfig cfg)
    : nets_(nets),
      cfg_(cfg),
      opt_(cfg.lr),
      sample_rng_(Rng::stream(cfg.seed, kSampleStream)),
      shuffle_rng_(Rng::stream(cfg.seed, kShuffleStream)),
      dropout_rng_(Rng::stream(cfg.seed, kDropoutStream)) {
    check(cfg_.batch_size > 0, "trainer: batch size must be positive");
    nets_.attach(opt_);
}

Trainer::BatchView Trainer::build_view(const HistoryBuffer& buffer,
                                       const std::vector<int>& idx) const {
    BatchView v;
    int b = static_cast<int>(idx.size());
    v.s_row.resize(idx.size());
    v.sp_row.resize(idx.size());
    v.actions.resize(idx.size());
    v.r_extr_col = Tensor(b, 1);
    v.gamma_col = Tensor(b, 1);

    std::unordered_map<int, int> row_of_state;
    std::vector<const Tensor*> unique_obs;
    auto row_for = [&](int state_id, const Tensor& obs) {
        auto [it, inserted] = row_of_state.try_emplace(state_id, static_cast<int>(unique_obs.size()));
        if (inserted) unique_obs.push_back(&obs);
        return it->second;
    };

    for (int i = 0; i < b; ++i) {
        check(idx[i] >= 0 && idx[i] < buffer.size(), "trainer: batch index out of range");
        const TransitionRecord& r = buffer[idx[i]];
        v.s_row[i] = row_for(r.state_id, r.obs);
        v.sp_row[i] = row_for(r.next_state_id, r.next_obs);
        v.actions[i] = r.action;
        v.r_extr_col.at(i, 0) = r.r_extr;
        v.gamma_col.at(i, 0) = r.gamma;
    }

    int obs_dim = unique_obs.empty() ? 0 : unique_obs[0]->cols;
    v.unique_obs = Tensor(static_cast<int>(unique_obs.size()), obs_dim);
    for (size_t u = 0; u < unique_obs.size(); ++u)
        for (int j = 0; j < obs_dim; ++j)
            v.unique_obs.at(static_cast<int>(u), j) = unique_obs[u]->at(0, j);
    return v;
}

Tensor Trainer::target_encode_rows(const HistoryBuffer& buffer, const std::vector<int>& idx) {
    // fill cache misses with one batched target-encoder pass
    std::vector<int> missing_records;
    std::unordered_map<int, int> missing_seen;
    for (int i : idx) {
        int sid = buffer[i].next_state_id;
        if (target_cache_.count(sid) || missing_seen.count(sid)) continue;
        missing_seen.emplace(sid, static_cast<int>(missing_records.size()));
        missing_records.push_back(i);
    }
    if (!missing_records.empty()) {
        Tensor m(static_cast<int>(missing_records.size()), nets_.target_encoder.in_dim());
        for (size_t u = 0; u < missing_records.size(); ++u) {
            const Tensor& o = buffer[missing_records[u]].next_obs;
            for (int j = 0; j < o.cols; ++j) m.at(static_cast<int>(u), j) = o.at(0, j);
        }
        Tensor enc = nets_.encode_target(m);
        for (size_t u = 0; u < missing_records.size(); ++u) {
            std::vector<double> row(enc.cols);
            for (int j = 0; j < enc.cols; ++j) row[static_cast<size_t>(j)] = enc.at(static_cast<int>(u), j);
            target_cache_[buffer[missing_records[u]].next_state_id] = std::move(row);
        }
    }
    Tensor out(static_cast<int>(idx.size()), nets_.n_x());
    for (size_t i = 0; i < idx.size(); ++i) {
        const auto& row = target_cache_.at(buffer[idx[i]].next_state_id);
        for (int j = 0; j < out.cols; ++j) out.at(static_cast<int>(i), j) = row[static_cast<size_t>(j)];
    }
    return out;
}

std::vector<double> Trainer::targets_from(const HistoryBuffer& buffer, const std::vector<int>& idx,
                                          const Tensor& xprime_rows) {
    int b = static_cast<int>(idx.size());
    Tensor q_live = nets_.q_values(xprime_rows);
    Tensor xt = target_encode_rows(buffer, idx);
    Tensor q_tgt = nets_.q_values_target(xt);

    std::vector<double> y(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) {
        const TransitionRecord& r = buffer[idx[static_cast<size_t>(i)]];
        int a_star = argmax_lowest(q_live.row(i), q_live.cols);
        y[static_cast<size_t>(i)] = r.r_extr + r.r_intr + r.gamma * q_tgt.at(i, a_star);
    }
    return y;
}

std::vector<double> Trainer::ddqn_targets(const HistoryBuffer& buffer,
                                          const std::vector<int>& idx) {
    BatchView v = build_view(buffer, idx);
    Tensor enc = nets_.encode(v.unique_obs);
    Tensor xprime(static_cast<int>(idx.size()), enc.cols);
    for (size_t i = 0; i < idx.size(); ++i)
        for (int j = 0; j < enc.cols; ++j)
            xprime.at(static_cast<int>(i), j) = enc.at(v.sp_row[i], j);
    return targets_from(buffer, idx, xprime);
}

LossReport Trainer::run_batch(const HistoryBuffer& buffer, const std::vector<int>& idx,
                              Rng& shuffle, Rng* dropout, bool with_grad) {
    check(!idx.empty(), "trainer: empty batch");
    int b = static_cast<int>(idx.size());
    BatchView v = build_view(buffer, idx);

    Tape t;
    int u_in = t.input(v.unique_obs);
    auto enc_bound = nets_.encoder.bind(t);
    int xu = nets_.encoder.forward_tape(t, enc_bound, u_in);
    int x = t.gather_rows(xu, v.s_row);
    int xp = t.gather_rows(xu, v.sp_row);

    // bootstrap targets from the live x' values on this tape
    std::vector<double> y = targets_from(buffer, idx, t.val(xp));

    Tensor a_onehots(b, nets_.num_actions());
    for (int i = 0; i < b; ++i) a_onehots.at(i, v.actions[static_cast<size_t>(i)]) = 1.0;
    int xa = t.concat_cols(x, t.input(a_onehots));

    // residual transition; dropout only in train mode
    auto tr_bound = nets_.transition.bind(t);
    int delta = nets_.transition.forward_tape(t, tr_bound, xa, dropout);
    int tdiff = t.sub(t.add(x, delta), xp);
    int l_tau = t.scale(t.sum(t.mul(tdiff, tdiff)), 1.0 / b);

    auto r_bound = nets_.reward.bind(t);
    int rdiff = t.sub(nets_.reward.forward_tape(t, r_bound, xa), t.input(v.r_extr_col));
    int l_r = t.mean(t.mul(rdiff, rdiff));

    auto g_bound = nets_.discount.bind(t);
    int gdiff = t.sub(nets_.discount.forward_tape(t, g_bound, xa), t.input(v.gamma_col));
    int l_g = t.mean(t.mul(gdiff, gdiff));

    // pair the batch with a shuffled copy of itself
    int pd = t.sub(x, t.gather_rows(x, shuffle.permutation(b)));
    int l_d1 = t.mean(t.exp_op(t.scale(t.sum_rows(t.mul(pd, pd)), -cfg_.c_d1)));

    int consec = t.l2_norm_rows(t.sub(x, xp));
    int l_csc = t.mean(t.relu_op(t.add_scalar(consec, -cfg_.omega)));

    // Q regression on detached encodings
    auto q_bound = nets_.q.bind(t);
    int qv = nets_.q.forward_tape(t, q_bound, t.detach(x));
    Tensor y_col(b, 1);
    for (int i = 0; i < b; ++i) y_col.at(i, 0) = y[static_cast<size_t>(i)];
    int qdiff = t.sub(t.select_cols(qv, v.actions), t.input(y_col));
    int l_q = t.mean(t.mul(qdiff, qdiff));

    const LossWeights& w = cfg_.weights;
    int total = t.add(
        t.add(t.add(t.scale(l_q, w.q), t.scale(l_r, w.r)),
              t.add(t.scale(l_g, w.g), t.scale(l_tau, w.tau))),
        t.add(t.scale(l_d1, w.d1), t.scale(l_csc, w.csc)));

    LossReport rep;
    rep.l_q = t.scalar_val(l_q);
    rep.l_r = t.scalar_val(l_r);
    rep.l_g = t.scalar_val(l_g);
    rep.l_tau = t.scalar_val(l_tau);
    rep.l_d1 = t.scalar_val(l_d1);
    rep.l_csc = t.scalar_val(l_csc);
    rep.total = t.scalar_val(total);
    for (double c : {rep.l_q, rep.l_r, rep.l_g, rep.l_tau, rep.l_d1, rep.l_csc, rep.total})
        check(std::isfinite(c), "trainer: loss diverged to a non-finite value");

    if (with_grad) t.backward(total);
    return rep;
}

LossReport Trainer::train_iteration(const HistoryBuffer& buffer) {
    std::vector<int> idx = buffer.sample(sample_rng_, cfg_.batch_size);
    LossReport rep = run_batch(buffer, idx, shuffle_rng_, &dropout_rng_, true);
    opt_.step();
    if (nets_.after_gradient_step()) target_cache_.clear();
    return rep;
}

LossReport Trainer::compute_losses(const HistoryBuffer& buffer, const std::vector<int>& idx,
                                   std::uint64_t aux_seed, bool train_mode, bool with_grad) {
    Rng shuffle = Rng::stream(aux_seed, kShuffleStream);
    Rng dropout = Rng::stream(aux_seed, kDropoutStream);
    return run_batch(buffer, idx, shuffle, train_mode ? &dropout : nullptr, with_grad);
}

Trainer::GateResult Trainer::train_to_gate(const HistoryBuffer& buffer, int max_iters) {
    GateResult res;
    double threshold = gate_threshold();
    std::deque<double> window;
    double window_sum = 0.0;
    int cap = max_iters < 1 ? 1 : max_iters;
    for (int i = 1; i <= cap; ++i) {
        LossReport rep = train_iteration(buffer);
        window.push_back(rep.l_tau);
        window_sum += rep.l_tau;
        if (static_cast<int>(window.size()) > cfg_.gate_window) {
            window_sum -= window.front();
            window.pop_front();
        }
        res.iters = i;
        res.gate_mean = window_sum / static_cast<double>(window.size());
        res.last = rep;
        if (res.gate_mean <= threshold) break;
    }
    return res;
}

}  // namespace scout
