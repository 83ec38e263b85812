#include "scout/planner.hpp"

#include <algorithm>

#include "scout/common.hpp"
#include "scout/novelty.hpp"

namespace scout {

namespace {
// actions ranked by descending Q with ties kept in index order, first b,
// returned ascending
std::vector<int> top_b_actions(const Tensor& q, int b) {
    std::vector<int> idx(static_cast<size_t>(q.cols));
    for (int i = 0; i < q.cols; ++i) idx[static_cast<size_t>(i)] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int i, int j) { return q.at(0, i) > q.at(0, j); });
    idx.resize(static_cast<size_t>(b));
    std::sort(idx.begin(), idx.end());
    return idx;
}
}  // namespace

Planner::Planner(const ModelNets& nets, const Tensor& points, int k, PlanConfig cfg)
    : nets_(nets), points_(points), k_(k), cfg_(cfg) {
    check(cfg_.depth >= 0, "planner: depth must be nonnegative");
    check(cfg_.b >= 1 && cfg_.b <= nets_.num_actions(), "planner: expansion width out of range");
    check(cfg_.epsilon >= 0.0 && cfg_.epsilon <= 1.0, "planner: epsilon out of range");
    check(k_ >= 1, "planner: neighbor count must be positive");
}

Tensor Planner::node_q_hat(const Tensor& x, int budget, std::vector<int>& path,
                           std::vector<PlanNode>* trace) const {
    int na = nets_.num_actions();
    Tensor q = nets_.q_values(x);
    Tensor out(budget + 1, na);
    for (int a = 0; a < na; ++a) out.at(0, a) = q.at(0, a);
    std::vector<int> expansion = top_b_actions(q, cfg_.b);

    if (budget > 0) {
        // one batched model query covers every action at this node
        Tensor xrep(na, x.cols);
        Tensor onehots(na, na);
        std::vector<int> actions(static_cast<size_t>(na));
        for (int a = 0; a < na; ++a) {
            actions[static_cast<size_t>(a)] = a;
            onehots.at(a, a) = 1.0;
            for (int j = 0; j < x.cols; ++j) xrep.at(a, j) = x.at(0, j);
        }
        Tensor succ = residual_transition(nets_.transition, xrep, onehots);
        Tensor xa = concat_action(xrep, actions, na);
        Tensor rh = nets_.reward.forward(xa);
        Tensor gh = nets_.discount.forward(xa);

        std::vector<Tensor> succ_rows(static_cast<size_t>(na));
        std::vector<double> r(static_cast<size_t>(na)), g(static_cast<size_t>(na));
        for (int a = 0; a < na; ++a) {
            Tensor& s = succ_rows[static_cast<size_t>(a)];
            s = Tensor(1, x.cols);
            for (int j = 0; j < x.cols; ++j) s.at(0, j) = succ.at(a, j);
            r[static_cast<size_t>(a)] = novelty_score(s, points_, k_) + clip_reward(rh.at(a, 0));
            g[static_cast<size_t>(a)] = clip_discount(gh.at(a, 0));
        }

        std::vector<Tensor> child(expansion.size());
        for (size_t i = 0; i < expansion.size(); ++i) {
            int ap = expansion[i];
            path.push_back(ap);
            child[i] = node_q_hat(succ_rows[static_cast<size_t>(ap)], budget - 1, path, trace);
            path.pop_back();
        }
        for (int d = 1; d <= budget; ++d) {
            double best = child[0].at(d - 1, expansion[0]);
            for (size_t i = 1; i < expansion.size(); ++i)
                best = std::max(best, child[i].at(d - 1, expansion[i]));
            for (int a = 0; a < na; ++a)
                out.at(d, a) = r[static_cast<size_t>(a)] + g[static_cast<size_t>(a)] * best;
        }
    }

    if (trace != nullptr) trace->push_back(PlanNode{path, x, budget, out, expansion});
    return out;
}

std::vector<double> Planner::q_plan(const Tensor& x, std::vector<PlanNode>* trace) const {
    check(x.rows == 1 && x.cols == nets_.n_x(), "planner: bad state shape");
    std::vector<int> path;
    Tensor m = node_q_hat(x, cfg_.depth, path, trace);
    std::vector<double> v(static_cast<size_t>(nets_.num_actions()), 0.0);
    for (int d = 0; d <= cfg_.depth; ++d)
        for (int a = 0; a < nets_.num_actions(); ++a) v[static_cast<size_t>(a)] += m.at(d, a);
    return v;
}

int Planner::select_action(const Tensor& x, Rng& rng, std::vector<PlanNode>* trace,
                           bool* took_random) const {
    // the exploration draw happens on every decision, so the random stream
    // advances the same way no matter what epsilon is
    bool random = rng.uniform() < cfg_.epsilon;
    if (took_random != nullptr) *took_random = random;
    if (random) return rng.uniform_int(nets_.num_actions());
    std::vector<double> v = q_plan(x, trace);
    return argmax_lowest(v.data(), static_cast<int>(v.size()));
}

}  // namespace scout
