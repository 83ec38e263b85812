#pragma once

#include <vector>

#include "scout/nets.hpp"
#include "scout/rng.hpp"
#include "scout/tensor.hpp"

namespace scout {

struct PlanConfig {
    int depth = 5;         // rollout depth D
    int b = 4;             // expansion width, at most the action count
    double epsilon = 0.0;  // random-action probability

    bool operator==(const PlanConfig&) const = default;
};

// One evaluated rollout node, exported when a trace sink is passed in.
// Nodes are appended in evaluation order (children before their parent);
// `path` is the action sequence from the root.
struct PlanNode {
    std::vector<int> path;
    Tensor x;                    // [1, n_x]
    int budget = 0;              // depths evaluated at this node
    Tensor q_hat;                // [budget+1, actions]; row d holds the depth-d values
    std::vector<int> expansion;  // actions simulated from here, ascending
};

// Depth-D rollout values over the learned model. Each depth-d value is the
// predicted one-step reward (novelty of the predicted successor against the
// buffered encodings, plus the clipped extrinsic prediction) discounted into
// the best depth-(d-1) continuation; depth 0 is the Q-function itself. Only
// the b actions ranked best by Q at each node are simulated. The per-action
// result is the sum over depths 0..D. Every node's model queries run as one
// batch over actions, and each subtree is evaluated once and reused across
// depths, which changes no values.
class Planner {
  public:
    // points: buffered encodings, one row per record; k: neighbor count
    Planner(const ModelNets& nets, const Tensor& points, int k, PlanConfig cfg);

    std::vector<double> q_plan(const Tensor& x, std::vector<PlanNode>* trace = nullptr) const;

    // greedy on q_plan with lowest-index ties; random with probability epsilon
    int select_action(const Tensor& x, Rng& rng, std::vector<PlanNode>* trace = nullptr,
                      bool* took_random = nullptr) const;

    const PlanConfig& config() const { return cfg_; }

  private:
    Tensor node_q_hat(const Tensor& x, int budget, std::vector<int>& path,
                      std::vector<PlanNode>* trace) const;

    const ModelNets& nets_;
    const Tensor& points_;
    int k_;
    PlanConfig cfg_;
};

}  // namespace scout
