#pragma once

#include <string>
#include <vector>

#include "scout/mlp.hpp"
#include "scout/optim.hpp"
#include "scout/rng.hpp"
#include "scout/tensor.hpp"

namespace scout {

// Architecture builders. Encoder compresses a flattened observation into a
// low-dimensional point; the dynamics heads operate on that point joined
// with a one-hot action.
Mlp make_encoder(int obs_dim, int n_x);
Mlp make_transition_net(int n_x, int num_actions);
Mlp make_reward_head(int n_x, int num_actions);
Mlp make_discount_head(int n_x, int num_actions);
Mlp make_q_net(int n_x, int num_actions);
Mlp make_obs_q_net(int obs_dim, int num_actions);  // model-free baselines

Tensor one_hot(int a, int n);
// rows: x[i] joined with one_hot(actions[i])
Tensor concat_action(const Tensor& x, const std::vector<int>& actions, int num_actions);

// residual dynamics: x + net(x || a), evaluated without dropout
Tensor residual_transition(const Mlp& net, const Tensor& x, const Tensor& a_onehot);

// value clips applied where predictions are consumed
double clip_reward(double r);    // [-1, 1]
double clip_discount(double g);  // [0, 0.99]

// argmax with ties broken by lowest index
int argmax_lowest(const double* v, int n);

// Live networks plus frozen target copies of the encoder and Q-function.
// The sync counter counts gradient updates; when it reaches the freeze
// interval the targets snapshot the live parameters.
struct ModelNets {
    Mlp encoder, transition, reward, discount, q;
    Mlp target_encoder, target_q;
    int steps_since_sync = 0;
    int freeze_interval = 1000;

    ModelNets(int obs_dim, int n_x, int num_actions);
    void init(std::uint64_t seed);
    void attach(RmsProp& opt);

    // call after every gradient step; returns true when targets were synced
    bool after_gradient_step();
    void sync_targets_now();

    int n_x() const { return encoder.out_dim(); }
    int num_actions() const { return q.out_dim(); }

    Tensor encode(const Tensor& obs) const { return encoder.forward(obs); }
    Tensor encode_target(const Tensor& obs) const { return target_encoder.forward(obs); }
    Tensor q_values(const Tensor& x) const { return q.forward(x); }
    Tensor q_values_target(const Tensor& x) const { return target_q.forward(x); }
    Tensor predict_transition(const Tensor& x, int action) const;
    double predict_reward(const Tensor& x, int action) const;
    double predict_discount(const Tensor& x, int action) const;
};

// Parameter checkpoint: a JSON dump of every tensor (live nets, targets,
// optimizer state, sync counter). Doubles are written in shortest
// round-trip form, so save followed by load reproduces values bit for bit.
void save_checkpoint(const std::string& path, const ModelNets& nets, const RmsProp* opt);
void load_checkpoint(const std::string& path, ModelNets& nets, RmsProp* opt);

}  // namespace scout
