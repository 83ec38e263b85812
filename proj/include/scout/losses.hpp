#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "scout/nets.hpp"
#include "scout/optim.hpp"
#include "scout/replay.hpp"
#include "scout/rng.hpp"

namespace scout {

// Per-batch loss components (unweighted values); total is the weighted sum
// actually minimized.
struct LossReport {
    double l_q = 0.0;    // (Q(x,a) - Y)^2, x detached
    double l_r = 0.0;    // reward regression
    double l_g = 0.0;    // discount regression
    double l_tau = 0.0;  // squared l2 error of residual transition
    double l_d1 = 0.0;   // pairwise Gaussian potential (spread)
    double l_csc = 0.0;  // consecutive-distance hinge
    double total = 0.0;

    bool operator==(const LossReport&) const = default;
};

struct LossWeights {
    double q = 1.0, r = 1.0, g = 1.0, tau = 1.0, d1 = 1.0, csc = 1.0;
};

struct TrainerConfig {
    int batch_size = 64;
    double lr = 0.00025;
    double c_d1 = 5.0;    // Gaussian potential sharpness
    double omega = 0.5;   // consecutive-distance slack
    double delta = 6.0;   // gate slack ratio
    int gate_window = 100;
    LossWeights weights;
    std::uint64_t seed = 0;
};

// Owns the optimizer and drives gradient steps over all six losses in one
// backward pass per batch. Observations repeated within a batch are encoded
// once and fanned out, which changes nothing mathematically.
class Trainer {
  public:
    Trainer(ModelNets& nets, TrainerConfig cfg);

    // sample a batch, take one gradient step, advance the target-sync counter
    LossReport train_iteration(const HistoryBuffer& buffer);

    // Evaluate the losses on a fixed batch without stepping the optimizer.
    // aux_seed fixes the dropout masks and the pair shuffle, so repeated
    // calls are bit-identical; with_grad leaves gradients in the nets'
    // buffers; train_mode toggles dropout.
    LossReport compute_losses(const HistoryBuffer& buffer, const std::vector<int>& idx,
                              std::uint64_t aux_seed, bool train_mode, bool with_grad);

    // Train until the running mean of the transition loss over the last
    // gate_window iterations of this call falls to (omega/delta)^2, or until
    // max_iters; at least one iteration always runs.
    struct GateResult {
        int iters = 0;
        double gate_mean = 0.0;
        LossReport last;
    };
    GateResult train_to_gate(const HistoryBuffer& buffer, int max_iters);

    double gate_threshold() const {
        return (cfg_.omega / cfg_.delta) * (cfg_.omega / cfg_.delta);
    }

    // Y_i = (r_extr + r_intr) + gamma * Q_target(e_target(s'), a*) with
    // a* = argmax_a Q_live(e_live(s'), a); no gradient flows through Y.
    std::vector<double> ddqn_targets(const HistoryBuffer& buffer, const std::vector<int>& idx);

    RmsProp& optimizer() { return opt_; }
    const TrainerConfig& config() const { return cfg_; }

  private:
    struct BatchView {
        Tensor unique_obs;
        std::vector<int> s_row, sp_row;  // batch position -> row of unique_obs
        std::vector<int> actions;
        Tensor r_extr_col, gamma_col;  // [B,1] regression targets
    };
    BatchView build_view(const HistoryBuffer& buffer, const std::vector<int>& idx) const;
    std::vector<double> targets_from(const HistoryBuffer& buffer, const std::vector<int>& idx,
                                     const Tensor& xprime_rows);
    Tensor target_encode_rows(const HistoryBuffer& buffer, const std::vector<int>& idx);
    LossReport run_batch(const HistoryBuffer& buffer, const std::vector<int>& idx, Rng& shuffle,
                         Rng* dropout, bool with_grad);

    ModelNets& nets_;
    TrainerConfig cfg_;
    RmsProp opt_;
    Rng sample_rng_, shuffle_rng_, dropout_rng_;
    std::unordered_map<int, std::vector<double>> target_cache_;  // next_state_id -> encoding
};

}  // namespace scout
