#pragma once

#include <deque>
#include <vector>

#include "scout/rng.hpp"
#include "scout/tensor.hpp"

namespace scout {

struct TransitionRecord {
    Tensor obs, next_obs;  // [1, obs_dim]
    int action = 0;
    double r_extr = 0.0;
    double r_intr = 0.0;
    double gamma = 0.0;
    bool terminal = false;
    int state_id = -1;
    int next_state_id = -1;
};

// FIFO transition history with bounded capacity; insertion order preserved,
// oldest records evicted first.
class HistoryBuffer {
  public:
    explicit HistoryBuffer(int capacity = 1000);

    void push(TransitionRecord r);
    int size() const { return static_cast<int>(records_.size()); }
    int capacity() const { return capacity_; }
    const TransitionRecord& operator[](int i) const { return records_[static_cast<size_t>(i)]; }
    TransitionRecord& operator[](int i) { return records_[static_cast<size_t>(i)]; }

    // uniform sample of record indices, with replacement
    std::vector<int> sample(Rng& rng, int batch) const;

    double mean_r_intr() const;

  private:
    int capacity_;
    std::deque<TransitionRecord> records_;
};

}  // namespace scout
