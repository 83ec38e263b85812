#include "scout/replay.hpp"

#include "scout/common.hpp"

namespace scout {

HistoryBuffer::HistoryBuffer(int capacity) : capacity_(capacity) {
    check(capacity > 0, "history buffer capacity must be positive");
}

void HistoryBuffer::push(TransitionRecord r) {
    records_.push_back(std::move(r));
    while (static_cast<int>(records_.size()) > capacity_) records_.pop_front();
}

std::vector<int> HistoryBuffer::sample(Rng& rng, int batch) const {
    check(size() > 0, "cannot sample from an empty buffer");
    std::vector<int> idx(static_cast<size_t>(batch));
    for (auto& i : idx) i = rng.uniform_int(size());
    return idx;
}

double HistoryBuffer::mean_r_intr() const {
    check(size() > 0, "mean_r_intr on empty buffer");
    double s = 0.0;
    for (const auto& r : records_) s += r.r_intr;
    return s / size();
}

}  // namespace scout
