#pragma once

#include <string>
#include <utility>
#include <vector>

#include "scout/mlp.hpp"
#include "scout/replay.hpp"
#include "scout/tensor.hpp"

namespace scout {

// Exact k-nearest-neighbor queries over the rows of `points` (buffered
// encodings in insertion order), ascending by (l2 distance, row index) so
// distance ties resolve by insertion order. Returns all m rows when m < k.
// exclude_row skips one row, used when the query itself is a buffered record.
std::vector<std::pair<int, double>> knn(const Tensor& query, const Tensor& points, int k,
                                        int exclude_row = -1);

// Mean distance to the k nearest buffered encodings (divided by the number
// of neighbors actually found).
double novelty_score(const Tensor& query, const Tensor& points, int k, int exclude_row = -1);

// Per-record encodings of next observations under the given encoder,
// one row per buffer record (duplicate states encoded once).
Tensor encode_buffer_next(const HistoryBuffer& buffer, const Mlp& encoder);

// Re-score every buffered record's intrinsic reward against the full buffer
// under the current encoder, excluding each record's own entry.
void refresh_intrinsic_rewards(HistoryBuffer& buffer, const Mlp& encoder, int k);

// Test-only density estimate: k / (n * V(r_k)) with V the volume of the
// n_x-dimensional ball whose radius is the distance to the k-th neighbor.
// Zero radius yields +infinity.
double recoding_density_oracle(const Tensor& query, const Tensor& points, int k);

// One JSON object per line per record, including current encodings.
void dump_buffer_ndjson(const std::string& path, const HistoryBuffer& buffer, const Mlp& encoder);

}  // namespace scout
