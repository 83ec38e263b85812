#include "scout/novelty.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <unordered_map>

#include "scout/common.hpp"

namespace scout {

std::vector<std::pair<int, double>> knn(const Tensor& query, const Tensor& points, int k,
                                        int exclude_row) {
    check(points.rows > 0, "knn: empty point set");
    check(k >= 1, "knn: k must be at least 1");
    check(query.rows == 1 && query.cols == points.cols, "knn: query shape mismatch");

    // bounded insertion sort over (distance, row); cheap for small k
    std::vector<std::pair<int, double>> best;
    best.reserve(static_cast<size_t>(k) + 1);
    for (int i = 0; i < points.rows; ++i) {
        if (i == exclude_row) continue;
        double d2 = 0.0;
        const double* p = points.row(i);
        for (int j = 0; j < points.cols; ++j) {
            double diff = query.data[static_cast<size_t>(j)] - p[j];
            d2 += diff * diff;
        }
        double d = std::sqrt(d2);
        if (static_cast<int>(best.size()) == k &&
            (d > best.back().second || (d == best.back().second && i > best.back().first)))
            continue;
        size_t pos = best.size();
        while (pos > 0 && (best[pos - 1].second > d ||
                           (best[pos - 1].second == d && best[pos - 1].first > i)))
            --pos;
        best.insert(best.begin() + static_cast<long>(pos), {i, d});
        if (static_cast<int>(best.size()) > k) best.pop_back();
    }
    return best;
}

double novelty_score(const Tensor& query, const Tensor& points, int k, int exclude_row) {
    auto neighbors = knn(query, points, k, exclude_row);
    if (neighbors.empty()) return 0.0;  // lone buffered record has no peers
    double s = 0.0;
    for (auto& [i, d] : neighbors) s += d;
    return s / static_cast<double>(neighbors.size());
}

Tensor encode_buffer_next(const HistoryBuffer& buffer, const Mlp& encoder) {
    check(buffer.size() > 0, "encode_buffer_next: empty buffer");
    // encode each distinct next state once, then fan rows back out
    std::unordered_map<int, int> unique_row;
    std::vector<int> record_row(static_cast<size_t>(buffer.size()));
    std::vector<int> unique_records;
    for (int i = 0; i < buffer.size(); ++i) {
        auto [it, inserted] =
            unique_row.try_emplace(buffer[i].next_state_id, static_cast<int>(unique_records.size()));
        if (inserted) unique_records.push_back(i);
        record_row[static_cast<size_t>(i)] = it->second;
    }
    Tensor uniq(static_cast<int>(unique_records.size()), encoder.in_dim());
    for (size_t u = 0; u < unique_records.size(); ++u) {
        const Tensor& o = buffer[unique_records[u]].next_obs;
        check(o.cols == encoder.in_dim(), "encode_buffer_next: observation dim mismatch");
        for (int j = 0; j < o.cols; ++j) uniq.at(static_cast<int>(u), j) = o.at(0, j);
    }
    Tensor enc = encoder.forward(uniq);
    Tensor out(buffer.size(), enc.cols);
    for (int i = 0; i < buffer.size(); ++i)
        for (int j = 0; j < enc.cols; ++j)
            out.at(i, j) = enc.at(record_row[static_cast<size_t>(i)], j);
    return out;
}

void refresh_intrinsic_rewards(HistoryBuffer& buffer, const Mlp& encoder, int k) {
    if (buffer.size() == 0) return;
    Tensor points = encode_buffer_next(buffer, encoder);
    Tensor q(1, points.cols);
    for (int i = 0; i < buffer.size(); ++i) {
        for (int j = 0; j < points.cols; ++j) q.at(0, j) = points.at(i, j);
        buffer[i].r_intr = novelty_score(q, points, k, i);
    }
}

double recoding_density_oracle(const Tensor& query, const Tensor& points, int k) {
    check(points.rows > k, "recoding density: need more than k points");
    auto neighbors = knn(query, points, k);
    double r = neighbors.back().second;
    if (r == 0.0) return std::numeric_limits<double>::infinity();
    int d = points.cols;
    double volume = std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0) * std::pow(r, d);
    return static_cast<double>(k) / (points.rows * volume);
}

void dump_buffer_ndjson(const std::string& path, const HistoryBuffer& buffer,
                        const Mlp& encoder) {
    std::ofstream out(path);
    check(out.good(), "buffer dump: cannot open " + path);
    Tensor next_enc(0, 0);
    if (buffer.size() > 0) next_enc = encode_buffer_next(buffer, encoder);
    for (int i = 0; i < buffer.size(); ++i) {
        const TransitionRecord& r = buffer[i];
        nlohmann::json j;
        j["index"] = i;
        j["action"] = r.action;
        j["r_extr"] = r.r_extr;
        j["r_intr"] = r.r_intr;
        j["gamma"] = r.gamma;
        j["terminal"] = r.terminal;
        j["state_id"] = r.state_id;
        j["next_state_id"] = r.next_state_id;
        std::vector<double> x(next_enc.cols);
        for (int c = 0; c < next_enc.cols; ++c) x[static_cast<size_t>(c)] = next_enc.at(i, c);
        j["x_next"] = x;
        out << j.dump() << "\n";
    }
    check(out.good(), "buffer dump: write failed");
}

}  // namespace scout
