#pragma once

// Random encoded streams and the compression invariants checked on them.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sensorseq/encoder.hpp"
#include "sensorseq/random.hpp"

namespace fuzz {

struct StreamShape {
    std::size_t max_rows = 200;
    std::size_t min_cols = 8;
    std::size_t max_cols = 20;
    double min_sparsity = 0.70;
    double max_sparsity = 0.95;
    double label_rate = 0.02;
};

/// Values come from a handful of levels so equal live values (mergeable) are common.
inline std::vector<sensorseq::SampleRow> random_stream(sensorseq::Rng& rng, const StreamShape& s = {}) {
    const std::size_t rows = static_cast<std::size_t>(rng.below(s.max_rows + 1));
    const std::size_t cols = s.min_cols + static_cast<std::size_t>(rng.below(s.max_cols - s.min_cols + 1));
    const double sparsity = rng.uniform(s.min_sparsity, s.max_sparsity);
    std::vector<std::size_t> levels(cols);
    for (auto& l : levels) l = 1 + static_cast<std::size_t>(rng.below(4));
    std::vector<sensorseq::SampleRow> out;
    std::int64_t t = 1'000'000;
    for (std::size_t i = 0; i < rows; ++i) {
        sensorseq::SampleRow r;
        r.user_id = "fz";
        r.delta_ms = i == 0 ? 60 * 60'000 : static_cast<std::int64_t>(rng.below(3'600'001));
        t += r.delta_ms;
        r.wall_time_ms = t;
        r.x.assign(cols, 0.0f);
        r.x[0] = sensorseq::encode_delta(r.delta_ms, 60.0);
        for (std::size_t j = 1; j < cols; ++j)
            if (!rng.bernoulli(sparsity))
                r.x[j] = static_cast<float>(0.05 + 0.95 * static_cast<double>(rng.below(levels[j])) /
                                                       static_cast<double>(levels[j]));
        if (rng.bernoulli(s.label_rate)) {
            r.y = static_cast<std::int8_t>(rng.below(2));
            r.w = rng.uniform(0.2, 3.0);
            r.category = "c" + std::to_string(rng.below(3));
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// C1: per column j >= 1, non-zero values with consecutive duplicates collapsed.
inline std::vector<std::vector<float>> collapsed_columns(const std::vector<sensorseq::SampleRow>& rows) {
    std::vector<std::vector<float>> out;
    if (rows.empty()) return out;
    out.resize(rows.front().x.size());
    for (const auto& r : rows)
        for (std::size_t j = 1; j < r.x.size(); ++j)
            if (r.x[j] != 0.0f && (out[j].empty() || out[j].back() != r.x[j])) out[j].push_back(r.x[j]);
    return out;
}

/// C2: ordered (y, w) of labeled rows.
inline std::vector<std::pair<int, double>> labeled_pairs(const std::vector<sensorseq::SampleRow>& rows) {
    std::vector<std::pair<int, double>> out;
    for (const auto& r : rows)
        if (r.labeled()) out.emplace_back(r.y, r.w);
    return out;
}

/// C3: raw delta sum.
inline std::int64_t delta_sum(const std::vector<sensorseq::SampleRow>& rows) {
    std::int64_t s = 0;
    for (const auto& r : rows) s += r.delta_ms;
    return s;
}

}  // namespace fuzz
