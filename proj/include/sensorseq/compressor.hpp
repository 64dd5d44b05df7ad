#pragma once

// Opportunistic lossless time-based compression. A row may absorb its
// successor when no column holds two different live values, the row carries
// no ground truth, and the merged span stays within the optional threshold.

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "sensorseq/encoder.hpp"
#include "sensorseq/error.hpp"

namespace sensorseq {

struct CompressionConfig {
    std::optional<double> threshold_minutes;  // absent = unbounded
    double delta_cap_minutes = 60.0;          // only for re-encoding column 0

    void check() const {
        if (threshold_minutes && !(*threshold_minutes > 0.0))
            throw ConfigError("compression threshold must be > 0 when set");
    }
};

struct CompressionReport {
    std::size_t rows_in = 0;
    std::size_t rows_out = 0;
    std::size_t blocked_clash = 0;
    std::size_t blocked_ground_truth = 0;
    std::size_t blocked_threshold = 0;

    double ratio() const {
        return rows_in == 0 ? 0.0 : 1.0 - static_cast<double>(rows_out) / static_cast<double>(rows_in);
    }
    CompressionReport& operator+=(const CompressionReport& o) {
        rows_in += o.rows_in;
        rows_out += o.rows_out;
        blocked_clash += o.blocked_clash;
        blocked_ground_truth += o.blocked_ground_truth;
        blocked_threshold += o.blocked_threshold;
        return *this;
    }
};

enum class MergeVerdict { ok, ground_truth, threshold, clash };

/// `elapsed_ms` is the accumulator's span: time from its first merged row to its last.
inline MergeVerdict merge_verdict(const SampleRow& acc, const SampleRow& next, std::int64_t elapsed_ms,
                                  const CompressionConfig& config) {
    if (acc.labeled() || acc.w != 0.0) return MergeVerdict::ground_truth;
    if (config.threshold_minutes &&
        static_cast<double>(elapsed_ms + next.delta_ms) > *config.threshold_minutes * static_cast<double>(kMinuteMs))
        return MergeVerdict::threshold;
    if (acc.x.size() != next.x.size()) throw ShapeMismatch("rows of different width");
    // column 0 is the time delta and exempt
    for (std::size_t j = 1; j < acc.x.size(); ++j) {
        const float a = acc.x[j];
        const float b = next.x[j];
        if (a != 0.0f && b != 0.0f && a != b) return MergeVerdict::clash;
    }
    return MergeVerdict::ok;
}

inline bool mergeable(const SampleRow& acc, const SampleRow& next, std::int64_t elapsed_ms,
                      const CompressionConfig& config) {
    return merge_verdict(acc, next, elapsed_ms, config) == MergeVerdict::ok;
}

/// Greedy left-to-right compression of one user's chronological rows.
inline std::vector<SampleRow> compress_stream(const std::vector<SampleRow>& rows, const CompressionConfig& config,
                                              CompressionReport* report = nullptr) {
    config.check();
    std::vector<SampleRow> out;
    CompressionReport local;
    local.rows_in = rows.size();
    if (!rows.empty()) {
        SampleRow acc = rows.front();
        std::int64_t span = 0;
        auto emit = [&] {
            acc.x[0] = encode_delta(acc.delta_ms, config.delta_cap_minutes);
            out.push_back(std::move(acc));
        };
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const SampleRow& next = rows[i];
            switch (merge_verdict(acc, next, span, config)) {
                case MergeVerdict::ok:
                    for (std::size_t j = 1; j < acc.x.size(); ++j)
                        if (acc.x[j] == 0.0f) acc.x[j] = next.x[j];
                    acc.delta_ms += next.delta_ms;
                    span += next.delta_ms;
                    acc.wall_time_ms = next.wall_time_ms;
                    if (next.labeled()) {
                        acc.y = next.y;
                        acc.w = next.w;
                        acc.category = next.category;
                    }
                    continue;
                case MergeVerdict::ground_truth: ++local.blocked_ground_truth; break;
                case MergeVerdict::threshold: ++local.blocked_threshold; break;
                case MergeVerdict::clash: ++local.blocked_clash; break;
            }
            emit();
            acc = next;
            span = 0;
        }
        emit();
    }
    local.rows_out = out.size();
    if (report) *report += local;
    return out;
}

inline RowStreams compress_all(const RowStreams& rows, const CompressionConfig& config,
                               CompressionReport* report = nullptr) {
    RowStreams out;
    for (const auto& [user, r] : rows) out.emplace(user, compress_stream(r, config, report));
    return out;
}

inline void write_compression_report(std::ostream& out, const CompressionReport& r) {
    out << "rows_in=" << r.rows_in << '\n'
        << "rows_out=" << r.rows_out << '\n'
        << "ratio=" << r.ratio() << '\n'
        << "blocked_clash=" << r.blocked_clash << '\n'
        << "blocked_ground_truth=" << r.blocked_ground_truth << '\n'
        << "blocked_threshold=" << r.blocked_threshold << '\n';
}

}  // namespace sensorseq
