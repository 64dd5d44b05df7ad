#pragma once

// Test oracle: naive compression by repeated pairwise merging until nothing
// changes. Each pass merges the leftmost adjacent pair of groups that the rules
// allow and starts over. Shares no code with the production compressor.

#include <cstdint>
#include <optional>
#include <vector>

#include "sensorseq/encoder.hpp"

namespace oracle {

struct Group {
    sensorseq::SampleRow row;      // merged content
    std::int64_t first_delta = 0;  // delta of the group's first row
};

inline bool can_merge(const Group& a, const Group& b, std::optional<double> threshold_minutes) {
    if (a.row.y != sensorseq::kNoLabel) return false;
    if (a.row.w != 0.0) return false;
    if (threshold_minutes) {
        const std::int64_t span = a.row.delta_ms - a.first_delta;
        const double limit = *threshold_minutes * 60000.0;
        if (static_cast<double>(span + b.row.delta_ms) > limit) return false;
    }
    for (std::size_t j = 1; j < a.row.x.size(); ++j) {
        const bool both_live = a.row.x[j] != 0.0f && b.row.x[j] != 0.0f;
        if (both_live && a.row.x[j] != b.row.x[j]) return false;
    }
    return true;
}

inline Group merged(const Group& a, const Group& b) {
    Group g = a;
    for (std::size_t j = 1; j < g.row.x.size(); ++j)
        if (g.row.x[j] == 0.0f) g.row.x[j] = b.row.x[j];
    g.row.delta_ms = a.row.delta_ms + b.row.delta_ms;
    g.row.wall_time_ms = b.row.wall_time_ms;
    if (b.row.y != sensorseq::kNoLabel) {
        g.row.y = b.row.y;
        g.row.w = b.row.w;
        g.row.category = b.row.category;
    }
    return g;
}

inline std::vector<sensorseq::SampleRow> reference_compress(const std::vector<sensorseq::SampleRow>& rows,
                                                            std::optional<double> threshold_minutes,
                                                            double delta_cap_minutes = 60.0) {
    std::vector<Group> groups;
    for (const auto& r : rows) groups.push_back({r, r.delta_ms});
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i + 1 < groups.size(); ++i) {
            if (!can_merge(groups[i], groups[i + 1], threshold_minutes)) continue;
            groups[i] = merged(groups[i], groups[i + 1]);
            groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(i) + 1);
            changed = true;
            break;
        }
    }
    std::vector<sensorseq::SampleRow> out;
    for (auto& g : groups) {
        // column 0 recomputed from the merged raw delta
        const double minutes = static_cast<double>(g.row.delta_ms) / 60000.0;
        const double capped = minutes < delta_cap_minutes ? minutes : delta_cap_minutes;
        g.row.x[0] = static_cast<float>(0.05 + (1.0 - 0.05) * capped / delta_cap_minutes);
        out.push_back(g.row);
    }
    return out;
}

}  // namespace oracle
