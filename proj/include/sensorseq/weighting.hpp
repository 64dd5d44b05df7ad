#pragma once

// Per-user class weights. Unlabeled rows always keep w = 0 so they update the
// recurrent state without entering the loss.

#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "sensorseq/encoder.hpp"
#include "sensorseq/error.hpp"

namespace sensorseq {

enum class WeightStrategy { binary, inverse_frequency, inverse_sqrt_frequency, inverse_log_frequency };

inline const char* to_string(WeightStrategy s) {
    switch (s) {
        case WeightStrategy::binary: return "binary";
        case WeightStrategy::inverse_frequency: return "inverse_frequency";
        case WeightStrategy::inverse_sqrt_frequency: return "inverse_sqrt_frequency";
        case WeightStrategy::inverse_log_frequency: return "inverse_log_frequency";
    }
    return "?";
}

inline WeightStrategy parse_weight_strategy(const std::string& s) {
    if (s == "binary" || s == "none") return WeightStrategy::binary;
    if (s == "inverse_frequency" || s == "frequency") return WeightStrategy::inverse_frequency;
    if (s == "inverse_sqrt_frequency" || s == "sqrt") return WeightStrategy::inverse_sqrt_frequency;
    if (s == "inverse_log_frequency" || s == "log") return WeightStrategy::inverse_log_frequency;
    throw ConfigError("unknown weight strategy '" + s + "'");
}

/// Raw (unnormalized) weight for a class holding fraction f of a user's labels.
inline double raw_class_weight(WeightStrategy s, double f) {
    switch (s) {
        case WeightStrategy::binary: return 1.0;
        case WeightStrategy::inverse_frequency: return 1.0 / f;
        case WeightStrategy::inverse_sqrt_frequency: return 1.0 / std::sqrt(f);
        case WeightStrategy::inverse_log_frequency: return std::log1p(1.0 / f);
    }
    return 1.0;
}

struct UserWeights {
    std::array<std::optional<double>, 2> by_label;  // index = label value
    std::array<std::size_t, 2> counts{0, 0};
};

struct WeightTable {
    WeightStrategy strategy = WeightStrategy::binary;
    std::map<std::string, UserWeights> users;
};

inline WeightTable compute_weights(const RowStreams& rows, WeightStrategy strategy) {
    WeightTable table;
    table.strategy = strategy;
    for (const auto& [user, r] : rows) {
        UserWeights uw;
        for (const auto& row : r)
            if (row.labeled()) ++uw.counts[row.y == 1 ? 1 : 0];
        const std::size_t n = uw.counts[0] + uw.counts[1];
        if (n > 0) {
            const bool single_class = uw.counts[0] == 0 || uw.counts[1] == 0;
            std::array<double, 2> g{0.0, 0.0};
            double total = 0.0;
            for (int c = 0; c < 2; ++c) {
                if (uw.counts[c] == 0) continue;
                const double f = static_cast<double>(uw.counts[c]) / static_cast<double>(n);
                g[c] = single_class ? 1.0 : raw_class_weight(strategy, f);
                total += g[c] * static_cast<double>(uw.counts[c]);
            }
            for (int c = 0; c < 2; ++c) {
                if (uw.counts[c] == 0) continue;
                uw.by_label[c] = strategy == WeightStrategy::binary ? 1.0 : g[c] * static_cast<double>(n) / total;
            }
        }
        table.users.emplace(user, uw);
    }
    return table;
}

inline void apply_weights(RowStreams& rows, const WeightTable& table) {
    for (auto& [user, r] : rows) {
        const UserWeights* uw = nullptr;
        if (auto it = table.users.find(user); it != table.users.end()) uw = &it->second;
        for (auto& row : r) {
            if (!row.labeled()) {
                row.w = 0.0;
                continue;
            }
            const int c = row.y == 1 ? 1 : 0;
            if (uw == nullptr || !uw->by_label[c])
                throw MissingTableEntry("user " + user + " label " + std::to_string(c));
            row.w = *uw->by_label[c];
        }
    }
}

inline void write_weight_table(std::ostream& out, const WeightTable& t) {
    out.precision(17);
    out << "# strategy=" << to_string(t.strategy) << '\n';
    out << "user_id\tlabel\tcount\tweight\n";
    for (const auto& [user, uw] : t.users)
        for (int c = 0; c < 2; ++c)
            if (uw.by_label[c]) out << user << '\t' << c << '\t' << uw.counts[c] << '\t' << *uw.by_label[c] << '\n';
}

inline WeightTable read_weight_table(std::istream& in) {
    WeightTable t;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# strategy=", 0) != 0) throw IoError("weights: bad header");
    t.strategy = parse_weight_strategy(line.substr(11));
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string user;
        int label = 0;
        std::size_t count = 0;
        double w = 0.0;
        if (!std::getline(ss, user, '\t') || !(ss >> label >> count >> w) || (label != 0 && label != 1))
            throw IoError("weights: bad line '" + line + "'");
        auto& uw = t.users[user];
        uw.by_label[label] = w;
        uw.counts[label] = count;
    }
    return t;
}

}  // namespace sensorseq
