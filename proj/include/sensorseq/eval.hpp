#pragma once

// AUC per (user, app category) with macro averaging, pooled ROC points, and
// the probability-based dummy baseline.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sensorseq/encoder.hpp"
#include "sensorseq/error.hpp"
#include "sensorseq/random.hpp"

namespace sensorseq {

/// Rank-based AUC (Mann-Whitney U with average ranks for ties).
/// Returns nullopt when only one class is present.
inline std::optional<double> auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw ShapeMismatch("auc: scores/labels length");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double pos_rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) {
                pos_rank_sum += avg_rank;
                ++n_pos;
            }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;
    const double np = static_cast<double>(n_pos);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

/// ROC points from the highest threshold down; starts at (0,0) and ends at (1,1).
inline std::vector<RocPoint> roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double P = 0, N = 0;
    for (int y : labels) (y == 1 ? P : N) += 1.0;
    std::vector<RocPoint> out{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? tp : fp) += 1.0;
            ++j;
        }
        out.push_back({scores[order[i]], N > 0 ? fp / N : 0.0, P > 0 ? tp / P : 0.0});
        i = j;
    }
    if (out.back().fpr != 1.0 || out.back().tpr != 1.0) out.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});
    return out;
}

struct ScoredLabel {
    std::string user_id;
    std::string category;
    int label = 0;
    double score = 0.0;
};

struct GroupAuc {
    std::string user_id;
    std::string category;
    std::size_t n = 0;
    std::size_t positives = 0;
    std::optional<double> auc;
};

struct EvalReport {
    std::vector<GroupAuc> groups;
    double macro_auc = 0.0;
    std::size_t valid_groups = 0;
    std::size_t skipped_groups = 0;
    std::vector<RocPoint> roc;
};

/// Unweighted mean of per-(user, category) AUCs; single-class groups are skipped.
inline EvalReport macro_auc(const std::vector<ScoredLabel>& rows) {
    std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<int>>> groups;
    std::vector<double> all_scores;
    std::vector<int> all_labels;
    for (const auto& r : rows) {
        auto& g = groups[{r.user_id, r.category}];
        g.first.push_back(r.score);
        g.second.push_back(r.label);
        all_scores.push_back(r.score);
        all_labels.push_back(r.label);
    }
    EvalReport rep;
    double sum = 0.0;
    for (const auto& [key, g] : groups) {
        GroupAuc ga{key.first, key.second, g.first.size(),
                    static_cast<std::size_t>(std::count(g.second.begin(), g.second.end(), 1)), auc(g.first, g.second)};
        if (ga.auc) {
            sum += *ga.auc;
            ++rep.valid_groups;
        } else {
            ++rep.skipped_groups;
        }
        rep.groups.push_back(std::move(ga));
    }
    if (rep.valid_groups == 0) throw NoValidGroups();
    rep.macro_auc = sum / static_cast<double>(rep.valid_groups);
    rep.roc = roc_curve(all_scores, all_labels);
    return rep;
}

/// Collects (user, category, label, score) for the labeled rows of a stream.
inline std::vector<ScoredLabel> scored_labels(const RowStreams& rows,
                                              const std::map<std::string, std::vector<double>>& scores) {
    std::vector<ScoredLabel> out;
    for (const auto& [user, r] : rows) {
        const auto& s = scores.at(user);
        for (std::size_t i = 0; i < r.size(); ++i)
            if (r[i].labeled()) out.push_back({user, r[i].category, r[i].y == 1 ? 1 : 0, s[i]});
    }
    return out;
}

struct BaselineTable {
    std::map<std::pair<std::string, std::string>, double> by_group;
    std::map<std::string, double> by_user;
    double global = 0.5;

    /// Click probability with fallback: (user, category) -> user -> global.
    double probability(const std::string& user, const std::string& category) const {
        if (auto it = by_group.find({user, category}); it != by_group.end()) return it->second;
        if (auto it = by_user.find(user); it != by_user.end()) return it->second;
        return global;
    }
};

inline BaselineTable fit_baseline(const std::vector<ScoredLabel>& train) {
    BaselineTable t;
    std::map<std::pair<std::string, std::string>, std::pair<double, double>> g;
    std::map<std::string, std::pair<double, double>> u;
    double pos = 0, n = 0;
    for (const auto& r : train) {
        auto& a = g[{r.user_id, r.category}];
        auto& b = u[r.user_id];
        a.first += r.label;
        a.second += 1;
        b.first += r.label;
        b.second += 1;
        pos += r.label;
        n += 1;
    }
    for (const auto& [k, v] : g) t.by_group[k] = v.first / v.second;
    for (const auto& [k, v] : u) t.by_user[k] = v.first / v.second;
    t.global = n > 0 ? pos / n : 0.5;
    return t;
}

/// Random 0/1 prediction that is positive with the table's click probability.
inline int baseline_predict(const std::string& user, const std::string& category, const BaselineTable& table,
                            Rng& rng) {
    return rng.uniform() < table.probability(user, category) ? 1 : 0;
}

inline void write_baseline_table(std::ostream& out, const BaselineTable& t) {
    out.precision(17);
    out << "user_id\tcategory\tprobability\n";
    for (const auto& [k, p] : t.by_group) out << k.first << '\t' << k.second << '\t' << p << '\n';
    for (const auto& [k, p] : t.by_user) out << k << "\t*\t" << p << '\n';
    out << "*\t*\t" << t.global << '\n';
}

inline BaselineTable read_baseline_table(std::istream& in) {
    BaselineTable t;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string user, cat;
        double p = 0;
        if (!std::getline(ss, user, '\t') || !std::getline(ss, cat, '\t') || !(ss >> p))
            throw IoError("baseline: bad line '" + line + "'");
        if (user == "*")
            t.global = p;
        else if (cat == "*")
            t.by_user[user] = p;
        else
            t.by_group[{user, cat}] = p;
    }
    return t;
}

// Prediction files: one line per labeled row.
//   user_id  wall_time_ms  category  label  score

inline void write_predictions(std::ostream& out, const RowStreams& rows,
                              const std::map<std::string, std::vector<double>>& scores) {
    out << "user_id\twall_time_ms\tcategory\tlabel\tscore\n";
    char buf[64];
    for (const auto& [user, r] : rows) {
        const auto& s = scores.at(user);
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!r[i].labeled()) continue;
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, s[i]);
            out << user << '\t' << r[i].wall_time_ms << '\t' << (r[i].category.empty() ? "-" : r[i].category) << '\t'
                << static_cast<int>(r[i].y) << '\t' << std::string_view(buf, static_cast<std::size_t>(end - buf))
                << '\n';
        }
    }
}

inline std::vector<ScoredLabel> read_predictions(std::istream& in) {
    std::vector<ScoredLabel> out;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        ScoredLabel s;
        std::int64_t t = 0;
        if (!std::getline(ss, s.user_id, '\t') || !(ss >> t >> s.category >> s.label >> s.score))
            throw IoError("predictions: bad line '" + line + "'");
        out.push_back(std::move(s));
    }
    return out;
}

inline void write_group_table(std::ostream& out, const EvalReport& r) {
    out.precision(6);
    out << "user_id\tcategory\tn\tpositives\tauc\n";
    for (const auto& g : r.groups) {
        out << g.user_id << '\t' << g.category << '\t' << g.n << '\t' << g.positives << '\t';
        if (g.auc)
            out << *g.auc;
        else
            out << "skipped";
        out << '\n';
    }
    out << "# macro_auc=" << r.macro_auc << " valid_groups=" << r.valid_groups << " skipped_groups=" << r.skipped_groups
        << '\n';
}

inline void write_roc(std::ostream& out, const std::vector<RocPoint>& roc) {
    out.precision(10);
    out << "threshold\tfpr\ttpr\n";
    for (const auto& p : roc) out << p.threshold << '\t' << p.fpr << '\t' << p.tpr << '\n';
}

}  // namespace sensorseq
