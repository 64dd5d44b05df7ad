#pragma once

// Attendance labels: a notification post is labeled 1 when the originating
// app is opened within the window, 0 when it is removed or ignored.

#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sensorseq/error.hpp"
#include "sensorseq/event_model.hpp"

namespace sensorseq {

struct LabelSpec {
    double window_minutes = 10.0;
    std::set<std::string> excluded_categories{"system", "keyboard"};
};

struct LabeledEvent {
    std::string user_id;
    std::size_t anchor = 0;  // seq of the notification-post event
    std::int64_t anchor_ms = 0;
    int label = 0;
    std::string package;
    std::string app_category;
    std::string reason;  // opened | removed | ignored
};

struct LabelReport {
    std::size_t posts = 0;
    std::size_t labeled = 0;
    std::size_t excluded = 0;
    std::size_t truncated = 0;  // stream ended before the window closed
    std::size_t missing_meta = 0;
};

struct LabelResult {
    std::vector<LabeledEvent> labels;
    LabelReport report;
    /// Every post, including skipped ones (label -1), for the audit file.
    std::vector<LabeledEvent> audit;
};

inline bool is_notification_action(const SensorEvent& e, const char* action) {
    if (e.sensor != "notification") return false;
    const std::string* a = e.category_value("action");
    return a != nullptr && *a == action;
}

/// Labels the notification posts of one user's sorted stream.
inline void label_user_stream(const std::vector<SensorEvent>& events, const LabelSpec& spec,
                              LabelResult& out) {
    if (!(spec.window_minutes > 0.0)) throw ConfigError("label window_minutes must be > 0");
    const double window_ms = spec.window_minutes * static_cast<double>(kMinuteMs);
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& post = events[i];
        if (!is_notification_action(post, "post")) continue;
        ++out.report.posts;
        LabeledEvent le{post.user_id, post.seq, post.timestamp_ms, -1, "", "", ""};
        if (!post.meta || post.meta->package.empty()) {
            ++out.report.missing_meta;
            le.reason = "missing_meta";
            out.audit.push_back(le);
            continue;
        }
        le.package = post.meta->package;
        le.app_category = post.meta->category;
        if (spec.excluded_categories.count(le.app_category)) {
            ++out.report.excluded;
            le.reason = "excluded";
            out.audit.push_back(le);
            continue;
        }

        bool opened = false;
        bool removed = false;
        for (std::size_t j = i + 1; j < events.size(); ++j) {
            const auto& e = events[j];
            const auto dt = static_cast<double>(e.timestamp_ms - post.timestamp_ms);
            if (dt >= window_ms) break;
            if (!e.meta || e.meta->package != le.package) continue;
            if (e.sensor == "app" && dt > 0.0) {
                opened = true;
                break;
            }
            if (is_notification_action(e, "remove")) removed = true;
        }
        const bool window_observed =
            static_cast<double>(events.back().timestamp_ms - post.timestamp_ms) >= window_ms;
        if (opened) {
            le.label = 1;
            le.reason = "opened";
        } else if (removed || window_observed) {
            le.label = 0;
            le.reason = removed ? "removed" : "ignored";
        } else {
            ++out.report.truncated;
            le.reason = "truncated";
            out.audit.push_back(le);
            continue;
        }
        ++out.report.labeled;
        out.labels.push_back(le);
        out.audit.push_back(std::move(le));
    }
}

inline LabelResult label_notifications(const UserStreams& stream, const LabelSpec& spec = {}) {
    LabelResult out;
    for (const auto& [_, events] : stream) label_user_stream(events, spec, out);
    return out;
}

// Audit / label file: tab-separated, header line, one line per notification post.
// Skipped posts carry label "-".

inline void write_label_audit(std::ostream& out, const std::vector<LabeledEvent>& audit) {
    out << "user_id\tanchor_seq\tanchor_ms\tpackage\tcategory\tlabel\treason\n";
    for (const auto& l : audit) {
        out << l.user_id << '\t' << l.anchor << '\t' << l.anchor_ms << '\t'
            << (l.package.empty() ? "-" : l.package) << '\t'
            << (l.app_category.empty() ? "-" : l.app_category) << '\t';
        if (l.label < 0)
            out << '-';
        else
            out << l.label;
        out << '\t' << l.reason << '\n';
    }
}

/// Reads an audit file back, keeping only resolved labels.
inline std::vector<LabeledEvent> read_labels(std::istream& in) {
    std::vector<LabeledEvent> out;
    std::string line;
    std::getline(in, line);  // header
    std::size_t lineno = 1;
    for (; std::getline(in, line); ++lineno) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        LabeledEvent l;
        std::string label;
        if (!std::getline(ss, l.user_id, '\t') || !(ss >> l.anchor >> l.anchor_ms) ||
            !(ss >> l.package >> l.app_category >> label >> l.reason))
            throw IoError("labels: bad line " + std::to_string(lineno));
        if (label == "-") continue;
        if (label != "0" && label != "1") throw IoError("labels: bad label on line " + std::to_string(lineno));
        l.label = label == "1" ? 1 : 0;
        out.push_back(std::move(l));
    }
    return out;
}

}  // namespace sensorseq
