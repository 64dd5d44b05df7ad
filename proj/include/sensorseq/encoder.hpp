#pragma once

// Fused sample matrix: one row per sensor event, one column per numeric field,
// one-hot category, context feature and demographic. Missing is 0; live values
// are rescaled into [0.05, 1] after capping at the training percentile.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sensorseq/error.hpp"
#include "sensorseq/event_model.hpp"
#include "sensorseq/ground_truth.hpp"

namespace sensorseq {

inline constexpr double kLiveFloor = 0.05;

enum class ColumnKind { time_delta, numeric, one_hot };

enum class ColumnSource { time_delta, sensor, day_of_week, hour_of_day, working_day, age, gender };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    ColumnSource source = ColumnSource::sensor;
    std::string sensor;    // sensor columns only
    std::string field;     // sensor columns only
    std::string category;  // one-hot columns only
    double fitted_min = 0.0;
    double fitted_cap = 0.0;
};

struct EncoderSettings {
    double cap_percentile = 0.95;
    double delta_cap_minutes = 60.0;
    std::vector<std::string> gender_categories{"female", "male"};
};

struct EncoderState {
    std::vector<ColumnSpec> columns;
    double cap_percentile = 0.95;
    double delta_cap_minutes = 60.0;
    std::vector<std::string> empty_columns;  // numeric columns with no training data

    std::size_t dim() const { return columns.size(); }
    std::vector<std::string> column_names() const {
        std::vector<std::string> out;
        out.reserve(columns.size());
        for (const auto& c : columns) out.push_back(c.name);
        return out;
    }
};

inline constexpr std::int8_t kNoLabel = -1;

/// One sample (x, y, w) of one user.
struct SampleRow {
    std::string user_id;
    std::int64_t wall_time_ms = 0;
    std::int64_t delta_ms = 0;  // raw (capped) time delta; column 0 is its rescaled value
    std::vector<float> x;
    std::int8_t y = kNoLabel;
    double w = 0.0;
    std::string category;  // app category of the labeled notification, bookkeeping only

    bool labeled() const { return y != kNoLabel; }
    bool operator==(const SampleRow&) const = default;
};

/// Per-user encoded rows, keyed by user id.
using RowStreams = std::map<std::string, std::vector<SampleRow>>;

inline std::size_t row_count(const RowStreams& rows) {
    std::size_t n = 0;
    for (const auto& [_, r] : rows) n += r.size();
    return n;
}

/// Nearest-rank percentile of an ascending-sorted sample.
inline double nearest_rank(const std::vector<double>& sorted, double percentile) {
    if (sorted.empty()) return 0.0;
    const double n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(percentile * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

inline double rescale(double v, double min, double cap) {
    if (std::isnan(v)) return 0.0;
    if (!(cap > min)) return kLiveFloor;
    const double c = std::clamp(v, min, cap);
    return kLiveFloor + (1.0 - kLiveFloor) * (c - min) / (cap - min);
}

inline double rescale(double v, const ColumnSpec& spec) { return rescale(v, spec.fitted_min, spec.fitted_cap); }

/// Minutes between two events, capped.
inline double time_delta(std::int64_t prev_ms, std::int64_t cur_ms, double cap_minutes = 60.0) {
    return std::min(static_cast<double>(cur_ms - prev_ms) / static_cast<double>(kMinuteMs), cap_minutes);
}

inline std::int64_t capped_delta_ms(std::optional<std::int64_t> prev_ms, std::int64_t cur_ms,
                                    double cap_minutes = 60.0) {
    const auto cap = static_cast<std::int64_t>(std::llround(cap_minutes * static_cast<double>(kMinuteMs)));
    if (!prev_ms) return cap;
    return std::min(cur_ms - *prev_ms, cap);
}

inline float encode_delta(std::int64_t delta_ms, double cap_minutes) {
    return static_cast<float>(
        rescale(static_cast<double>(delta_ms) / static_cast<double>(kMinuteMs), 0.0, cap_minutes));
}

struct CalendarFeatures {
    int day_of_week;  // ISO, Monday = 1
    int hour_of_day;
    bool working_day;
};

inline CalendarFeatures calendar(std::int64_t t_ms) {
    const std::int64_t day = t_ms / kDayMs;
    const int iso = static_cast<int>((day + 3) % 7) + 1;  // 1970-01-01 was a Thursday
    const int hour = static_cast<int>((t_ms % kDayMs) / 3'600'000);
    return {iso, hour, iso <= 5};
}

namespace detail {

inline std::vector<ColumnSpec> layout_columns(const Schema& schema, const EncoderSettings& s) {
    std::vector<ColumnSpec> cols;
    cols.push_back({"time_delta", ColumnKind::time_delta, ColumnSource::time_delta, "", "", "", 0.0,
                    s.delta_cap_minutes});
    for (const auto& sensor : schema.sensors()) {
        std::vector<const FieldSpec*> fields;
        for (const auto& f : sensor.fields) fields.push_back(&f);
        std::sort(fields.begin(), fields.end(),
                  [](const FieldSpec* a, const FieldSpec* b) { return a->name < b->name; });
        for (const FieldSpec* f : fields) {
            const std::string base = sensor.name + "." + f->name;
            if (f->categorical) {
                for (const auto& c : f->categories)
                    cols.push_back({base + "=" + c, ColumnKind::one_hot, ColumnSource::sensor, sensor.name,
                                    f->name, c, 0.0, 1.0});
            } else {
                cols.push_back({base, ColumnKind::numeric, ColumnSource::sensor, sensor.name, f->name, "",
                                0.0, 0.0});
            }
        }
    }
    cols.push_back({"ctx.day_of_week", ColumnKind::numeric, ColumnSource::day_of_week, "", "", "", 1.0, 7.0});
    cols.push_back({"ctx.hour_of_day", ColumnKind::numeric, ColumnSource::hour_of_day, "", "", "", 0.0, 23.0});
    cols.push_back({"ctx.working_day", ColumnKind::numeric, ColumnSource::working_day, "", "", "", 0.0, 1.0});
    cols.push_back({"demo.age", ColumnKind::numeric, ColumnSource::age, "", "", "", 0.0, 0.0});
    for (const auto& g : s.gender_categories)
        cols.push_back({"demo.gender=" + g, ColumnKind::one_hot, ColumnSource::gender, "", "", g, 0.0, 1.0});
    return cols;
}

/// Fast lookup of the columns belonging to a (sensor, field) pair.
class ColumnIndex {
public:
    explicit ColumnIndex(const EncoderState& state) {
        for (std::size_t i = 0; i < state.columns.size(); ++i) {
            const auto& c = state.columns[i];
            if (c.source == ColumnSource::sensor) by_field_[c.sensor + '\x1f' + c.field].push_back(i);
            if (c.source == ColumnSource::day_of_week) day_ = i;
            if (c.source == ColumnSource::hour_of_day) hour_ = i;
            if (c.source == ColumnSource::working_day) working_ = i;
            if (c.source == ColumnSource::age) age_ = i;
            if (c.source == ColumnSource::gender) gender_.push_back(i);
        }
    }
    const std::vector<std::size_t>* field(const std::string& sensor, const std::string& f) const {
        auto it = by_field_.find(sensor + '\x1f' + f);
        return it == by_field_.end() ? nullptr : &it->second;
    }
    std::optional<std::size_t> day_, hour_, working_, age_;
    std::vector<std::size_t> gender_;

private:
    std::unordered_map<std::string, std::vector<std::size_t>> by_field_;
};

}  // namespace detail

/// Fits per-column min and percentile cap on the training stream only.
inline EncoderState fit(const UserStreams& train, const Schema& schema, const ProfileMap& profiles = {},
                        const EncoderSettings& settings = {}) {
    if (train.empty()) throw ConfigError("encoder fit: empty training stream");
    if (!(settings.cap_percentile > 0.0 && settings.cap_percentile <= 1.0))
        throw ConfigError("encoder fit: cap_percentile must lie in (0, 1]");
    if (!(settings.delta_cap_minutes > 0.0)) throw ConfigError("encoder fit: delta_cap_minutes must be > 0");

    EncoderState state;
    state.cap_percentile = settings.cap_percentile;
    state.delta_cap_minutes = settings.delta_cap_minutes;
    state.columns = detail::layout_columns(schema, settings);

    std::map<std::size_t, std::vector<double>> samples;
    const detail::ColumnIndex index(state);
    for (const auto& [user, events] : train) {
        for (const auto& e : events) {
            for (const auto& [fname, value] : e.values) {
                const auto* d = std::get_if<double>(&value);
                if (d == nullptr || std::isnan(*d)) continue;
                if (const auto* cols = index.field(e.sensor, fname)) samples[cols->front()].push_back(*d);
            }
        }
        if (auto p = profiles.find(user); p != profiles.end() && p->second.age && index.age_)
            samples[*index.age_].push_back(*p->second.age);
    }
    for (std::size_t i = 0; i < state.columns.size(); ++i) {
        auto& col = state.columns[i];
        if (col.kind != ColumnKind::numeric) continue;
        if (col.source != ColumnSource::sensor && col.source != ColumnSource::age) continue;
        auto& v = samples[i];
        if (v.empty()) {
            col.fitted_min = col.fitted_cap = 0.0;
            state.empty_columns.push_back(col.name);
            continue;
        }
        std::sort(v.begin(), v.end());
        col.fitted_min = v.front();
        col.fitted_cap = std::max(nearest_rank(v, settings.cap_percentile), col.fitted_min);
    }
    return state;
}

/// Keeps the labels whose anchor event is part of `stream`.
inline std::vector<LabeledEvent> labels_within(const UserStreams& stream, const std::vector<LabeledEvent>& labels) {
    std::vector<LabeledEvent> out;
    for (const auto& l : labels) {
        auto it = stream.find(l.user_id);
        if (it == stream.end() || it->second.empty()) continue;
        if (l.anchor >= it->second.front().seq && l.anchor <= it->second.back().seq) out.push_back(l);
    }
    return out;
}

/// One SampleRow per event. Labels sit on their anchor row with provisional w = 1.
inline RowStreams encode_stream(const UserStreams& stream, const std::vector<LabeledEvent>& labels,
                                const ProfileMap& profiles, const EncoderState& state) {
    const detail::ColumnIndex index(state);
    std::map<std::string, std::map<std::size_t, const LabeledEvent*>> by_user;
    for (const auto& l : labels) by_user[l.user_id][l.anchor] = &l;

    RowStreams out;
    for (const auto& [user, events] : stream) {
        auto& rows = out[user];
        rows.reserve(events.size());
        const UserProfile* profile = nullptr;
        if (auto p = profiles.find(user); p != profiles.end()) profile = &p->second;

        std::optional<std::int64_t> prev;
        for (const auto& e : events) {
            SampleRow r;
            r.user_id = user;
            r.wall_time_ms = e.timestamp_ms;
            r.delta_ms = capped_delta_ms(prev, e.timestamp_ms, state.delta_cap_minutes);
            prev = e.timestamp_ms;
            r.x.assign(state.dim(), 0.0f);
            r.x[0] = encode_delta(r.delta_ms, state.delta_cap_minutes);

            for (const auto& [fname, value] : e.values) {
                const auto* cols = index.field(e.sensor, fname);
                if (cols == nullptr) continue;
                if (const auto* d = std::get_if<double>(&value)) {
                    r.x[cols->front()] = static_cast<float>(rescale(*d, state.columns[cols->front()]));
                } else {
                    const auto& cat = std::get<std::string>(value);
                    for (std::size_t c : *cols)
                        r.x[c] = state.columns[c].category == cat ? 1.0f : static_cast<float>(kLiveFloor);
                }
            }

            const auto cal = calendar(e.timestamp_ms);
            if (index.day_) r.x[*index.day_] = static_cast<float>(rescale(cal.day_of_week, state.columns[*index.day_]));
            if (index.hour_)
                r.x[*index.hour_] = static_cast<float>(rescale(cal.hour_of_day, state.columns[*index.hour_]));
            if (index.working_)
                r.x[*index.working_] =
                    static_cast<float>(rescale(cal.working_day ? 1.0 : 0.0, state.columns[*index.working_]));
            if (profile != nullptr) {
                if (profile->age && index.age_)
                    r.x[*index.age_] = static_cast<float>(rescale(*profile->age, state.columns[*index.age_]));
                if (profile->gender) {
                    bool known = false;
                    for (std::size_t c : index.gender_) known |= state.columns[c].category == *profile->gender;
                    if (known)
                        for (std::size_t c : index.gender_)
                            r.x[c] = state.columns[c].category == *profile->gender ? 1.0f
                                                                                   : static_cast<float>(kLiveFloor);
                }
            }
            rows.push_back(std::move(r));
        }

        if (auto lu = by_user.find(user); lu != by_user.end()) {
            std::unordered_map<std::size_t, std::size_t> row_of_seq;
            for (std::size_t i = 0; i < events.size(); ++i) row_of_seq[events[i].seq] = i;
            for (const auto& [anchor, l] : lu->second) {
                auto it = row_of_seq.find(anchor);
                if (it == row_of_seq.end()) throw LabelAnchorMissing(anchor);
                auto& row = rows[it->second];
                row.y = static_cast<std::int8_t>(l->label);
                row.w = 1.0;
                row.category = l->app_category;
            }
        }
    }
    for (const auto& [user, lmap] : by_user)
        if (!stream.count(user)) throw LabelAnchorMissing(lmap.begin()->first);
    return out;
}

// Stats file: versioned, tab-separated (name, kind, min, cap).

inline const char* kind_name(ColumnKind k) {
    switch (k) {
        case ColumnKind::time_delta: return "time_delta";
        case ColumnKind::numeric: return "numeric";
        case ColumnKind::one_hot: return "one_hot";
    }
    return "?";
}

inline void write_encoder_state(std::ostream& out, const EncoderState& s) {
    out.precision(17);
    out << "sensorseq-encoder 1\n";
    out << "cap_percentile\t" << s.cap_percentile << '\n';
    out << "delta_cap_minutes\t" << s.delta_cap_minutes << '\n';
    out << "columns\t" << s.columns.size() << '\n';
    for (const auto& c : s.columns)
        out << c.name << '\t' << kind_name(c.kind) << '\t' << c.fitted_min << '\t' << c.fitted_cap << '\n';
}

inline EncoderState read_encoder_state(std::istream& in) {
    EncoderState s;
    std::string magic, key;
    int version = 0;
    std::size_t n = 0;
    if (!(in >> magic >> version) || magic != "sensorseq-encoder" || version != 1)
        throw IoError("encoder stats: bad header");
    if (!(in >> key >> s.cap_percentile) || key != "cap_percentile" ||
        !(in >> key >> s.delta_cap_minutes) || key != "delta_cap_minutes" || !(in >> key >> n) ||
        key != "columns")
        throw IoError("encoder stats: bad preamble");
    for (std::size_t i = 0; i < n; ++i) {
        ColumnSpec c;
        std::string kind;
        if (!(in >> c.name >> kind >> c.fitted_min >> c.fitted_cap)) throw IoError("encoder stats: truncated");
        c.kind = kind == "time_delta" ? ColumnKind::time_delta
                 : kind == "one_hot"  ? ColumnKind::one_hot
                                      : ColumnKind::numeric;
        if (c.kind == ColumnKind::time_delta) {
            c.source = ColumnSource::time_delta;
        } else if (c.name == "ctx.day_of_week") {
            c.source = ColumnSource::day_of_week;
        } else if (c.name == "ctx.hour_of_day") {
            c.source = ColumnSource::hour_of_day;
        } else if (c.name == "ctx.working_day") {
            c.source = ColumnSource::working_day;
        } else if (c.name == "demo.age") {
            c.source = ColumnSource::age;
        } else if (c.name.rfind("demo.gender=", 0) == 0) {
            c.source = ColumnSource::gender;
            c.category = c.name.substr(12);
        } else {
            c.source = ColumnSource::sensor;
            const auto dot = c.name.find('.');
            const auto eq = c.name.find('=');
            c.sensor = c.name.substr(0, dot);
            c.field = c.name.substr(dot + 1, eq == std::string::npos ? std::string::npos : eq - dot - 1);
            if (eq != std::string::npos) c.category = c.name.substr(eq + 1);
        }
        s.columns.push_back(std::move(c));
    }
    return s;
}

}  // namespace sensorseq
