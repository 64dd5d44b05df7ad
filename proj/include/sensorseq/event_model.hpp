#pragma once

// Sensor schema, raw event records, validation and the chronological
// train / valid / known-test / unknown-test split.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sensorseq/error.hpp"
#include "sensorseq/random.hpp"

namespace sensorseq {

inline constexpr std::int64_t kMinuteMs = 60'000;
inline constexpr std::int64_t kDayMs = 86'400'000;

enum class SensorMode { periodical, event_driven };

struct FieldSpec {
    std::string name;
    bool categorical = false;
    std::vector<std::string> categories;  // categorical only, ordered
};

struct SensorKind {
    std::string name;
    SensorMode mode = SensorMode::event_driven;
    std::vector<FieldSpec> fields;
    double period_minutes = 0.0;  // periodical only

    const FieldSpec* field(const std::string& field_name) const {
        for (const auto& f : fields)
            if (f.name == field_name) return &f;
        return nullptr;
    }
};

class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<SensorKind> sensors) : sensors_(std::move(sensors)) { check(); }

    const std::vector<SensorKind>& sensors() const { return sensors_; }

    const SensorKind* find(const std::string& name) const {
        for (const auto& s : sensors_)
            if (s.name == name) return &s;
        return nullptr;
    }

    /// Phone-usage sensors, app categories and notification fields.
    static Schema default_schema();

    static Schema from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

private:
    void check() const {
        std::set<std::string> names;
        for (const auto& s : sensors_) {
            if (s.name.empty()) throw ConfigError("sensor with empty name");
            if (!names.insert(s.name).second) throw ConfigError("duplicate sensor " + s.name);
            if (s.fields.empty()) throw ConfigError("sensor " + s.name + " has no fields");
            if (s.mode == SensorMode::periodical && !(s.period_minutes > 0.0))
                throw ConfigError("periodical sensor " + s.name + " needs period_minutes > 0");
            std::set<std::string> fnames;
            for (const auto& f : s.fields) {
                if (!fnames.insert(f.name).second)
                    throw ConfigError("duplicate field " + s.name + "." + f.name);
                if (f.categorical && f.categories.size() < 2)
                    throw ConfigError("categorical field " + s.name + "." + f.name +
                                      " needs at least 2 categories");
            }
        }
    }

    std::vector<SensorKind> sensors_;
};

inline const std::vector<std::string>& app_categories() {
    static const std::vector<std::string> cats{"messaging", "email", "social",
                                               "news",      "system", "keyboard"};
    return cats;
}

inline Schema Schema::default_schema() {
    auto numeric = [](std::string n) { return FieldSpec{std::move(n), false, {}}; };
    auto cat = [](std::string n, std::vector<std::string> c) {
        return FieldSpec{std::move(n), true, std::move(c)};
    };
    constexpr auto P = SensorMode::periodical;
    constexpr auto E = SensorMode::event_driven;
    std::vector<SensorKind> s{
        {"accelerometer", P, {numeric("mean"), numeric("max")}, 10.0},
        {"battery", P, {numeric("drain")}, 10.0},
        {"data", P, {numeric("total_rx"), numeric("total_tx"), numeric("cell_rx"), numeric("cell_tx")}, 10.0},
        {"light", P, {numeric("lux")}, 10.0},
        {"noise", P, {numeric("db")}, 10.0},
        {"location", P, {cat("place", {"home", "work", "single", "repeated", "passing", "unknown"})}, 10.0},
        {"app", E, {cat("category", app_categories())}, 0.0},
        {"audio_music", E, {cat("state", {"music", "no_music"})}, 0.0},
        {"audio_source", E, {cat("output", {"speaker", "headphones"})}, 0.0},
        {"charging", E, {cat("state", {"charging", "not_charging"})}, 0.0},
        {"notification", E, {cat("action", {"post", "remove"}), cat("category", app_categories())}, 0.0},
        {"notification_center", E, {numeric("accessed")}, 0.0},
        {"ringer", E, {cat("mode", {"normal", "silent", "vibrate"})}, 0.0},
        {"screen", E, {cat("state", {"on", "off", "unlocked"})}, 0.0},
        {"screen_orientation", E, {cat("orientation", {"portrait", "landscape"})}, 0.0},
    };
    return Schema(std::move(s));
}

inline Schema Schema::from_json(const nlohmann::json& j) {
    try {
        std::vector<SensorKind> sensors;
        for (const auto& js : j.at("sensors")) {
            SensorKind k;
            k.name = js.at("name").get<std::string>();
            const auto mode = js.at("mode").get<std::string>();
            if (mode == "periodical")
                k.mode = SensorMode::periodical;
            else if (mode == "event_driven")
                k.mode = SensorMode::event_driven;
            else
                throw ConfigError("unknown sensor mode '" + mode + "'");
            k.period_minutes = js.value("period_minutes", 0.0);
            for (const auto& jf : js.at("fields")) {
                FieldSpec f;
                f.name = jf.at("name").get<std::string>();
                const auto kind = jf.value("kind", std::string("numeric"));
                if (kind != "numeric" && kind != "categorical")
                    throw ConfigError("unknown field kind '" + kind + "'");
                f.categorical = kind == "categorical";
                if (f.categorical) f.categories = jf.at("categories").get<std::vector<std::string>>();
                k.fields.push_back(std::move(f));
            }
            sensors.push_back(std::move(k));
        }
        return Schema(std::move(sensors));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("schema: ") + e.what());
    }
}

inline nlohmann::json Schema::to_json() const {
    nlohmann::json out;
    out["version"] = 1;
    out["sensors"] = nlohmann::json::array();
    for (const auto& s : sensors_) {
        nlohmann::json js;
        js["name"] = s.name;
        js["mode"] = s.mode == SensorMode::periodical ? "periodical" : "event_driven";
        if (s.mode == SensorMode::periodical) js["period_minutes"] = s.period_minutes;
        js["fields"] = nlohmann::json::array();
        for (const auto& f : s.fields) {
            nlohmann::json jf{{"name", f.name}, {"kind", f.categorical ? "categorical" : "numeric"}};
            if (f.categorical) jf["categories"] = f.categories;
            js["fields"].push_back(jf);
        }
        out["sensors"].push_back(js);
    }
    return out;
}

using FieldValue = std::variant<double, std::string>;

struct EventMeta {
    std::string package;
    std::string category;
    bool operator==(const EventMeta&) const = default;
};

struct SensorEvent {
    std::string user_id;
    std::int64_t timestamp_ms = 0;
    std::string sensor;
    std::map<std::string, FieldValue> values;
    std::optional<EventMeta> meta;
    /// Position in the user's validated stream; assigned by validate_stream.
    std::size_t seq = 0;

    const std::string* category_value(const std::string& field) const {
        auto it = values.find(field);
        if (it == values.end()) return nullptr;
        return std::get_if<std::string>(&it->second);
    }
};

struct UserProfile {
    std::string user_id;
    std::optional<double> age;
    std::optional<std::string> gender;
};

/// Per-user chronological event streams, keyed (and iterated) by user id.
using UserStreams = std::map<std::string, std::vector<SensorEvent>>;

struct ValidationReport {
    std::size_t input = 0;
    std::size_t accepted = 0;
    std::vector<SchemaViolation> rejected;
    std::size_t reordered = 0;  // events that arrived before an earlier timestamp of the same user
};

struct ValidatedStream {
    UserStreams users;
    ValidationReport report;

    std::size_t event_count() const {
        std::size_t n = 0;
        for (const auto& [_, ev] : users) n += ev.size();
        return n;
    }
};

namespace detail {

inline std::optional<std::string> check_event(const SensorEvent& e, const Schema& schema) {
    if (e.user_id.empty()) return "empty user_id";
    if (e.timestamp_ms < 0) return "negative timestamp";
    const SensorKind* kind = schema.find(e.sensor);
    if (kind == nullptr) return "unregistered sensor '" + e.sensor + "'";
    if (e.values.empty()) return "no values";
    for (const auto& [name, value] : e.values) {
        const FieldSpec* f = kind->field(name);
        if (f == nullptr) return "unknown field '" + e.sensor + "." + name + "'";
        if (f->categorical) {
            const auto* s = std::get_if<std::string>(&value);
            if (s == nullptr) return "field '" + name + "' expects a category";
            if (std::find(f->categories.begin(), f->categories.end(), *s) == f->categories.end())
                return "unknown category '" + *s + "' for " + e.sensor + "." + name;
        } else {
            const auto* d = std::get_if<double>(&value);
            if (d == nullptr) return "field '" + name + "' expects a number";
            if (std::isinf(*d)) return "infinite value in '" + name + "'";
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// Rejects records that do not fit the schema and sorts each user's events by
/// (timestamp, sensor name, input order). Out-of-order arrival is counted, not rejected.
/// With strict = true the first violation is thrown instead of recorded.
inline ValidatedStream validate_stream(const std::vector<SensorEvent>& events, const Schema& schema,
                                       bool strict = false) {
    ValidatedStream out;
    out.report.input = events.size();
    std::map<std::string, std::vector<std::size_t>> order;
    std::map<std::string, std::int64_t> last_seen;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (auto why = detail::check_event(events[i], schema)) {
            SchemaViolation v(i, *why);
            if (strict) throw v;
            out.report.rejected.push_back(std::move(v));
            continue;
        }
        const auto& e = events[i];
        auto [it, fresh] = last_seen.try_emplace(e.user_id, e.timestamp_ms);
        if (!fresh) {
            if (e.timestamp_ms < it->second)
                ++out.report.reordered;
            else
                it->second = e.timestamp_ms;
        }
        order[e.user_id].push_back(i);
        ++out.report.accepted;
    }
    for (auto& [user, idx] : order) {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const auto& ea = events[a];
            const auto& eb = events[b];
            if (ea.timestamp_ms != eb.timestamp_ms) return ea.timestamp_ms < eb.timestamp_ms;
            if (ea.sensor != eb.sensor) return ea.sensor < eb.sensor;
            return a < b;
        });
        auto& stream = out.users[user];
        stream.reserve(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            stream.push_back(events[idx[k]]);
            stream.back().seq = k;
        }
    }
    return out;
}

struct SplitSpec {
    int train_days = 14;
    int valid_days = 7;
    int test_days = 7;
    double unknown_user_fraction = 22.0 / 279.0;
    std::uint64_t seed = 0;

    int total_days() const { return train_days + valid_days + test_days; }
};

struct DatasetSplit {
    UserStreams train;
    UserStreams valid;
    UserStreams known_test;
    UserStreams unknown_test;
    std::vector<std::string> unknown_users;
    std::vector<std::string> dropped_users;  // InsufficientSpan
};

/// Day index of an event relative to the midnight (UTC) preceding the user's first event.
inline int day_index(std::int64_t first_ms, std::int64_t t_ms) {
    const std::int64_t origin = first_ms - first_ms % kDayMs;
    return static_cast<int>((t_ms - origin) / kDayMs);
}

/// Chronological split per user (train / valid / open-ended test window) plus a
/// seeded sample of users held out entirely, whose test-window data forms unknown_test.
inline DatasetSplit split_dataset(const UserStreams& stream, const SplitSpec& spec) {
    if (spec.train_days < 1 || spec.valid_days < 0 || spec.test_days < 1)
        throw ConfigError("split: train_days >= 1, valid_days >= 0, test_days >= 1 required");
    if (spec.unknown_user_fraction < 0.0 || spec.unknown_user_fraction > 1.0)
        throw ConfigError("split: unknown_user_fraction must lie in [0, 1]");

    DatasetSplit out;
    std::vector<std::string> retained;
    for (const auto& [user, events] : stream) {
        if (events.empty() ||
            day_index(events.front().timestamp_ms, events.back().timestamp_ms) < spec.total_days() - 1) {
            out.dropped_users.push_back(user);
            continue;
        }
        retained.push_back(user);
    }

    const auto n_unknown = static_cast<std::size_t>(
        std::llround(spec.unknown_user_fraction * static_cast<double>(retained.size())));
    std::vector<std::string> shuffled = retained;
    Rng rng(derive_seed(spec.seed, "split"));
    rng.shuffle(shuffled);
    std::set<std::string> unknown(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_unknown));
    out.unknown_users.assign(unknown.begin(), unknown.end());

    const int valid_start = spec.train_days;
    const int test_start = spec.train_days + spec.valid_days;
    for (const auto& user : retained) {
        const auto& events = stream.at(user);
        const bool is_unknown = unknown.count(user) > 0;
        const std::int64_t first = events.front().timestamp_ms;
        for (const auto& e : events) {
            const int d = day_index(first, e.timestamp_ms);
            if (d >= test_start)
                (is_unknown ? out.unknown_test : out.known_test)[user].push_back(e);
            else if (is_unknown)
                continue;
            else if (d >= valid_start)
                out.valid[user].push_back(e);
            else
                out.train[user].push_back(e);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Line-delimited event log: one JSON object per line.
//   {"user_id": "...", "timestamp_ms": 0, "sensor": "...", "values": {...},
//    "meta": {"package": "...", "category": "..."}}
// Numeric values may be null (missing -> NaN).
// ---------------------------------------------------------------------------

inline nlohmann::json event_to_json(const SensorEvent& e) {
    nlohmann::json j;
    j["user_id"] = e.user_id;
    j["timestamp_ms"] = e.timestamp_ms;
    j["sensor"] = e.sensor;
    nlohmann::json vals = nlohmann::json::object();
    for (const auto& [k, v] : e.values) {
        if (const auto* d = std::get_if<double>(&v))
            vals[k] = std::isnan(*d) ? nlohmann::json(nullptr) : nlohmann::json(*d);
        else
            vals[k] = std::get<std::string>(v);
    }
    j["values"] = std::move(vals);
    if (e.meta) j["meta"] = {{"package", e.meta->package}, {"category", e.meta->category}};
    return j;
}

inline SensorEvent event_from_json(const nlohmann::json& j) {
    SensorEvent e;
    e.user_id = j.at("user_id").get<std::string>();
    e.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    e.sensor = j.at("sensor").get<std::string>();
    for (const auto& [k, v] : j.at("values").items()) {
        if (v.is_null())
            e.values[k] = std::nan("");
        else if (v.is_number())
            e.values[k] = v.get<double>();
        else if (v.is_string())
            e.values[k] = v.get<std::string>();
        else
            throw std::invalid_argument("value '" + k + "' is neither number, string nor null");
    }
    if (auto it = j.find("meta"); it != j.end() && !it->is_null())
        e.meta = EventMeta{it->value("package", std::string()), it->value("category", std::string())};
    return e;
}

struct ParsedLog {
    std::vector<SensorEvent> events;
    std::vector<SchemaViolation> malformed;  // record index = line number (0-based)
};

inline ParsedLog parse_event_log(std::istream& in) {
    ParsedLog out;
    std::string line;
    std::size_t lineno = 0;
    for (; std::getline(in, line); ++lineno) {
        if (line.empty()) continue;
        try {
            out.events.push_back(event_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& ex) {
            out.malformed.emplace_back(lineno, std::string("malformed record: ") + ex.what());
        }
    }
    return out;
}

inline void write_event_log(std::ostream& out, const UserStreams& users) {
    for (const auto& [_, events] : users)
        for (const auto& e : events) out << event_to_json(e).dump() << '\n';
}

inline void write_event_log(std::ostream& out, const std::vector<SensorEvent>& events) {
    for (const auto& e : events) out << event_to_json(e).dump() << '\n';
}

inline nlohmann::json profile_to_json(const UserProfile& p) {
    nlohmann::json j{{"user_id", p.user_id}};
    j["age"] = p.age ? nlohmann::json(*p.age) : nlohmann::json(nullptr);
    j["gender"] = p.gender ? nlohmann::json(*p.gender) : nlohmann::json(nullptr);
    return j;
}

inline UserProfile profile_from_json(const nlohmann::json& j) {
    UserProfile p;
    p.user_id = j.at("user_id").get<std::string>();
    if (auto it = j.find("age"); it != j.end() && !it->is_null()) {
        p.age = it->get<double>();
        if (*p.age < 10.0 || *p.age > 120.0)
            throw ConfigError("profile " + p.user_id + ": age outside [10, 120]");
    }
    if (auto it = j.find("gender"); it != j.end() && !it->is_null()) p.gender = it->get<std::string>();
    return p;
}

using ProfileMap = std::map<std::string, UserProfile>;

inline ProfileMap read_profiles(std::istream& in) {
    ProfileMap out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            auto p = profile_from_json(nlohmann::json::parse(line));
            out[p.user_id] = std::move(p);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string("profiles: ") + e.what());
        }
    }
    return out;
}

inline void write_profiles(std::ostream& out, const ProfileMap& profiles) {
    for (const auto& [_, p] : profiles) out << profile_to_json(p).dump() << '\n';
}

}  // namespace sensorseq
