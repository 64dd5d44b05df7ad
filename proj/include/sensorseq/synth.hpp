#pragma once

// Deterministic synthetic phone-usage logs with a planted attendance model.
//
// Periodical sensors report every `period_minutes`; screen sessions, app
// opens, notifications and the remaining event-driven sensors are point
// processes with a per-user diurnal intensity. Each notification's chance of
// being opened within the window is sigmoid(intercept + planted terms); the
// intercept is solved so that the mean planted probability hits the target
// base rate.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sensorseq/encoder.hpp"
#include "sensorseq/error.hpp"
#include "sensorseq/event_model.hpp"
#include "sensorseq/parallel.hpp"
#include "sensorseq/random.hpp"

namespace sensorseq {

struct PlantedCoefficients {
    double screen_on = 3.5;
    double ringer_vibrate = -1.0;
    double ringer_silent = -3.0;
    std::map<std::string, double> place{{"home", 0.8}, {"work", -1.2}, {"passing", -1.2},
                                        {"repeated", 0.0}, {"single", -0.5}, {"unknown", 0.0}};
    std::map<std::string, double> category{{"messaging", 0.8}, {"email", -0.4}, {"social", 0.2},
                                           {"news", -0.8}, {"system", 0.0}, {"keyboard", 0.0}};
    double hour_cos = -1.0;  // cos(2*pi*hour/24)
    double hour_sin = -1.0;  // sin(2*pi*hour/24)
    double user_bias_sd = 0.4;

    static PlantedCoefficients none() {
        PlantedCoefficients c;
        c.screen_on = c.ringer_vibrate = c.ringer_silent = c.hour_cos = c.hour_sin = c.user_bias_sd = 0.0;
        for (auto& [_, v] : c.place) v = 0.0;
        for (auto& [_, v] : c.category) v = 0.0;
        return c;
    }
};

struct SynthConfig {
    std::size_t n_users = 40;
    int days = 14;
    std::uint64_t seed = 7;
    std::int64_t start_ms = 1'465'171'200'000;  // Monday 2016-06-06 00:00 UTC
    double period_minutes = 10.0;
    double screen_sessions_per_hour = 3.0;  // while awake
    double app_opens_per_session = 0.5;
    double notifications_per_day = 48.0;
    double orientation_changes_per_day = 6.0;
    double music_sessions_per_day = 1.5;
    double ringer_changes_per_day = 2.0;
    double notification_center_per_day = 6.0;
    double target_base_rate = 0.45;
    double removal_probability = 0.5;  // unattended notifications that get swiped away
    double late_open_probability = 0.3;
    PlantedCoefficients planted;

    void check() const {
        if (n_users < 1 || days < 1) throw ConfigError("synth: n_users and days must be >= 1");
        if (!(period_minutes > 0.0)) throw ConfigError("synth: period_minutes must be > 0");
        if (!(target_base_rate > 0.0 && target_base_rate < 1.0)) throw ConfigError("synth: target_base_rate in (0,1)");
        for (double r : {screen_sessions_per_hour, app_opens_per_session, notifications_per_day,
                         orientation_changes_per_day, music_sessions_per_day, ringer_changes_per_day,
                         notification_center_per_day})
            if (r < 0.0) throw ConfigError("synth: rates must be >= 0");
    }
};

struct HiddenTruthRecord {
    std::string user_id;
    std::int64_t timestamp_ms = 0;
    std::string package;
    std::string category;
    double probability = 0.0;
};

struct SynthOutput {
    std::vector<SensorEvent> events;  // grouped by user, strictly increasing time per user
    ProfileMap profiles;
    std::vector<HiddenTruthRecord> truth;
    double intercept = 0.0;
};

namespace synth_detail {

inline const std::map<std::string, std::vector<std::string>>& packages() {
    static const std::map<std::string, std::vector<std::string>> p{
        {"messaging", {"com.whatsapp", "org.telegram.messenger", "com.facebook.orca"}},
        {"email", {"com.google.android.gm", "com.microsoft.office.outlook"}},
        {"social", {"com.facebook.katana", "com.instagram.android", "com.twitter.android"}},
        {"news", {"bbc.mobile.news.ww", "flipboard.app"}},
        {"system", {"android", "com.android.systemui"}},
        {"keyboard", {"com.google.android.inputmethod.latin"}},
    };
    return p;
}

struct Interval {
    std::int64_t begin;
    std::int64_t end;
};

struct PendingNotification {
    std::int64_t t;
    std::string package;
    std::string category;
    double logit_rest;  // planted logit without the global intercept
};

struct Tagged {
    SensorEvent event;
    int truth = -1;  // index into the user's pending notifications
};

struct UserDraft {
    std::string user_id;
    UserProfile profile;
    std::vector<Tagged> events;
    std::vector<PendingNotification> notifications;
    std::vector<Interval> sessions;
    std::map<std::string, std::string> package_of;  // category -> package
};

inline double hour_of(std::int64_t t) { return static_cast<double>(t % kDayMs) / 3'600'000.0; }

inline bool in_any(const std::vector<Interval>& iv, std::int64_t t) {
    auto it = std::upper_bound(iv.begin(), iv.end(), t, [](std::int64_t v, const Interval& i) { return v < i.begin; });
    if (it == iv.begin()) return false;
    --it;
    return t >= it->begin && t < it->end;
}

inline double overlap_fraction(const std::vector<Interval>& iv, std::int64_t a, std::int64_t b) {
    std::int64_t covered = 0;
    auto it = std::upper_bound(iv.begin(), iv.end(), a, [](std::int64_t v, const Interval& i) { return v < i.begin; });
    if (it != iv.begin()) --it;
    for (; it != iv.end() && it->begin < b; ++it) covered += std::max<std::int64_t>(0, std::min(b, it->end) - std::max(a, it->begin));
    return static_cast<double>(covered) / static_cast<double>(b - a);
}

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[static_cast<std::size_t>(rng.below(v.size()))];
}

inline std::string pick_weighted(Rng& rng, const std::vector<std::pair<std::string, double>>& w) {
    double total = 0;
    for (const auto& [_, p] : w) total += p;
    double u = rng.uniform() * total;
    for (const auto& [k, p] : w) {
        if (u < p) return k;
        u -= p;
    }
    return w.back().first;
}

/// Everything except the responses to notifications.
inline UserDraft draft_user(const SynthConfig& cfg, std::size_t index) {
    UserDraft d;
    char id[16];
    std::snprintf(id, sizeof id, "u%03zu", index);
    d.user_id = id;
    Rng rng(derive_seed(cfg.seed, d.user_id));
    const std::int64_t t0 = cfg.start_ms;
    const std::int64_t t_end = t0 + static_cast<std::int64_t>(cfg.days) * kDayMs;

    d.profile.user_id = d.user_id;
    d.profile.age = std::floor(rng.uniform(18.0, 67.0));
    d.profile.gender = rng.bernoulli(0.5) ? "female" : "male";
    for (const auto& [cat, pk] : packages()) d.package_of[cat] = pick(rng, pk);

    const double wake = rng.uniform(6.0, 8.5);
    const double sleep = rng.uniform(22.5, 24.5);
    const double work_start = rng.uniform(8.0, 10.0);
    const double activity = rng.uniform(0.7, 1.3);
    const double user_bias = cfg.planted.user_bias_sd * rng.normal();
    auto awake = [&](std::int64_t t) {
        const double h = hour_of(t);
        return (h >= wake && h < std::min(sleep, 24.0)) || (sleep > 24.0 && h < sleep - 24.0);
    };
    auto weekday = [&](std::int64_t t) { return calendar(t).working_day; };

    auto emit = [&](std::int64_t t, const std::string& sensor, std::map<std::string, FieldValue> values,
                    std::optional<EventMeta> meta = std::nullopt, int truth = -1) {
        if (t < t0 || t >= t_end) return;
        SensorEvent e;
        e.user_id = d.user_id;
        e.timestamp_ms = t;
        e.sensor = sensor;
        e.values = std::move(values);
        e.meta = std::move(meta);
        d.events.push_back({std::move(e), truth});
    };
    auto cat_value = [](const std::string& s) { return FieldValue{s}; };

    // Hourly place schedule.
    std::vector<std::string> place_by_hour;
    for (std::int64_t h = t0; h < t_end; h += 3'600'000) {
        const double hh = hour_of(h);
        std::string place;
        if (!awake(h) || hh < 7.0)
            place = "home";
        else if (weekday(h) && hh >= work_start && hh < work_start + 8.0)
            place = rng.bernoulli(0.85) ? "work" : pick_weighted(rng, {{"repeated", 0.5}, {"passing", 0.5}});
        else if (weekday(h) && (std::abs(hh - (work_start - 0.5)) < 0.75 || std::abs(hh - (work_start + 8.5)) < 0.75))
            place = "passing";
        else
            place = pick_weighted(rng, {{"home", 0.5}, {"repeated", 0.2}, {"single", 0.1}, {"passing", 0.1}, {"unknown", 0.1}});
        place_by_hour.push_back(place);
    }
    auto place_at = [&](std::int64_t t) { return place_by_hour[static_cast<std::size_t>((t - t0) / 3'600'000)]; };

    // Screen sessions (thinned Poisson, awake intensity 1, asleep 0.05).
    {
        const double rate = cfg.screen_sessions_per_hour * activity / 3'600'000.0;
        std::int64_t t = t0;
        while (rate > 0.0) {
            t += static_cast<std::int64_t>(rng.exponential(rate));
            if (t >= t_end) break;
            if (!rng.bernoulli(awake(t) ? 1.0 : 0.05)) continue;
            const auto dur = static_cast<std::int64_t>(std::clamp(rng.exponential(1.0 / 240'000.0), 20'000.0, 1'800'000.0));
            d.sessions.push_back({t, t + dur});
            emit(t, "screen", {{"state", cat_value("on")}});
            std::int64_t unlock = t;
            if (rng.bernoulli(0.75)) {
                unlock = t + static_cast<std::int64_t>(rng.uniform(1'000.0, 8'000.0));
                emit(unlock, "screen", {{"state", cat_value("unlocked")}});
                const double n_apps = cfg.app_opens_per_session;
                const int k = static_cast<int>(std::floor(n_apps + rng.uniform()));
                for (int a = 0; a < k; ++a) {
                    const auto at = unlock + static_cast<std::int64_t>(rng.uniform(500.0, static_cast<double>(dur)));
                    const std::string cat = pick_weighted(rng, {{"messaging", 0.4}, {"social", 0.3}, {"email", 0.15}, {"news", 0.15}});
                    emit(at, "app", {{"category", cat_value(cat)}}, EventMeta{d.package_of[cat], cat});
                }
                if (rng.bernoulli(cfg.orientation_changes_per_day / 40.0)) {
                    const auto at = unlock + static_cast<std::int64_t>(rng.uniform(0.0, static_cast<double>(dur) / 2));
                    emit(at, "screen_orientation", {{"orientation", cat_value("landscape")}});
                    emit(at + static_cast<std::int64_t>(rng.uniform(10'000.0, static_cast<double>(dur) / 2)), "screen_orientation",
                         {{"orientation", cat_value("portrait")}});
                }
                if (rng.bernoulli(cfg.notification_center_per_day / 40.0))
                    emit(unlock + static_cast<std::int64_t>(rng.uniform(0.0, static_cast<double>(dur))), "notification_center",
                         {{"accessed", 1.0}});
            }
            emit(t + dur, "screen", {{"state", cat_value("off")}});
            t += dur + 5'000;
        }
    }

    // Ringer mode: initial state plus random changes.
    std::vector<std::pair<std::int64_t, std::string>> ringer;
    {
        auto draw = [&] { return pick_weighted(rng, {{"normal", 0.5}, {"vibrate", 0.3}, {"silent", 0.2}}); };
        ringer.push_back({t0 + 1'000, draw()});
        const double rate = cfg.ringer_changes_per_day / static_cast<double>(kDayMs);
        std::int64_t t = t0;
        while (rate > 0.0) {
            t += static_cast<std::int64_t>(rng.exponential(rate));
            if (t >= t_end) break;
            std::string next = draw();
            if (next == ringer.back().second) continue;
            ringer.push_back({t, next});
        }
        for (const auto& [t, m] : ringer) emit(t, "ringer", {{"mode", cat_value(m)}});
    }
    auto ringer_at = [&](std::int64_t t) {
        std::string mode = ringer.front().second;
        for (const auto& [ts, m] : ringer) {
            if (ts > t) break;
            mode = m;
        }
        return mode;
    };

    // Charging overnight, music sessions while awake.
    std::vector<Interval> charging;
    for (int day = 0; day < cfg.days; ++day) {
        const std::int64_t base = t0 + day * kDayMs;
        if (!rng.bernoulli(0.85)) continue;
        const auto begin = base + static_cast<std::int64_t>((sleep - rng.uniform(0.0, 1.5)) * 3'600'000.0);
        const auto end = base + kDayMs + static_cast<std::int64_t>((wake + rng.uniform(-0.3, 0.5)) * 3'600'000.0);
        charging.push_back({begin, end});
        emit(begin, "charging", {{"state", cat_value("charging")}});
        emit(end, "charging", {{"state", cat_value("not_charging")}});
    }
    {
        const double rate = cfg.music_sessions_per_day / static_cast<double>(kDayMs) * 1.5;
        std::int64_t t = t0;
        while (rate > 0.0) {
            t += static_cast<std::int64_t>(rng.exponential(rate));
            if (t >= t_end) break;
            if (!awake(t)) continue;
            const auto dur = static_cast<std::int64_t>(rng.uniform(600'000.0, 3'600'000.0));
            const bool phones = place_at(t) == "passing" || rng.bernoulli(0.3);
            if (phones) emit(t, "audio_source", {{"output", cat_value("headphones")}});
            emit(t + 200, "audio_music", {{"state", cat_value("music")}});
            emit(t + dur, "audio_music", {{"state", cat_value("no_music")}});
            if (phones) emit(t + dur + 5'000, "audio_source", {{"output", cat_value("speaker")}});
            t += dur;
        }
    }

    // Periodical sensors, one event per sensor per tick (1 ms apart).
    const auto period = static_cast<std::int64_t>(cfg.period_minutes * static_cast<double>(kMinuteMs));
    for (std::int64_t t = t0; t < t_end; t += period) {
        const std::int64_t from = std::max(t0, t - period);
        const double screen_frac = t > t0 ? overlap_fraction(d.sessions, from, t) : 0.0;
        const std::string place = place_at(t);
        const double hh = hour_of(t);
        const bool moving = place == "passing";
        const double acc_mean = std::exp(std::log(moving ? 1.2 : 0.08) + 0.6 * rng.normal()) + 0.3 * screen_frac;
        emit(t, "accelerometer", {{"mean", acc_mean}, {"max", acc_mean * (1.5 + std::exp(0.5 * rng.normal()))}});
        const bool plugged = in_any(charging, t);
        const double drain = plugged ? 0.0 : std::max(0.0, 1.2 + 9.0 * screen_frac + 0.6 * rng.normal());
        emit(t + 1, "battery", {{"drain", drain}});
        const double rx = std::exp(std::log(2.0 + 40.0 * screen_frac) + 1.0 * rng.normal());
        const double tx = rx * rng.uniform(0.05, 0.3);
        const bool wifi = place == "home" || place == "work";
        emit(t + 2, "data", {{"total_rx", rx}, {"total_tx", tx}, {"cell_rx", wifi ? 0.0 : rx}, {"cell_tx", wifi ? 0.0 : tx}});
        const bool daylight = hh >= 7.0 && hh < 20.5;
        const double lux = !awake(t) ? std::exp(0.5 * rng.normal())
                           : moving && daylight ? std::exp(std::log(3000.0) + 1.0 * rng.normal())
                                                : std::exp(std::log(daylight ? 250.0 : 60.0) + 0.7 * rng.normal());
        emit(t + 3, "light", {{"lux", lux}});
        emit(t + 4, "location", {{"place", cat_value(place)}});
        const double db = std::clamp((awake(t) ? 48.0 : 32.0) + (moving ? 14.0 : 0.0) + 6.0 * rng.normal(), 20.0, 100.0);
        emit(t + 5, "noise", {{"db", db}});
    }

    // Notifications: diurnal Poisson arrivals with their planted logit.
    {
        const double rate = cfg.notifications_per_day / static_cast<double>(kDayMs) * 1.3;
        std::int64_t t = t0;
        while (rate > 0.0) {
            t += static_cast<std::int64_t>(rng.exponential(rate));
            if (t >= t_end) break;
            if (!rng.bernoulli(awake(t) ? 1.0 : 0.25)) continue;
            const std::string cat = pick_weighted(rng, {{"messaging", 0.35}, {"email", 0.2}, {"social", 0.2},
                                                        {"news", 0.1}, {"system", 0.1}, {"keyboard", 0.05}});
            const auto& pc = cfg.planted;
            const std::string mode = ringer_at(t);
            const double h = hour_of(t);
            double logit = user_bias + pc.category.at(cat) + (in_any(d.sessions, t) ? pc.screen_on : 0.0) +
                           (mode == "silent" ? pc.ringer_silent : mode == "vibrate" ? pc.ringer_vibrate : 0.0) +
                           pc.place.at(place_at(t)) + pc.hour_cos * std::cos(2.0 * std::numbers::pi * h / 24.0) +
                           pc.hour_sin * std::sin(2.0 * std::numbers::pi * h / 24.0);
            d.notifications.push_back({t, d.package_of[cat], cat, logit});
        }
    }
    return d;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Solves mean(sigmoid(intercept + rest)) = target by bisection.
inline double solve_intercept(const std::vector<double>& rest, double target) {
    if (rest.empty()) return std::log(target / (1.0 - target));
    double lo = -30.0, hi = 30.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        double mean = 0.0;
        for (double r : rest) mean += sigmoid(mid + r);
        mean /= static_cast<double>(rest.size());
        (mean < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace synth_detail

inline SynthOutput generate(const SynthConfig& cfg, unsigned threads = 1) {
    using namespace synth_detail;
    cfg.check();
    std::vector<UserDraft> drafts(cfg.n_users);
    parallel_for(cfg.n_users, threads, [&](std::size_t u) { drafts[u] = draft_user(cfg, u); });
    std::vector<double> rest;
    for (const auto& d : drafts)
        for (const auto& n : d.notifications) rest.push_back(n.logit_rest);

    SynthOutput out;
    out.intercept = solve_intercept(rest, cfg.target_base_rate);
    const std::int64_t t_end = cfg.start_ms + static_cast<std::int64_t>(cfg.days) * kDayMs;
    std::vector<std::vector<HiddenTruthRecord>> truth(drafts.size());

    parallel_for(drafts.size(), threads, [&](std::size_t u) {
        auto& d = drafts[u];
        Rng rng(derive_seed(cfg.seed, d.user_id + "/responses"));
        std::vector<double> probs;
        for (std::size_t k = 0; k < d.notifications.size(); ++k) {
            const auto& n = d.notifications[k];
            const double p = sigmoid(out.intercept + n.logit_rest);
            probs.push_back(p);
            const EventMeta meta{n.package, n.category};
            SensorEvent post;
            post.user_id = d.user_id;
            post.timestamp_ms = n.t;
            post.sensor = "notification";
            post.values = {{"action", FieldValue{std::string("post")}}, {"category", FieldValue{n.category}}};
            post.meta = meta;
            d.events.push_back({post, static_cast<int>(k)});

            auto add = [&](std::int64_t t, std::string sensor, std::map<std::string, FieldValue> values) {
                if (t >= t_end) return;
                SensorEvent e;
                e.user_id = d.user_id;
                e.timestamp_ms = t;
                e.sensor = std::move(sensor);
                e.values = std::move(values);
                e.meta = meta;
                d.events.push_back({std::move(e), -1});
            };
            if (rng.bernoulli(p)) {
                const auto at = n.t + static_cast<std::int64_t>(rng.uniform(5'000.0, 9.5 * kMinuteMs));
                add(at, "app", {{"category", FieldValue{n.category}}});
                add(at + 1'000, "notification",
                    {{"action", FieldValue{std::string("remove")}}, {"category", FieldValue{n.category}}});
            } else {
                const bool removed = rng.bernoulli(cfg.removal_probability);
                const bool late = rng.bernoulli(cfg.late_open_probability);
                if (removed)
                    add(n.t + static_cast<std::int64_t>(rng.uniform(0.5 * kMinuteMs, 60.0 * kMinuteMs)), "notification",
                        {{"action", FieldValue{std::string("remove")}}, {"category", FieldValue{n.category}}});
                if (late)
                    add(n.t + static_cast<std::int64_t>(rng.uniform(10.5 * kMinuteMs, 120.0 * kMinuteMs)), "app",
                        {{"category", FieldValue{n.category}}});
            }
        }

        std::stable_sort(d.events.begin(), d.events.end(), [](const Tagged& a, const Tagged& b) {
            if (a.event.timestamp_ms != b.event.timestamp_ms) return a.event.timestamp_ms < b.event.timestamp_ms;
            return a.event.sensor < b.event.sensor;
        });
        for (std::size_t i = 1; i < d.events.size(); ++i)
            if (d.events[i].event.timestamp_ms <= d.events[i - 1].event.timestamp_ms)
                d.events[i].event.timestamp_ms = d.events[i - 1].event.timestamp_ms + 1;
        for (const auto& te : d.events)
            if (te.truth >= 0) {
                const auto& n = d.notifications[static_cast<std::size_t>(te.truth)];
                truth[u].push_back({d.user_id, te.event.timestamp_ms, n.package, n.category,
                                    probs[static_cast<std::size_t>(te.truth)]});
            }
    });

    for (std::size_t u = 0; u < drafts.size(); ++u) {
        for (auto& te : drafts[u].events) out.events.push_back(std::move(te.event));
        out.truth.insert(out.truth.end(), truth[u].begin(), truth[u].end());
        out.profiles[drafts[u].user_id] = drafts[u].profile;
    }
    return out;
}

inline void write_hidden_truth(std::ostream& out, const std::vector<HiddenTruthRecord>& truth) {
    out.precision(17);
    out << "user_id\ttimestamp_ms\tpackage\tcategory\tprobability\n";
    for (const auto& t : truth)
        out << t.user_id << '\t' << t.timestamp_ms << '\t' << t.package << '\t' << t.category << '\t' << t.probability
            << '\n';
}

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
    SynthConfig c;
    try {
        c.n_users = j.value("n_users", c.n_users);
        c.days = j.value("days", c.days);
        c.seed = j.value("seed", c.seed);
        c.start_ms = j.value("start_ms", c.start_ms);
        c.period_minutes = j.value("period_minutes", c.period_minutes);
        c.screen_sessions_per_hour = j.value("screen_sessions_per_hour", c.screen_sessions_per_hour);
        c.app_opens_per_session = j.value("app_opens_per_session", c.app_opens_per_session);
        c.notifications_per_day = j.value("notifications_per_day", c.notifications_per_day);
        c.orientation_changes_per_day = j.value("orientation_changes_per_day", c.orientation_changes_per_day);
        c.music_sessions_per_day = j.value("music_sessions_per_day", c.music_sessions_per_day);
        c.ringer_changes_per_day = j.value("ringer_changes_per_day", c.ringer_changes_per_day);
        c.notification_center_per_day = j.value("notification_center_per_day", c.notification_center_per_day);
        c.target_base_rate = j.value("target_base_rate", c.target_base_rate);
        c.removal_probability = j.value("removal_probability", c.removal_probability);
        c.late_open_probability = j.value("late_open_probability", c.late_open_probability);
        if (auto it = j.find("planted"); it != j.end()) {
            auto& p = c.planted;
            p.screen_on = it->value("screen_on", p.screen_on);
            p.ringer_vibrate = it->value("ringer_vibrate", p.ringer_vibrate);
            p.ringer_silent = it->value("ringer_silent", p.ringer_silent);
            p.hour_cos = it->value("hour_cos", p.hour_cos);
            p.hour_sin = it->value("hour_sin", p.hour_sin);
            p.user_bias_sd = it->value("user_bias_sd", p.user_bias_sd);
            if (auto pl = it->find("place"); pl != it->end())
                for (auto& [k, v] : pl->items()) p.place[k] = v.get<double>();
            if (auto ca = it->find("category"); ca != it->end())
                for (auto& [k, v] : ca->items()) p.category[k] = v.get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synth: ") + e.what());
    }
    c.check();
    return c;
}

inline nlohmann::json synth_config_to_json(const SynthConfig& c) {
    return {{"n_users", c.n_users},
            {"days", c.days},
            {"seed", c.seed},
            {"start_ms", c.start_ms},
            {"period_minutes", c.period_minutes},
            {"screen_sessions_per_hour", c.screen_sessions_per_hour},
            {"app_opens_per_session", c.app_opens_per_session},
            {"notifications_per_day", c.notifications_per_day},
            {"orientation_changes_per_day", c.orientation_changes_per_day},
            {"music_sessions_per_day", c.music_sessions_per_day},
            {"ringer_changes_per_day", c.ringer_changes_per_day},
            {"notification_center_per_day", c.notification_center_per_day},
            {"target_base_rate", c.target_base_rate},
            {"removal_probability", c.removal_probability},
            {"late_open_probability", c.late_open_probability},
            {"planted",
             {{"screen_on", c.planted.screen_on},
              {"ringer_vibrate", c.planted.ringer_vibrate},
              {"ringer_silent", c.planted.ringer_silent},
              {"hour_cos", c.planted.hour_cos},
              {"hour_sin", c.planted.hour_sin},
              {"user_bias_sd", c.planted.user_bias_sd},
              {"place", c.planted.place},
              {"category", c.planted.category}}}};
}

}  // namespace sensorseq
