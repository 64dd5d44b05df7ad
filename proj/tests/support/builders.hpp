#pragma once

#include <map>
#include <optional>
#include <string>

#include "sensorseq/event_model.hpp"

namespace build {

using sensorseq::FieldValue;

inline sensorseq::SensorEvent ev(std::string user, std::int64_t t, std::string sensor,
                                 std::map<std::string, FieldValue> values,
                                 std::optional<sensorseq::EventMeta> meta = std::nullopt) {
    sensorseq::SensorEvent e;
    e.user_id = std::move(user);
    e.timestamp_ms = t;
    e.sensor = std::move(sensor);
    e.values = std::move(values);
    e.meta = std::move(meta);
    return e;
}

inline FieldValue cat(const char* s) { return FieldValue{std::string(s)}; }

inline sensorseq::SensorEvent post(std::string user, std::int64_t t, const char* package, const char* category) {
    return ev(std::move(user), t, "notification", {{"action", cat("post")}, {"category", cat(category)}},
              sensorseq::EventMeta{package, category});
}

inline sensorseq::SensorEvent removal(std::string user, std::int64_t t, const char* package, const char* category) {
    return ev(std::move(user), t, "notification", {{"action", cat("remove")}, {"category", cat(category)}},
              sensorseq::EventMeta{package, category});
}

inline sensorseq::SensorEvent open(std::string user, std::int64_t t, const char* package, const char* category) {
    return ev(std::move(user), t, "app", {{"category", cat(category)}}, sensorseq::EventMeta{package, category});
}

constexpr std::int64_t kMin = 60'000;

}  // namespace build
