#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "sensorseq/encoder.hpp"
#include "sensorseq/ground_truth.hpp"
#include "sensorseq/matrix_io.hpp"
#include "sensorseq/random.hpp"
#include "support/builders.hpp"

using namespace sensorseq;
using namespace build;

namespace {

std::size_t col(const EncoderState& s, const std::string& name) {
    for (std::size_t i = 0; i < s.columns.size(); ++i)
        if (s.columns[i].name == name) return i;
    ADD_FAILURE() << "no column " << name;
    return 0;
}

constexpr std::int64_t kSat14h = 1'465'654'800'000;  // 2016-06-11 14:00 UTC, a Saturday

}  // namespace

TEST(NearestRank, OneToHundredGives95) {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    EXPECT_EQ(nearest_rank(v, 0.95), 95.0);
    EXPECT_EQ(nearest_rank(v, 1.0), 100.0);
    EXPECT_EQ(nearest_rank({5.0, 5.0, 5.0}, 0.95), 5.0);
}

TEST(Rescale, Examples) {
    EXPECT_DOUBLE_EQ(rescale(5.0, 0.0, 10.0), 0.525);
    EXPECT_DOUBLE_EQ(rescale(20.0, 0.0, 10.0), 1.0);
    EXPECT_EQ(rescale(std::nan(""), 0.0, 10.0), 0.0);
    EXPECT_DOUBLE_EQ(rescale(3.0, 5.0, 5.0), 0.05);  // degenerate column
    EXPECT_DOUBLE_EQ(rescale(-1.0, 0.0, 10.0), 0.05);  // below the fitted min
}

TEST(Rescale, MonotoneAndIdempotentOnCappedValues) {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-5, 15), b = rng.uniform(-5, 15);
        EXPECT_LE(rescale(std::min(a, b), 0.0, 10.0), rescale(std::max(a, b), 0.0, 10.0));
        const double capped = std::clamp(a, 0.0, 10.0);
        EXPECT_EQ(rescale(capped, 0.0, 10.0), rescale(a, 0.0, 10.0));
    }
}

TEST(TimeDelta, Examples) {
    EXPECT_EQ(time_delta(0, 75 * kMin), 60.0);
    EXPECT_EQ(time_delta(0, 0), 0.0);
    EXPECT_EQ(time_delta(0, 10 * kMin), 10.0);
    EXPECT_FLOAT_EQ(encode_delta(0, 60.0), 0.05f);
    EXPECT_NEAR(encode_delta(10 * kMin, 60.0), 0.2083333, 1e-6);
    EXPECT_EQ(capped_delta_ms(std::nullopt, 123), 60 * kMin);
    EXPECT_EQ(capped_delta_ms(100, 75 * kMin + 100), 60 * kMin);
}

TEST(Calendar, SaturdayAfternoon) {
    const auto c = calendar(kSat14h);
    EXPECT_EQ(c.day_of_week, 6);
    EXPECT_EQ(c.hour_of_day, 14);
    EXPECT_FALSE(c.working_day);
    EXPECT_EQ(calendar(0).day_of_week, 4);  // 1970-01-01, Thursday
    EXPECT_EQ(calendar(1'465'171'200'000).day_of_week, 1);
}

TEST(Fit, PercentileCapFromTrainingValues) {
    std::vector<SensorEvent> events;
    for (int i = 1; i <= 100; ++i) events.push_back(ev("u", i * kMin, "light", {{"lux", double(i)}}));
    const auto vs = validate_stream(events, Schema::default_schema());
    const auto st = fit(vs.users, Schema::default_schema());
    const auto& c = st.columns[col(st, "light.lux")];
    EXPECT_EQ(c.fitted_min, 1.0);
    EXPECT_EQ(c.fitted_cap, 95.0);
    // never observed
    EXPECT_NE(std::find(st.empty_columns.begin(), st.empty_columns.end(), "noise.db"), st.empty_columns.end());
}

TEST(Fit, RingerHasThreeOneHotColumnsAndCanonicalOrder) {
    std::vector<SensorEvent> events{ev("u", 0, "light", {{"lux", 1.0}})};
    const auto st = fit(validate_stream(events, Schema::default_schema()).users, Schema::default_schema());
    EXPECT_EQ(st.columns.front().name, "time_delta");
    const std::size_t n = col(st, "ringer.mode=normal");
    EXPECT_EQ(st.columns[n + 1].name, "ringer.mode=silent");
    EXPECT_EQ(st.columns[n + 2].name, "ringer.mode=vibrate");
    // fields sorted lexicographically within a sensor
    EXPECT_LT(col(st, "accelerometer.max"), col(st, "accelerometer.mean"));
    EXPECT_LT(col(st, "data.cell_rx"), col(st, "data.total_tx"));
    EXPECT_EQ(st.columns.back().name, "demo.gender=male");
    EXPECT_THROW(fit({}, Schema::default_schema()), ConfigError);
}

TEST(Encode, SingleSensorRowLeavesOtherSensorsMissing) {
    const auto schema = Schema::default_schema();
    std::vector<SensorEvent> events{ev("u", kSat14h - kMin, "light", {{"lux", 100.0}}),
                                    ev("u", kSat14h, "light", {{"lux", 500.0}})};
    const auto vs = validate_stream(events, schema);
    const auto st = fit(vs.users, schema);
    const auto rows = encode_stream(vs.users, {}, {}, st);
    const auto& r = rows.at("u")[1];
    EXPECT_EQ(r.x[col(st, "light.lux")], 1.0f);
    EXPECT_EQ(r.x[col(st, "noise.db")], 0.0f);
    EXPECT_EQ(r.x[col(st, "ringer.mode=normal")], 0.0f);
    EXPECT_EQ(r.x[col(st, "demo.age")], 0.0f);  // no profile
    EXPECT_FLOAT_EQ(r.x[col(st, "ctx.day_of_week")], static_cast<float>(0.05 + 0.95 * 5.0 / 6.0));
    EXPECT_FLOAT_EQ(r.x[col(st, "ctx.hour_of_day")], static_cast<float>(0.05 + 0.95 * 14.0 / 23.0));
    EXPECT_FLOAT_EQ(r.x[col(st, "ctx.working_day")], 0.05f);
    EXPECT_FLOAT_EQ(r.x[0], encode_delta(kMin, 60.0));
    EXPECT_FLOAT_EQ(rows.at("u")[0].x[0], 1.0f);  // first event: maximal gap
    EXPECT_EQ(r.w, 0.0);
    EXPECT_FALSE(r.labeled());
}

TEST(Encode, OneHotAndDemographics) {
    const auto schema = Schema::default_schema();
    std::vector<SensorEvent> events{ev("a", 0, "ringer", {{"mode", cat("silent")}}), ev("b", 0, "light", {{"lux", 1.0}})};
    ProfileMap profiles{{"a", {"a", 20.0, "female"}}, {"b", {"b", 60.0, "male"}}};
    const auto vs = validate_stream(events, schema);
    const auto st = fit(vs.users, schema, profiles);
    const auto rows = encode_stream(vs.users, {}, profiles, st);
    const auto& a = rows.at("a")[0];
    EXPECT_EQ(a.x[col(st, "ringer.mode=silent")], 1.0f);
    EXPECT_FLOAT_EQ(a.x[col(st, "ringer.mode=normal")], 0.05f);
    EXPECT_FLOAT_EQ(a.x[col(st, "ringer.mode=vibrate")], 0.05f);
    EXPECT_FLOAT_EQ(a.x[col(st, "demo.age")], 0.05f);
    EXPECT_EQ(a.x[col(st, "demo.gender=female")], 1.0f);
    EXPECT_FLOAT_EQ(a.x[col(st, "demo.gender=male")], 0.05f);
    EXPECT_FLOAT_EQ(rows.at("b")[0].x[col(st, "demo.age")], 1.0f);
}

TEST(Encode, LabelsOnAnchorRows) {
    const auto schema = Schema::default_schema();
    std::vector<SensorEvent> events{post("u", 0, "w", "messaging"), open("u", 2 * kMin, "w", "messaging"),
                                    ev("u", 30 * kMin, "light", {{"lux", 1.0}})};
    const auto vs = validate_stream(events, schema);
    const auto labels = label_notifications(vs.users).labels;
    const auto st = fit(vs.users, schema);
    const auto rows = encode_stream(vs.users, labels, {}, st);
    const auto& r = rows.at("u");
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].y, 1);
    EXPECT_EQ(r[0].w, 1.0);
    EXPECT_EQ(r[0].category, "messaging");
    EXPECT_FALSE(r[1].labeled());
    EXPECT_EQ(r[1].w, 0.0);

    auto bad = labels;
    bad[0].anchor = 99;
    EXPECT_THROW(encode_stream(vs.users, bad, {}, st), LabelAnchorMissing);
}

TEST(Encode, AllValuesInRangeAndPresenceMatchesFields) {
    const auto schema = Schema::default_schema();
    Rng rng(5);
    std::vector<SensorEvent> events;
    const char* modes[] = {"normal", "silent", "vibrate"};
    for (int i = 0; i < 500; ++i) {
        const std::int64_t t = i * 7 * kMin;
        switch (rng.below(4)) {
            case 0: events.push_back(ev("u", t, "light", {{"lux", rng.uniform(0, 1000)}})); break;
            case 1: events.push_back(ev("u", t, "noise", {{"db", rng.bernoulli(0.2) ? std::nan("") : rng.uniform(20, 90)}})); break;
            case 2: events.push_back(ev("u", t, "ringer", {{"mode", cat(modes[rng.below(3)])}})); break;
            default: events.push_back(ev("u", t, "data", {{"total_rx", rng.uniform(0, 100)}, {"cell_rx", rng.uniform(0, 5)}}));
        }
    }
    const auto vs = validate_stream(events, schema);
    const auto st = fit(vs.users, schema);
    const auto rows = encode_stream(vs.users, {}, {}, st);
    ASSERT_EQ(rows.at("u").size(), events.size());
    for (std::size_t i = 0; i < rows.at("u").size(); ++i) {
        const auto& r = rows.at("u")[i];
        const auto& e = vs.users.at("u")[i];
        for (float v : r.x) EXPECT_TRUE(v == 0.0f || (v >= 0.05f && v <= 1.0f)) << v;
        for (std::size_t j = 1; j < st.columns.size(); ++j) {
            const auto& c = st.columns[j];
            if (c.source != ColumnSource::sensor) continue;
            bool carried = c.sensor == e.sensor && e.values.count(c.field);
            if (carried) {
                const auto& v = e.values.at(c.field);
                if (const auto* d = std::get_if<double>(&v); d && std::isnan(*d)) carried = false;
            }
            EXPECT_EQ(r.x[j] != 0.0f, carried) << c.name;
        }
    }
}

TEST(EncoderState, RoundTrip) {
    std::vector<SensorEvent> events{ev("u", 0, "light", {{"lux", 3.5}}), ev("u", 1, "light", {{"lux", 9.25}})};
    const auto st = fit(validate_stream(events, Schema::default_schema()).users, Schema::default_schema());
    std::stringstream ss;
    write_encoder_state(ss, st);
    const auto back = read_encoder_state(ss);
    ASSERT_EQ(back.columns.size(), st.columns.size());
    for (std::size_t i = 0; i < st.columns.size(); ++i) {
        EXPECT_EQ(back.columns[i].name, st.columns[i].name);
        EXPECT_EQ(back.columns[i].fitted_min, st.columns[i].fitted_min);
        EXPECT_EQ(back.columns[i].fitted_cap, st.columns[i].fitted_cap);
    }
}

TEST(MatrixIo, TextAndBinaryRoundTrip) {
    SampleMatrix m;
    m.columns = {"time_delta", "a", "b"};
    Rng rng(9);
    for (const char* u : {"x", "y"})
        for (int i = 0; i < 20; ++i) {
            SampleRow r;
            r.user_id = u;
            r.wall_time_ms = 1000 + i;
            r.delta_ms = i * 17;
            r.x = {static_cast<float>(rng.uniform()), 0.0f, static_cast<float>(rng.uniform())};
            if (i % 5 == 0) {
                r.y = static_cast<std::int8_t>(i % 2);
                r.w = rng.uniform(0.1, 3.0);
                r.category = "email";
            }
            m.users[u].push_back(r);
        }
    for (auto fmt : {MatrixFormat::text, MatrixFormat::binary}) {
        std::stringstream ss;
        write_matrix(ss, m, fmt);
        const auto back = read_matrix(ss);
        EXPECT_EQ(back.columns, m.columns);
        EXPECT_EQ(back.users, m.users);
    }
}
