#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "sensorseq/eval.hpp"
#include "sensorseq/ground_truth.hpp"
#include "sensorseq/synth.hpp"

using namespace sensorseq;

namespace {

struct Scored {
    std::vector<ScoredLabel> rows;
    double positive_rate = 0.0;
};

/// Labels derived from the log, scored with the generator's hidden probabilities.
Scored score_with_truth(const SynthOutput& out) {
    const auto vs = validate_stream(out.events, Schema::default_schema());
    const auto lr = label_notifications(vs.users);
    std::map<std::pair<std::string, std::int64_t>, double> p;
    for (const auto& t : out.truth) p[{t.user_id, t.timestamp_ms}] = t.probability;
    Scored s;
    for (const auto& l : lr.labels) {
        s.rows.push_back({l.user_id, l.app_category, l.label, p.at({l.user_id, l.anchor_ms})});
        s.positive_rate += l.label;
    }
    s.positive_rate /= static_cast<double>(s.rows.size());
    return s;
}

SynthConfig small(std::size_t users = 8, int days = 5) {
    SynthConfig c;
    c.n_users = users;
    c.days = days;
    return c;
}

}  // namespace

TEST(Synth, DeterministicAcrossThreadCounts) {
    const auto a = generate(small(), 1);
    const auto b = generate(small(), 3);
    ASSERT_EQ(a.events.size(), b.events.size());
    std::ostringstream sa, sb;
    write_event_log(sa, a.events);
    write_event_log(sb, b.events);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(a.intercept, b.intercept);
    auto c = small();
    c.seed = 8;
    std::ostringstream sc;
    write_event_log(sc, generate(c).events);
    EXPECT_NE(sa.str(), sc.str());
}

TEST(Synth, ValidStrictlyIncreasingLog) {
    const auto out = generate(small());
    const auto vs = validate_stream(out.events, Schema::default_schema());
    EXPECT_TRUE(vs.report.rejected.empty());
    for (const auto& [user, ev] : vs.users)
        for (std::size_t i = 1; i < ev.size(); ++i) ASSERT_LT(ev[i - 1].timestamp_ms, ev[i].timestamp_ms) << user;
    EXPECT_EQ(out.profiles.size(), 8u);
    EXPECT_EQ(out.profiles.begin()->first, "u000");
}

TEST(Synth, BaseRateNearTarget) {
    const auto s = score_with_truth(generate(SynthConfig{}));
    EXPECT_NEAR(s.positive_rate, 0.45, 0.05);
}

TEST(Synth, PlantedSignalIsRecoverableByTheBayesScore) {
    const auto s = score_with_truth(generate(SynthConfig{}));
    EXPECT_GE(macro_auc(s.rows).macro_auc, 0.8);
}

TEST(Synth, NoPlantedSignalMeansChanceLevel) {
    auto c = SynthConfig{};
    c.planted = PlantedCoefficients::none();
    const auto out = generate(c);
    for (const auto& t : out.truth) ASSERT_NEAR(t.probability, out.truth.front().probability, 1e-12);
    // labels are then independent of any feature; a random score sits at 0.5
    auto s = score_with_truth(out);
    Rng rng(1);
    for (auto& r : s.rows) r.score = rng.uniform();
    EXPECT_NEAR(macro_auc(s.rows).macro_auc, 0.5, 0.03);
}

TEST(Synth, ConfigJsonRoundTripAndChecks) {
    auto c = small(3, 2);
    c.planted.screen_on = 1.25;
    c.planted.place["home"] = -2.0;
    const auto back = synth_config_from_json(synth_config_to_json(c));
    EXPECT_EQ(back.n_users, 3u);
    EXPECT_EQ(back.planted.screen_on, 1.25);
    EXPECT_EQ(back.planted.place.at("home"), -2.0);
    EXPECT_THROW(synth_config_from_json({{"target_base_rate", 1.5}}), ConfigError);
    EXPECT_THROW(synth_config_from_json({{"n_users", "x"}}), ConfigError);
}

TEST(Synth, HiddenTruthTable) {
    const auto out = generate(small(2, 1));
    std::ostringstream ss;
    write_hidden_truth(ss, out.truth);
    EXPECT_EQ(ss.str().rfind("user_id\ttimestamp_ms\tpackage\tcategory\tprobability\n", 0), 0u);
    for (const auto& t : out.truth) {
        EXPECT_GT(t.probability, 0.0);
        EXPECT_LT(t.probability, 1.0);
    }
}
