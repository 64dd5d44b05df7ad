#include <gtest/gtest.h>

#include <sstream>

#include "sensorseq/eval.hpp"
#include "support/auc_oracle.hpp"

using namespace sensorseq;

TEST(Auc, HandExample) {
    EXPECT_DOUBLE_EQ(*auc({0.9, 0.8, 0.3, 0.2}, {1, 0, 1, 0}), 0.75);
    EXPECT_DOUBLE_EQ(*auc({0.5, 0.5, 0.5}, {1, 0, 0}), 0.5);
    EXPECT_DOUBLE_EQ(*auc({0.1, 0.9}, {0, 1}), 1.0);
    EXPECT_FALSE(auc({0.1, 0.2}, {1, 1}).has_value());
    EXPECT_FALSE(auc({}, {}).has_value());
    EXPECT_THROW(auc({0.1}, {1, 0}), ShapeMismatch);
}

TEST(Auc, MatchesPairwiseOracleWithTies) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(80);
        const std::size_t levels = 1 + rng.below(6);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels);
            y[i] = static_cast<int>(rng.below(2));
        }
        const auto a = auc(s, y);
        const auto o = oracle::pairwise_auc(s, y);
        ASSERT_EQ(a.has_value(), o.has_value());
        if (a) {
            EXPECT_NEAR(*a, *o, 1e-12);
        }
    }
}

TEST(Auc, MonotoneTransformAndReversal) {
    Rng rng(4);
    std::vector<double> s(50), t(50), r(50);
    std::vector<int> y(50);
    for (std::size_t i = 0; i < 50; ++i) {
        s[i] = rng.uniform();
        t[i] = std::exp(3 * s[i]) - 7;
        r[i] = -s[i];
        y[i] = i % 3 == 0;
    }
    EXPECT_NEAR(*auc(s, y), *auc(t, y), 1e-15);
    EXPECT_NEAR(*auc(r, y), 1.0 - *auc(s, y), 1e-15);
}

TEST(Roc, EndpointsAndMonotone) {
    const auto roc = roc_curve({0.9, 0.8, 0.8, 0.3, 0.2}, {1, 0, 1, 1, 0});
    EXPECT_EQ(roc.front().fpr, 0.0);
    EXPECT_EQ(roc.front().tpr, 0.0);
    EXPECT_EQ(roc.back().fpr, 1.0);
    EXPECT_EQ(roc.back().tpr, 1.0);
    for (std::size_t i = 1; i < roc.size(); ++i) {
        EXPECT_GE(roc[i].fpr, roc[i - 1].fpr);
        EXPECT_GE(roc[i].tpr, roc[i - 1].tpr);
        EXPECT_LT(roc[i].threshold, roc[i - 1].threshold);
    }
    ASSERT_EQ(roc.size(), 5u);  // tie collapses into one point
    EXPECT_DOUBLE_EQ(roc[2].tpr, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(roc[2].fpr, 0.5);
}

TEST(MacroAuc, UnweightedMeanAndSkips) {
    std::vector<ScoredLabel> rows;
    // group (a, x): 15 of 25 pairs ordered
    const std::vector<double> sx{0.9, 0.7, 0.5, 0.3, 0.1, 0.8, 0.6, 0.4, 0.2, 0.0};
    const std::vector<int> yx{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    ASSERT_DOUBLE_EQ(*auc(sx, yx), 0.6);
    for (std::size_t i = 0; i < sx.size(); ++i) rows.push_back({"a", "x", yx[i], sx[i]});
    // group (b, x): one tied pair
    const std::vector<double> sb{0.9, 0.5, 0.5, 0.1, 0.6};
    const std::vector<int> yb{1, 1, 0, 0, 0};
    ASSERT_DOUBLE_EQ(*oracle::pairwise_auc(sb, yb), 0.75);
    for (std::size_t i = 0; i < sb.size(); ++i) rows.push_back({"b", "x", yb[i], sb[i]});
    // single-class group is skipped
    rows.push_back({"a", "y", 1, 0.1});
    rows.push_back({"a", "y", 1, 0.2});
    const auto rep = macro_auc(rows);
    EXPECT_DOUBLE_EQ(rep.macro_auc, (0.6 + 0.75) / 2);
    EXPECT_EQ(rep.valid_groups, 2u);
    EXPECT_EQ(rep.skipped_groups, 1u);
    EXPECT_EQ(rep.groups.size(), 3u);
    std::stringstream ss;
    write_group_table(ss, rep);
    EXPECT_NE(ss.str().find("skipped"), std::string::npos);
}

TEST(MacroAuc, SixPointEightAveragesToSevenTenths) {
    std::vector<ScoredLabel> rows;
    const std::vector<double> s1{0.9, 0.7, 0.5, 0.3, 0.1, 0.8, 0.6, 0.4, 0.2, 0.0};
    const std::vector<int> y1{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < s1.size(); ++i) rows.push_back({"u1", "c", y1[i], s1[i]});
    const std::vector<double> s2{0.9, 0.8, 0.7, 0.6, 0.5, 0.85, 0.55, 0.3, 0.2, 0.1};
    const std::vector<int> y2{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    ASSERT_DOUBLE_EQ(*auc(s2, y2), 0.8);
    for (std::size_t i = 0; i < s2.size(); ++i) rows.push_back({"u2", "c", y2[i], s2[i]});
    EXPECT_DOUBLE_EQ(macro_auc(rows).macro_auc, 0.7);
}

TEST(MacroAuc, NoValidGroupsThrows) {
    EXPECT_THROW(macro_auc({{"a", "x", 1, 0.5}, {"a", "y", 0, 0.5}}), NoValidGroups);
    EXPECT_THROW(macro_auc({}), NoValidGroups);
}

TEST(Baseline, FallbackChain) {
    const std::vector<ScoredLabel> train{{"a", "mail", 1, 0}, {"a", "mail", 0, 0}, {"a", "news", 1, 0},
                                         {"a", "news", 1, 0}, {"b", "mail", 0, 0}, {"b", "mail", 0, 0}};
    const auto t = fit_baseline(train);
    EXPECT_DOUBLE_EQ(t.probability("a", "mail"), 0.5);
    EXPECT_DOUBLE_EQ(t.probability("a", "social"), 0.75);
    EXPECT_DOUBLE_EQ(t.probability("zz", "mail"), 0.5);
    EXPECT_DOUBLE_EQ(t.probability("b", "mail"), 0.0);
    std::stringstream ss;
    write_baseline_table(ss, t);
    const auto back = read_baseline_table(ss);
    EXPECT_EQ(back.by_group, t.by_group);
    EXPECT_EQ(back.by_user, t.by_user);
    EXPECT_EQ(back.global, t.global);
}

TEST(Baseline, RandomDrawsFollowProbabilityAndScoreNearHalf) {
    BaselineTable t;
    t.by_group[{"a", "x"}] = 0.3;
    Rng rng(8);
    int ones = 0;
    for (int i = 0; i < 20000; ++i) ones += baseline_predict("a", "x", t, rng);
    EXPECT_NEAR(ones / 20000.0, 0.3, 0.015);
    EXPECT_EQ(baseline_predict("b", "x", BaselineTable{{}, {}, 0.0}, rng), 0);

    // draws independent of labels give AUC near 0.5
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 4000; ++i) {
        y.push_back(rng.bernoulli(0.4));
        s.push_back(baseline_predict("a", "x", t, rng));
    }
    EXPECT_NEAR(*auc(s, y), 0.5, 0.03);
}

TEST(Predictions, RoundTrip) {
    RowStreams rows;
    rows["u"].push_back(SampleRow{"u", 10, 0, {}, 1, 1.0, "mail"});
    rows["u"].push_back(SampleRow{"u", 20, 0, {}, kNoLabel, 0.0, ""});
    rows["u"].push_back(SampleRow{"u", 30, 0, {}, 0, 2.0, "news"});
    std::map<std::string, std::vector<double>> scores{{"u", {0.1234567890123, 0.5, 1.0 / 3.0}}};
    std::stringstream ss;
    write_predictions(ss, rows, scores);
    const auto back = read_predictions(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].score, 0.1234567890123);
    EXPECT_EQ(back[1].score, 1.0 / 3.0);
    EXPECT_EQ(back[1].category, "news");
    EXPECT_EQ(back[1].label, 0);
}
