#include "hawk/error.hpp"
#include "hawk/eval/bancycle.hpp"
#include "hawk/eval/mvin.hpp"

#include "../support/table2.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hawk;
using namespace hawk::eval;

namespace {

double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double num = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                pairs += 1;
                num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
            }
    return num / pairs;
}

std::vector<Triple> random_triples(std::mt19937_64& rng, int n) {
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> u(0, 1);
    const double noise[3] = {0.1 + 0.4 * u(rng), 0.1 + 0.4 * u(rng), 0.1 + 0.4 * u(rng)};
    std::vector<Triple> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& x = t[static_cast<std::size_t>(i)];
        x.label = u(rng) < 0.3;
        auto view = [&](int k) { return u(rng) < noise[k] ? 1 - x.label : x.label; };
        x.dPov = view(0);
        x.dStats = view(1);
        x.dSpc = view(2);
    }
    t[0].label = 1;
    t[1].label = 0;
    return t;
}

} // namespace

TEST_CASE("published rows reproduce except the two wallhack RevStats OEI values") {
    int oeiMatches = 0;
    for (const auto& r : table2::kRows) {
        const ConfusionCounts c{r.tp, r.tn, r.fp, r.fn};
        const Metrics m = metrics(c);
        CHECK(std::abs(*m.accuracy - r.accuracy) <= 0.001);
        CHECK(std::abs(*m.recall - r.recall) <= 0.001);
        CHECK(std::abs(*m.npv - r.npv) <= 0.001);
        const bool oeiOk = std::abs(*m.oei - r.oei) <= 0.01;
        oeiMatches += oeiOk;
        if (r.cheat == "wallhack" && r.subsystem == "RevStats") CHECK_FALSE(oeiOk);
        else CHECK(oeiOk);
    }
    CHECK(oeiMatches == 14);
}

TEST_CASE("metric anchors") {
    const auto m = metrics({453, 7290, 407, 411});
    CHECK(*m.recall == doctest::Approx(0.524).epsilon(1e-3));
    CHECK(*m.npv == doctest::Approx(0.947).epsilon(1e-3));
    CHECK(std::abs(*m.oei - 4.941) <= 0.001);
    CHECK(std::abs(*metrics({642, 0, 0, 242}).recall - 0.726) <= 0.001);
    const auto one = metrics({1, 1, 0, 0});
    CHECK(*one.accuracy == 1.0);
    CHECK(*one.oei == 2.0);
    const auto none = metrics({0, 10, 0, 3});
    CHECK_FALSE(none.oei.has_value());
    CHECK_FALSE(none.precision.has_value());
    CHECK(to_json(none)["oei"].is_null());
    CHECK_FALSE(metrics({}).accuracy.has_value());
}

TEST_CASE("rank AUC equals the pairwise oracle") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 199);
        std::vector<double> s(static_cast<std::size_t>(n));
        std::vector<int> y(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            s[static_cast<std::size_t>(i)] = static_cast<double>(rng() % 20) / 19.0; // plenty of ties
            y[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 3 == 0);
        }
        y[0] = 1;
        y[1] = 0;
        CHECK(auc_roc(s, y) == pairwise_auc(s, y));
    }
    CHECK(auc_roc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}) == 1.0);
    CHECK(auc_roc(std::vector<double>(6, 0.3), std::vector<int>{0, 1, 0, 1, 0, 1}) == 0.5);
    CHECK_THROWS_AS(auc_roc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), DegenerateClass);
}

TEST_CASE("fusion") {
    CHECK(fuse({0.3, 0.4, 0.3}, 1, 0, 1) == doctest::Approx(0.6));
    CHECK(decide_hawk(fuse({0.3, 0.4, 0.3}, 1, 0, 1), 0.5) == 1);
    CHECK(fuse({0.3, 0.4, 0.3}, 0, 0, 0) == 0.0);
    CHECK(decide_hawk(0.0, 0.0) == 1);
    CHECK(decide_hawk(0.0, 0.01) == 0);
    for (double eps : {0.01, 0.3, 0.99, 1.0})
        for (int d : {0, 1}) CHECK(decide_hawk(fuse({1, 0, 0}, d, 1 - d, 1), eps) == d);
    CHECK_THROWS_AS(fuse({0.5, 0.5, 0.5}, 1, 1, 1), SimplexViolation);
    CHECK_THROWS_AS(fuse({1.2, -0.2, 0}, 1, 1, 1), SimplexViolation);
    CHECK_THROWS_AS(check_simplex({0.5, 0.5, 1e-8}), SimplexViolation);
    // monotone in each decision
    for (const auto& l : lambda_grid(0.25))
        for (double eps : {0.1, 0.5, 0.9})
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    CHECK(decide_hawk(fuse(l, 0, a, b), eps) <= decide_hawk(fuse(l, 1, a, b), eps));
                    CHECK(decide_hawk(fuse(l, a, 0, b), eps) <= decide_hawk(fuse(l, a, 1, b), eps));
                    CHECK(decide_hawk(fuse(l, a, b, 0), eps) <= decide_hawk(fuse(l, a, b, 1), eps));
                }
}

TEST_CASE("grid shape") {
    CHECK(lambda_grid().size() == 231);
    for (const auto& l : lambda_grid()) CHECK_NOTHROW(check_simplex(l));
    CHECK_THROWS_AS(lambda_grid(0.3), ConfigError);
}

TEST_CASE("optimizer finds the perfect single view") {
    std::mt19937_64 rng(2);
    std::vector<Triple> t(60);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i].label = i % 3 == 0;
        t[i].dStats = t[i].label;
        t[i].dPov = static_cast<int>(rng() % 2);
        t[i].dSpc = static_cast<int>(rng() % 2);
    }
    const auto m = optimize(t, Objective::parse("accuracy"));
    CHECK(m.objectiveValue == 1.0);
    CHECK(*metrics(m.validation).accuracy == 1.0);
    CHECK(m.lambda[1] > 0.5);
    CHECK_THROWS_AS(optimize(t, Objective::parse("accuracy-subject-to-recall(1.01)")), InfeasibleConstraint);
    std::vector<Triple> oneClass(5);
    CHECK_THROWS_AS(optimize(oneClass, Objective::parse("f1")), DegenerateClass);
}

TEST_CASE("optimizer is never beaten by an independent re-scan") {
    std::mt19937_64 rng(5);
    const std::vector<Objective> objectives{Objective::parse("f1"), Objective::parse("accuracy"),
                                            Objective::parse("auc"),
                                            Objective::parse("accuracy-subject-to-recall(0.75)")};
    for (int trial = 0; trial < 40; ++trial) {
        const auto t = random_triples(rng, 30 + trial);
        for (const auto& o : objectives) {
            MvinModel m;
            try {
                m = optimize(t, o);
            } catch (const InfeasibleConstraint&) {
                // confirm infeasibility on a fine epsilon grid
                for (int i = 0; i <= 20; ++i)
                    for (int j = 0; i + j <= 20; ++j)
                        for (int e = 0; e <= 1000; ++e) {
                            const Lambda l{i / 20.0, j / 20.0, (20 - i - j) / 20.0};
                            ConfusionCounts c;
                            for (const auto& x : t) c.add(fuse(l, x.dPov, x.dStats, x.dSpc) >= e / 1000.0, x.label);
                            CHECK(metrics(c).recall.value_or(0) < o.minRecall);
                        }
                continue;
            }
            if (o.kind == ObjectiveKind::AccuracyAtRecall) CHECK(*metrics(m.validation).recall >= o.minRecall);
            ConfusionCounts again;
            for (const auto& x : t) again.add(m.decide(x.dPov, x.dStats, x.dSpc), x.label);
            CHECK(again == m.validation);
            double bestSeen = 0;
            for (int i = 0; i <= 20; ++i)
                for (int j = 0; i + j <= 20; ++j)
                    for (int e = 0; e <= 200; ++e) {
                        const Lambda l{i / 20.0, j / 20.0, (20 - i - j) / 20.0};
                        ConfusionCounts c;
                        for (const auto& x : t)
                            c.add(fuse(l, x.dPov, x.dStats, x.dSpc) >= e / 200.0 - 1e-9, x.label);
                        if (o.kind == ObjectiveKind::AccuracyAtRecall && metrics(c).recall.value_or(0) < o.minRecall)
                            continue;
                        bestSeen = std::max(bestSeen, objective_value(o, c));
                    }
            CHECK(m.objectiveValue >= bestSeen);
        }
    }
}

TEST_CASE("objective strings") {
    CHECK(Objective::parse("accuracy-subject-to-recall(0.7)").minRecall == 0.7);
    CHECK(Objective::parse("accuracy-subject-to-recall(0.7)").to_string() == "accuracy-subject-to-recall(0.7)");
    CHECK_THROWS_AS(Objective::parse("precision"), ConfigError);
    CHECK_THROWS_AS(Objective::parse("accuracy-subject-to-recall(x)"), ConfigError);
    const auto m = MvinModel::from_json(MvinModel{}.to_json());
    CHECK(m.lambda == MvinModel{}.lambda);
}

TEST_CASE("ban cycle report") {
    std::vector<Detection> d{{"m", "a", "2024-03-01T01:00:00Z"}, {"m", "b", "2024-03-01T12:00:00Z"},
                             {"m", "c", "2024-03-01T23:59:59Z"}};
    auto rows = ban_cycle_report(d, {});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].day == "2024-03-01");
    CHECK(rows[0].engineDaily == 3);
    CHECK(rows[0].engineCumulative == 3);
    CHECK(ban_cycle_report({}, {}).empty());

    replay::LabelSet labels;
    labels.labels.push_back({"a", true, replay::CheatType::Aimbot, "2024-03-04T00:00:00Z"});
    labels.labels.push_back({"z", false, replay::CheatType::None, std::nullopt});
    d.push_back({"m", "d", "2024-03-02T05:00:00Z"});
    rows = ban_cycle_report(d, std::vector<replay::LabelSet>{labels});
    REQUIRE(rows.size() == 4);
    CHECK(rows[2].engineDaily == 0);
    CHECK(rows[3].officialDaily == 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].engineCumulative >= rows[i - 1].engineCumulative);
        CHECK(rows[i].officialCumulative >= rows[i - 1].officialCumulative);
    }
    CHECK(ban_cycle_csv(rows).starts_with("day,engine_daily,engine_cumulative,official_daily,official_cumulative\n"));
    CHECK(ban_cycle_json(rows)[3]["official"]["cumulative"] == 1);
}

TEST_CASE("score-mode fusion") {
    CHECK(fuse_scores({0.5, 0.25, 0.25}, 0.8, 0.4, 0.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(fuse_scores({0.5, 0.25, 0.25}, 1.2, 0, 0), ConfigError);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<ScoreTriple> t;
    for (int i = 0; i < 60; ++i) {
        const int label = i % 5 == 0;
        t.push_back({u(rng), label ? 0.6 + 0.4 * u(rng) : 0.55 * u(rng), u(rng), label});
    }
    const auto m = optimize_scores(t, Objective::parse("accuracy"));
    CHECK(m.scoreMode);
    CHECK(m.objectiveValue == 1.0);
    ConfusionCounts c;
    for (const auto& x : t) c.add(m.decide_scores(x.sPov, x.sStats, x.sSpc), x.label);
    CHECK(c == m.validation);
    CHECK(MvinModel::from_json(m.to_json()).scoreMode);
}
