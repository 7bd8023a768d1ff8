#include "hawk/error.hpp"
#include "hawk/replay/json_io.hpp"
#include "hawk/service/http.hpp"

#include "../support/small_bundle.hpp"

#include <doctest.h>

#include <fstream>
#include <thread>

using namespace hawk;
using namespace hawk::service;
namespace fs = std::filesystem;

namespace {

const fs::path& model_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "hawk-test-service-model";
        fs::remove_all(d);
        testing::train_small_bundle(30, 42).save(d);
        return d;
    }();
    return dir;
}

fs::path fresh_data_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / ("hawk-test-service-" + name);
    fs::remove_all(d);
    return d;
}

ServiceConfig config_for(const fs::path& data, bool withModel = true) {
    ServiceConfig c;
    c.dataDir = data;
    c.modelDir = withModel ? model_dir() : data / "no-model";
    std::int64_t t = replay::parse_utc("2024-03-01T12:00:00Z");
    c.clock = [t]() mutable { return t++; };
    return c;
}

// Nine honest players and one blatant aimbot in the given slot.
std::pair<replay::MatchRecord, replay::LabelSet> aimbot_match(std::uint64_t seed, std::size_t slot = 3) {
    std::vector<replay::CheatProfile> profiles(10);
    profiles[slot].kind = replay::ProfileKind::Aimbot;
    replay::SynthConfig sc;
    sc.frameStride = 64;
    sc.matchId = "fixture-" + std::to_string(seed);
    return replay::generate_synthetic_match(profiles, 8, seed, sc);
}

std::string cheater_of(const replay::LabelSet& labels) {
    for (const auto& l : labels.labels)
        if (l.cheater) return l.steamId;
    return "";
}

json player_of(const json& report, const std::string& steamId) {
    for (const auto& p : report.at("players"))
        if (p.at("steamId") == steamId) return p;
    return nullptr;
}

} // namespace

TEST_CASE("reports: a blatant aimbot is flagged and resubmission is deterministic") {
    HawkService svc(config_for(fresh_data_dir("reports")));
    REQUIRE(svc.bundle());
    const auto [match, labels] = aimbot_match(901);
    const auto body = replay::serialize_match(match);
    const auto r1 = svc.submit_match(body);
    REQUIRE(r1.status == 201);
    const auto id1 = r1.body.at("reportId").get<std::string>();
    const auto report = svc.get_report(id1);
    REQUIRE(report.status == 200);
    CHECK(report.body.at("modelVersion") == svc.bundle()->modelVersion);
    CHECK(report.body.at("players").size() == 10);
    const auto cheater = player_of(report.body, cheater_of(labels));
    CHECK(cheater.at("hawk") == 1);
    CHECK(cheater.at("topFeatures").size() == 5);
    for (const auto& p : report.body.at("players"))
        CHECK(p.at("hawk").get<int>() == (p.at("w").get<double>() >= p.at("epsilon").get<double>() ? 1 : 0));

    const auto r2 = svc.submit_match(body);
    const auto id2 = r2.body.at("reportId").get<std::string>();
    CHECK(id2 != id1);
    const auto again = svc.get_report(id2).body;
    for (std::size_t i = 0; i < 10; ++i) {
        const auto& a = report.body.at("players")[i];
        const auto& b = again.at("players")[i];
        CHECK(a.at("pov") == b.at("pov"));
        CHECK(a.at("stats") == b.at("stats"));
        CHECK(a.at("spc") == b.at("spc"));
        CHECK(a.at("hawk") == b.at("hawk"));
    }

    SUBCASE("service decisions equal library decisions") {
        const auto samples = features::extract_match(match, nullptr, svc.bundle()->config.extraction);
        for (const auto& s : samples) {
            const auto d = svc.bundle()->detect(s);
            const auto p = player_of(report.body, s.steamId);
            CHECK(p.at("w").get<double>() == d.w);
            CHECK(p.at("spc").at("score").get<double>() == d.spc.score);
        }
    }
    SUBCASE("errors") {
        CHECK(svc.get_report("rep-999999").status == 404);
        const auto bad = svc.submit_match("{not json");
        CHECK(bad.status == 400);
        CHECK(bad.body.at("path") == "$");
        json j = json::parse(body);
        j.erase("tickRate");
        const auto missing = svc.submit_match(j.dump());
        CHECK(missing.status == 400);
        CHECK(missing.body.at("error") == "SchemaError");
        CHECK(missing.body.at("path") == "tickRate");
        HawkService empty(config_for(fresh_data_dir("nomodel"), false));
        CHECK(empty.submit_match(body).status == 503);
        CHECK(empty.post_optimizer(R"({"objective":"accuracy"})").status == 503);
    }
}

TEST_CASE("flagged queue ordering and evidence") {
    const auto dir = fresh_data_dir("ordering");
    fs::create_directories(dir);
    auto player = [](const std::string& id, double w, int hawk) {
        return json{{"steamId", id},
                    {"pov", {{"decision", 1}, {"score", 1.0}}},
                    {"stats", {{"decision", 0}, {"score", 0.0}}},
                    {"spc", {{"decision", 1}, {"score", 0.9}}},
                    {"w", w},
                    {"epsilon", 0.5},
                    {"hawk", hawk},
                    {"topFeatures", json::array()},
                    {"zscores", json::object()}};
    };
    {
        std::ofstream out(dir / "reports.jsonl");
        out << json{{"reportId", "rep-000001"}, {"matchId", "m1"}, {"createdUtc", "2024-01-01T00:00:00Z"},
                    {"modelVersion", "x"}, {"players", {player("a", 0.6, 1), player("b", 0.2, 0)}}}
                   .dump()
            << "\n";
        out << json{{"reportId", "rep-000002"}, {"matchId", "m2"}, {"createdUtc", "2024-01-01T00:00:00Z"},
                    {"modelVersion", "x"}, {"players", {player("c", 0.9, 1)}}}
                   .dump()
            << "\n";
    }
    HawkService svc(config_for(dir, false));
    const auto q = svc.flagged("pending").body.at("items");
    REQUIRE(q.size() == 2);
    CHECK(q[0].at("steamId") == "c");
    CHECK(q[0].at("w") == 0.9);
    CHECK(q[1].at("steamId") == "a");
    CHECK(svc.flagged("confirmed").body.at("items").empty());
    CHECK(svc.flagged("bogus").status == 400);

    HawkService none(config_for(fresh_data_dir("empty-queue")));
    CHECK(none.flagged("pending").body.at("items").empty());
}

TEST_CASE("workflow round trip with ledger replay") {
    const auto dir = fresh_data_dir("workflow");
    std::string snapshot, bannedBytes;
    std::string reportId, cheater;
    {
        HawkService svc(config_for(dir));
        const auto [match, labels] = aimbot_match(902, 6);
        cheater = cheater_of(labels);
        reportId = svc.submit_match(replay::serialize_match(match)).body.at("reportId").get<std::string>();
        const auto queue = svc.flagged("pending").body.at("items");
        REQUIRE(!queue.empty());
        json entry;
        for (const auto& e : queue)
            if (e.at("steamId") == cheater) entry = e;
        REQUIRE(entry.is_object());
        double prevW = 2;
        for (const auto& e : queue) {
            CHECK(e.at("w").get<double>() <= prevW);
            prevW = e.at("w").get<double>();
        }
        const auto& timeline = entry.at("evidence").at("timeline");
        CHECK(!timeline.empty());
        for (std::size_t i = 1; i < timeline.size(); ++i)
            CHECK(timeline[i - 1].at("tick").get<int>() <= timeline[i].at("tick").get<int>());
        CHECK(entry.at("evidence").at("zscores").size() == 28);

        const auto bannedBefore = svc.banned_count();
        const auto corpusBefore = svc.corpus_listing().size();
        const json verdict = {{"reportId", reportId}, {"steamId", cheater}, {"verdict", "confirmed"}, {"gmId", "gm-7"}};
        const auto r = svc.post_verdict(verdict.dump());
        REQUIRE(r.status == 201);
        CHECK(svc.banned_count() == bannedBefore + 1);
        CHECK(svc.corpus_listing().size() == corpusBefore + 1);
        CHECK(svc.post_verdict(verdict.dump()).status == 409);
        CHECK(svc.banned_count() == bannedBefore + 1);

        const auto corpus = replay::load_dataset(dir / "corpus");
        REQUIRE(corpus.size() == 1);
        CHECK(corpus[0].labels.find(cheater)->cheater);

        // Rejecting another flagged player leaves the banned database alone.
        for (const auto& e : queue) {
            if (e.at("steamId") == cheater) continue;
            const json reject = {{"reportId", e.at("reportId")}, {"steamId", e.at("steamId")}, {"verdict", "rejected"}};
            CHECK(svc.post_verdict(reject.dump()).status == 201);
            CHECK(svc.banned_count() == bannedBefore + 1);
            break;
        }
        CHECK(svc.post_verdict(json{{"reportId", "rep-424242"}, {"steamId", cheater}, {"verdict", "confirmed"}}.dump())
                  .status == 404);
        CHECK(svc.post_verdict(json{{"reportId", reportId}, {"steamId", "nobody"}, {"verdict", "confirmed"}}.dump())
                  .status == 404);
        CHECK(svc.post_verdict(R"({"reportId": 3})").status == 400);
        CHECK(svc.flagged("confirmed").body.at("items").size() == 1);
        snapshot = svc.state_snapshot();
        bannedBytes = replay::read_file(dir / "banned.json");
    }
    const auto ledgerSize = fs::file_size(dir / "ledger.jsonl");
    {
        HawkService restarted(config_for(dir));
        CHECK(restarted.state_snapshot() == snapshot);
        CHECK(replay::read_file(dir / "banned.json") == bannedBytes);
    }
    // Derived files are rebuilt from the ledger alone.
    fs::remove(dir / "banned.json");
    fs::remove_all(dir / "corpus");
    {
        HawkService rebuilt(config_for(dir));
        CHECK(rebuilt.state_snapshot() == snapshot);
        CHECK(replay::read_file(dir / "banned.json") == bannedBytes);
        CHECK(fs::file_size(dir / "ledger.jsonl") == ledgerSize);
    }
}

TEST_CASE("optimizer endpoint") {
    const auto dir = fresh_data_dir("optimizer");
    HawkService svc(config_for(dir));
    const auto bundle = svc.bundle();
    const auto r = svc.post_optimizer(R"({"objective":"accuracy"})");
    REQUIRE(r.status == 200);
    const auto expected = eval::optimize(bundle->validationTriples, eval::Objective::parse("accuracy"));
    CHECK(r.body.at("new").at("epsilon").get<double>() == expected.epsilon);
    CHECK(r.body.at("new").at("objectiveValue").get<double>() == expected.objectiveValue);
    CHECK(r.body.at("old").at("objective") == bundle->mvin.objective.to_string());
    // Independent re-scan: no grid point beats the returned accuracy.
    for (const auto& lambda : eval::lambda_grid(0.05))
        for (double eps : eval::epsilon_candidates(lambda, bundle->validationTriples)) {
            eval::ConfusionCounts c;
            for (const auto& t : bundle->validationTriples)
                c.add(eval::decide_hawk(eval::fuse(lambda, t.dPov, t.dStats, t.dSpc), eps), t.label);
            CHECK(eval::metrics(c).accuracy.value() <= r.body.at("new").at("objectiveValue").get<double>());
        }
    CHECK(svc.bundle()->mvin.epsilon == expected.epsilon);

    const auto infeasible = svc.post_optimizer(R"j({"objective":"accuracy-subject-to-recall(1.01)"})j");
    CHECK(infeasible.status == 422);
    CHECK(infeasible.body.at("error") == "InfeasibleConstraint");
    CHECK(svc.bundle()->mvin.epsilon == expected.epsilon);
    CHECK(svc.post_optimizer(R"({"objective":"median"})").status == 400);
    CHECK(svc.post_optimizer("[]").status == 400);

    SUBCASE("pending entries follow the new threshold") {
        const auto [match, labels] = aimbot_match(903);
        svc.submit_match(replay::serialize_match(match));
        const auto everyone = svc.post_optimizer(R"j({"objective":"accuracy-subject-to-recall(1)"})j");
        REQUIRE(everyone.status == 200);
        for (const auto& e : svc.flagged("pending").body.at("items"))
            CHECK(e.at("w").get<double>() >= svc.bundle()->mvin.epsilon);
    }
    SUBCASE("the applied optimizer survives a restart") {
        HawkService restarted(config_for(dir));
        CHECK(restarted.bundle()->mvin.epsilon == expected.epsilon);
        CHECK(restarted.bundle()->mvin.objective.to_string() == "accuracy");
    }
}

TEST_CASE("HTTP surface with bearer token") {
    const auto dir = fresh_data_dir("http");
    auto cfg = config_for(dir);
    cfg.token = "s3cret";
    HawkService svc(cfg);
    httplib::Server server;
    install_routes(server, svc);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client cli("127.0.0.1", port);
    CHECK(cli.Get("/health")->status == 200);
    CHECK(cli.Get("/flagged")->status == 401);
    const httplib::Headers auth{{"Authorization", "Bearer s3cret"}};
    const httplib::Headers wrong{{"Authorization", "Bearer nope"}};
    CHECK(cli.Get("/flagged", wrong)->status == 401);

    const auto [match, labels] = aimbot_match(904, 1);
    const auto cheater = cheater_of(labels);
    auto posted = cli.Post("/matches", auth, replay::serialize_match(match), "application/json");
    REQUIRE(posted);
    CHECK(posted->status == 201);
    const auto reportId = json::parse(posted->body).at("reportId").get<std::string>();
    CHECK(cli.Get("/reports/" + reportId, auth)->status == 200);
    CHECK(cli.Get("/reports/rep-777777", auth)->status == 404);
    CHECK(cli.Post("/matches", auth, "{}", "application/json")->status == 400);

    auto queue = json::parse(cli.Get("/flagged?status=pending", auth)->body).at("items");
    bool listed = false;
    for (const auto& e : queue) listed = listed || (e.at("steamId") == cheater && e.at("reportId") == reportId);
    CHECK(listed);
    const auto bannedBefore = json::parse(cli.Get("/banned", auth)->body).at("count").get<int>();
    const json verdict = {{"reportId", reportId}, {"steamId", cheater}, {"verdict", "confirmed"}, {"gmId", "gm-1"}};
    CHECK(cli.Post("/verdicts", auth, verdict.dump(), "application/json")->status == 201);
    CHECK(cli.Post("/verdicts", auth, verdict.dump(), "application/json")->status == 409);
    CHECK(json::parse(cli.Get("/banned", auth)->body).at("count").get<int>() == bannedBefore + 1);
    CHECK(cli.Post("/optimizer", auth, R"j({"objective":"accuracy-subject-to-recall(1.01)"})j", "application/json")->status ==
          422);
    CHECK(cli.Post("/optimizer", auth, R"({"objective":"f1"})", "application/json")->status == 200);

    server.stop();
    worker.join();
}

TEST_CASE("bind address parsing") {
    CHECK(parse_bind("0.0.0.0:9000") == std::make_pair(std::string("0.0.0.0"), 9000));
    CHECK(parse_bind("8081") == std::make_pair(std::string("127.0.0.1"), 8081));
    CHECK_THROWS_AS(parse_bind("host:port"), ConfigError);
}
