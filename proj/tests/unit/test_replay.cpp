#include "hawk/error.hpp"
#include "hawk/replay/dataset.hpp"
#include "hawk/replay/json_io.hpp"
#include "hawk/replay/synth.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <set>

using namespace hawk;
using namespace hawk::replay;

namespace {

const char* kMinimal = R"({
  "matchId": "m1", "mapName": "de_test", "tickRate": 128, "dateUtc": "2024-03-01T18:00:00Z",
  "players": [{"steamID": "a", "side": "T"}, {"steamID": "b", "side": "CT"}],
  "rounds": [{"roundNum": 1, "startTick": 0, "freezeTimeEndTick": 100, "endTick": 1000, "winnerSide": "CT"}],
  "damages": [{"tick": 500, "roundNum": 1, "attackerSteamID": "a", "victimSteamID": "b",
               "attackerSide": "T", "victimSide": "CT",
               "attackerX": 0, "attackerY": 0, "attackerZ": 0, "victimX": 100, "victimY": 0, "victimZ": 0,
               "attackerViewX": 365, "attackerViewY": 0, "victimViewX": 180, "victimViewY": 0,
               "attackerStrafe": false, "weapon": "AK-47", "weaponClass": "rifle",
               "hpDamage": 30, "hpDamageTaken": 30, "armorDamage": 5, "armorDamageTaken": 5,
               "hitGroup": "Chest", "isFriendlyFire": false, "distance": 100, "zoomLevel": 0}],
  "kills": [], "weaponFires": [], "flashes": [], "grenades": [], "frames": [], "economy": []
})";

std::vector<CheatProfile> honest(int n) { return std::vector<CheatProfile>(static_cast<std::size_t>(n)); }

} // namespace

TEST_CASE("minimal fixture parses") {
    MatchRecord m = parse_match_json(kMinimal);
    CHECK(m.rounds.size() == 1);
    CHECK(m.players.size() == 2);
    REQUIRE(m.damages.size() == 1);
    CHECK(m.damages[0].attackerView.x == doctest::Approx(5.0));
    CHECK(parse_match_json(serialize_match(m)) == m);
}

TEST_CASE("tick outside every round is a consistency error naming the path") {
    auto j = nlohmann::json::parse(kMinimal);
    j["damages"][0]["tick"] = 5000;
    try {
        parse_match_json(j.dump());
        FAIL("expected ConsistencyError");
    } catch (const ConsistencyError& e) {
        CHECK(std::string(e.what()).find("damages[0].tick") != std::string::npos);
    }
}

TEST_CASE("missing field and unknown steam id") {
    auto j = nlohmann::json::parse(kMinimal);
    j.erase("tickRate");
    CHECK_THROWS_AS(parse_match_json(j.dump()), SchemaError);
    j = nlohmann::json::parse(kMinimal);
    j["damages"][0]["victimSteamID"] = "zzz";
    CHECK_THROWS_AS(parse_match_json(j.dump()), ConsistencyError);
    CHECK_THROWS_AS(parse_match_json("{not json"), SchemaError);
}

TEST_CASE("view normalization") {
    CHECK(normalize_view({365, 0}).x == doctest::Approx(5));
    CHECK(normalize_view({-10, 100}).x == doctest::Approx(350));
    CHECK(normalize_view({-10, 100}).y == doctest::Approx(90));
    CHECK(normalize_view({720, -95}).x == 0.0);
}

TEST_CASE("utc round trip") {
    CHECK(format_utc(parse_utc("2024-03-01T18:00:00Z")) == "2024-03-01T18:00:00Z");
    CHECK(parse_utc("1970-01-02T00:00:00.250Z") == 86400);
    CHECK_THROWS_AS(parse_utc("2024-03-01 18:00"), SchemaError);
}

TEST_CASE("synthetic generation is deterministic and round-trips") {
    auto p = honest(10);
    auto [a, la] = generate_synthetic_match(p, 5, 7);
    auto [b, lb] = generate_synthetic_match(p, 5, 7);
    CHECK(serialize_match(a) == serialize_match(b));
    CHECK(la == lb);
    CHECK(a.rounds.size() == 5);
    CHECK(parse_match_json(serialize_match(a)) == a);
    auto [c, lc] = generate_synthetic_match(p, 5, 8);
    CHECK(serialize_match(a) != serialize_match(c));
}

TEST_CASE("generated matches satisfy every invariant over random seeds") {
    std::vector<CheatProfile> mixed = honest(10);
    mixed[1].kind = ProfileKind::Aimbot;
    mixed[7].kind = ProfileKind::Wallhack;
    mixed[4].kind = ProfileKind::BoostingLike;
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        auto [m, l] = generate_synthetic_match(mixed, 4, seed);
        MatchRecord copy = m;
        CHECK_NOTHROW(validate_match(copy));
        CHECK(copy == m);
        for (const auto& d : m.damages) CHECK(d.hpDamageTaken <= d.hpDamage);
        for (const auto& g : m.grenades) CHECK(g.destroyTick >= g.throwTick);
        for (const auto& lab : l.labels) CHECK((lab.cheatType == CheatType::None) == !lab.cheater);
        for (const auto& f : m.frames)
            for (const auto& pf : f.players) {
                CHECK(pf.view.x >= 0);
                CHECK(pf.view.x < 360);
                if (!pf.isAlive) CHECK(pf.isolationDegree == 0);
            }
    }
}

TEST_CASE("profile validation") {
    std::vector<CheatProfile> none;
    CHECK_THROWS_AS(generate_synthetic_match(none, 3, 1), ConfigError);
    auto p = honest(4);
    CHECK_THROWS_AS(generate_synthetic_match(p, 0, 1), ConfigError);
    p[0].sophistication = 1.5;
    CHECK_THROWS_AS(generate_synthetic_match(p, 3, 1), ConfigError);
    p[0].sophistication = 0;
    p[0].overrides.headshotBias = -0.1;
    CHECK_THROWS_AS(generate_synthetic_match(p, 3, 1), ConfigError);
}

TEST_CASE("split sizes, ordering, determinism") {
    DatasetSpec spec;
    spec.matches = 10;
    spec.rounds = 1;
    spec.playersPerMatch = 4;
    auto data = generate_synthetic_dataset(spec);
    auto s = split_dataset(data, {0.6, 0.2, 0.2}, false, 3);
    CHECK(s.train.size() == 6);
    CHECK(s.validation.size() == 2);
    CHECK(s.test.size() == 2);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.validation.begin(), s.validation.end());
    all.insert(s.test.begin(), s.test.end());
    CHECK(all.size() == 10);

    auto again = split_dataset(data, {0.6, 0.2, 0.2}, false, 3);
    CHECK(again.train == s.train);
    CHECK(again.test == s.test);

    auto d = split_dataset(data, {0.6, 0.2, 0.2}, true, 3);
    std::int64_t maxTrain = 0, minVal = INT64_MAX;
    for (auto i : d.train) maxTrain = std::max(maxTrain, parse_utc(data[i].match.dateUtc));
    for (auto i : d.validation) minVal = std::min(minVal, parse_utc(data[i].match.dateUtc));
    CHECK(maxTrain <= minVal);

    CHECK_THROWS_AS(split_dataset(data, {1.2, -0.2, 0.0}, false, 1), ConfigError);
    CHECK_THROWS_AS(split_dataset(data, {0.5, 0.2, 0.2}, false, 1), ConfigError);
}

TEST_CASE("dataset directory round trip") {
    DatasetSpec spec;
    spec.matches = 3;
    spec.rounds = 2;
    spec.playersPerMatch = 4;
    auto data = generate_synthetic_dataset(spec);
    const auto dir = std::filesystem::temp_directory_path() / "hawk_test_dataset";
    std::filesystem::remove_all(dir);
    save_dataset(dir, data);
    auto back = load_dataset(dir);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].match == data[i].match);
        CHECK(back[i].labels == data[i].labels);
    }
    std::filesystem::remove_all(dir);
}
