#include "hawk/features/streams.hpp"

#include "hawk/error.hpp"

#include <algorithm>
#include <map>

namespace hawk::features {

using namespace replay;

namespace {

constexpr std::array<std::string_view, kStreamCount> kStreamNames{
    "damage", "auxiliaryProps", "offensiveProps", "elimination", "weaponFire", "movement", "economy"};

void add(std::vector<std::string>& cols, std::initializer_list<const char*> names) {
    for (const char* n : names) cols.emplace_back(n);
}

void add_pos(std::vector<std::string>& cols, const std::string& prefix) {
    for (const char* a : {"X", "Y", "Z"}) cols.push_back(prefix + a);
}

void add_view(std::vector<std::string>& cols, const std::string& prefix) {
    cols.push_back(prefix + "ViewX");
    cols.push_back(prefix + "ViewY");
}

void add_weapon_class(std::vector<std::string>& cols) {
    for (auto c : kWeaponClasses) cols.push_back("weaponClass=" + std::string(c));
}

std::array<std::vector<std::string>, kStreamCount> build_columns() {
    std::array<std::vector<std::string>, kStreamCount> out;
    auto& dmg = out[0];
    add(dmg, {"seconds"});
    add_pos(dmg, "attacker");
    add_pos(dmg, "victim");
    add_view(dmg, "attacker");
    add_view(dmg, "victim");
    add(dmg, {"attackerStrafe", "hpDamage", "hpDamageTaken", "armorDamage", "armorDamageTaken"});
    for (int g = 0; g < kHitGroupCount; ++g)
        dmg.push_back("hitGroup=" + std::string(to_string(static_cast<HitGroup>(g))));
    add(dmg, {"isFriendlyFire", "distance", "zoomLevel"});
    add_weapon_class(dmg);

    auto& aux = out[1];
    add(aux, {"seconds"});
    add_pos(aux, "attacker");
    add_pos(aux, "victim");
    add_view(aux, "attacker");
    add_view(aux, "victim");
    add(aux, {"flashDuration", "victimIsOpponent", "victimIsSelf"});

    auto& off = out[2];
    add(off, {"throwSeconds"});
    add_pos(off, "thrower");
    add_view(off, "thrower");
    for (int g = 0; g < kGrenadeTypeCount; ++g)
        off.push_back("grenadeType=" + std::string(to_string(static_cast<GrenadeType>(g))));
    add_pos(off, "grenade");
    add(off, {"lifetimeSeconds"});

    auto& elm = out[3];
    add(elm, {"seconds"});
    add_pos(elm, "attacker");
    add_pos(elm, "victim");
    add_view(elm, "attacker");
    add_view(elm, "victim");
    add(elm, {"hasAssister", "isSuicide", "isTeamkill", "isWallbang", "penetratedObjects", "isFirstKill",
              "isHeadshot", "victimBlinded", "attackerBlinded", "hasFlashThrower", "noScope", "thruSmoke", "isTrade",
              "distance"});
    add_weapon_class(elm);

    auto& wf = out[4];
    add(wf, {"seconds"});
    add_pos(wf, "player");
    add_view(wf, "player");
    add(wf, {"playerStrafe", "zoomLevel", "ammoInMagazine", "ammoInReserve"});
    add_weapon_class(wf);

    auto& mov = out[5];
    add(mov, {"seconds", "X", "Y", "Z", "viewX", "viewY", "velocityX", "velocityY", "velocityZ", "isAlive",
              "isBlinded", "isDucking", "isScoped", "isWalking", "isReloading", "isDefusing", "isPlanting",
              "isInBombZone", "isAirborne", "isStanding", "isDuckingInProgress", "isUnDuckingInProgress",
              "isolationDegree"});

    auto& eco = out[6];
    add(eco, {"equipmentValueFreezetimeEnd", "equipmentValueRoundStart", "cash", "cashSpendTotal"});
    return out;
}

const std::array<std::vector<std::string>, kStreamCount>& columns() {
    static const auto cols = build_columns();
    return cols;
}

class RowWriter {
public:
    explicit RowWriter(std::vector<double>& row) : row_(row) {}
    RowWriter& num(double v) {
        row_.push_back(v);
        return *this;
    }
    RowWriter& flag(bool b) { return num(b ? 1.0 : 0.0); }
    RowWriter& pos(const Vec3& p) { return num(p.x).num(p.y).num(p.z); }
    RowWriter& view(const View& v) { return num(v.x).num(v.y); }
    RowWriter& one_hot(int index, int count) {
        for (int i = 0; i < count; ++i) flag(i == index);
        return *this;
    }
    RowWriter& weapon_class(std::string_view cls) {
        auto it = std::find(kWeaponClasses.begin(), kWeaponClasses.end(), cls);
        if (it == kWeaponClasses.end()) it = kWeaponClasses.end() - 1;
        return one_hot(static_cast<int>(it - kWeaponClasses.begin()), static_cast<int>(kWeaponClasses.size()));
    }

private:
    std::vector<double>& row_;
};

Sequence to_matrix(const std::vector<std::vector<double>>& rows, StreamKind k) {
    const int w = stream_width(k);
    Sequence m(static_cast<Eigen::Index>(rows.size()), w);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<int>(rows[r].size()) != w) throw std::logic_error("stream row width mismatch");
        for (int c = 0; c < w; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
    return m;
}

} // namespace

std::string_view to_string(StreamKind k) { return kStreamNames[static_cast<std::size_t>(k)]; }

std::optional<StreamKind> stream_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kStreamNames.size(); ++i)
        if (kStreamNames[i] == s) return static_cast<StreamKind>(i);
    return std::nullopt;
}

const std::vector<std::string>& column_names(StreamKind k) { return columns()[static_cast<std::size_t>(k)]; }

nlohmann::ordered_json column_map_json() {
    nlohmann::ordered_json j;
    j["version"] = kColumnMapVersion;
    nlohmann::ordered_json streams = nlohmann::ordered_json::object();
    for (auto k : kAllStreams) streams[std::string(to_string(k))] = column_names(k);
    j["streams"] = streams;
    return j;
}

TemporalStreams extract_streams(const MatchRecord& m, std::string_view id, const StreamConfig& cfg) {
    const PlayerRef* self = m.find_player(id);
    if (!self) throw UnknownPlayer(std::string(id));
    if (cfg.movementStride < 1) throw ConfigError("movementStride: must be positive");

    std::map<int, Tick> roundStart;
    for (const auto& r : m.rounds) roundStart[r.roundNum] = r.startTick;
    auto secs = [&](int roundNum, Tick t) {
        auto it = roundStart.find(roundNum);
        const Tick base = it == roundStart.end() ? 0 : it->second;
        return static_cast<double>(t - base) / m.tickRate;
    };

    std::array<std::vector<std::vector<double>>, kStreamCount> rows;
    auto next = [&](StreamKind k) -> std::vector<double>& {
        auto& r = rows[static_cast<std::size_t>(k)];
        r.emplace_back();
        r.back().reserve(static_cast<std::size_t>(stream_width(k)));
        return r.back();
    };

    for (const auto& e : m.damages) {
        if (e.attackerSteamID != id) continue;
        RowWriter(next(StreamKind::Damage))
            .num(secs(e.roundNum, e.tick))
            .pos(e.attackerPos)
            .pos(e.victimPos)
            .view(e.attackerView)
            .view(e.victimView)
            .flag(e.attackerStrafe)
            .num(e.hpDamage)
            .num(e.hpDamageTaken)
            .num(e.armorDamage)
            .num(e.armorDamageTaken)
            .one_hot(static_cast<int>(e.hitGroup), kHitGroupCount)
            .flag(e.isFriendlyFire)
            .num(e.distance)
            .num(e.zoomLevel)
            .weapon_class(e.weaponClass);
    }
    for (const auto& e : m.flashes) {
        if (e.attackerSteamID != id) continue;
        RowWriter(next(StreamKind::AuxiliaryProps))
            .num(secs(e.roundNum, e.tick))
            .pos(e.attackerPos)
            .pos(e.victimPos)
            .view(e.attackerView)
            .view(e.victimView)
            .num(e.flashDuration)
            .flag(e.victimSide != e.attackerSide)
            .flag(e.victimSteamID == e.attackerSteamID);
    }
    for (const auto& e : m.grenades) {
        if (e.throwerSteamID != id) continue;
        RowWriter(next(StreamKind::OffensiveProps))
            .num(secs(e.roundNum, e.throwTick))
            .pos(e.throwerPos)
            .view(e.throwerView)
            .one_hot(static_cast<int>(e.grenadeType), kGrenadeTypeCount)
            .pos(e.grenadePos)
            .num(static_cast<double>(e.destroyTick - e.throwTick) / m.tickRate);
    }
    for (const auto& e : m.kills) {
        if (e.attackerSteamID != id) continue;
        RowWriter(next(StreamKind::Elimination))
            .num(secs(e.roundNum, e.tick))
            .pos(e.attackerPos)
            .pos(e.victimPos)
            .view(e.attackerView)
            .view(e.victimView)
            .flag(e.assisterSteamID.has_value())
            .flag(e.isSuicide)
            .flag(e.isTeamkill)
            .flag(e.isWallbang)
            .num(e.penetratedObjects)
            .flag(e.isFirstKill)
            .flag(e.isHeadshot)
            .flag(e.victimBlinded)
            .flag(e.attackerBlinded)
            .flag(e.flashThrowerSteamID.has_value())
            .flag(e.noScope)
            .flag(e.thruSmoke)
            .flag(e.isTrade)
            .num(e.distance)
            .weapon_class(e.weaponClass);
    }
    for (const auto& e : m.weaponFires) {
        if (e.playerSteamID != id) continue;
        RowWriter(next(StreamKind::WeaponFire))
            .num(secs(e.roundNum, e.tick))
            .pos(e.playerPos)
            .view(e.playerView)
            .flag(e.playerStrafe)
            .num(e.zoomLevel)
            .num(e.ammoInMagazine)
            .num(e.ammoInReserve)
            .weapon_class(e.weaponClass);
    }

    const RoundRecord* current = nullptr;
    Tick lastKept = 0;
    bool kept = false;
    for (const auto& f : m.frames) {
        const RoundRecord* r = m.round_at(f.tick);
        if (r != current) {
            current = r;
            kept = false;
        }
        if (kept && f.tick < lastKept + cfg.movementStride) continue;
        for (const auto& p : f.players) {
            if (p.steamId != id) continue;
            kept = true;
            lastKept = f.tick;
            RowWriter(next(StreamKind::Movement))
                .num(r ? static_cast<double>(f.tick - r->startTick) / m.tickRate : 0.0)
                .pos(p.pos)
                .view(p.view)
                .pos(p.velocity)
                .flag(p.isAlive)
                .flag(p.isBlinded)
                .flag(p.isDucking)
                .flag(p.isScoped)
                .flag(p.isWalking)
                .flag(p.isReloading)
                .flag(p.isDefusing)
                .flag(p.isPlanting)
                .flag(p.isInBombZone)
                .flag(p.isAirborne)
                .flag(p.isStanding)
                .flag(p.isDuckingInProgress)
                .flag(p.isUnDuckingInProgress)
                .num(p.isolationDegree);
            break;
        }
    }

    std::vector<const EconomyRecord*> eco;
    for (const auto& e : m.economy)
        if (e.steamId == id) eco.push_back(&e);
    std::stable_sort(eco.begin(), eco.end(),
                     [](const EconomyRecord* a, const EconomyRecord* b) { return a->roundNum < b->roundNum; });
    for (const auto* e : eco)
        RowWriter(next(StreamKind::Economy))
            .num(e->equipmentValueFreezetimeEnd)
            .num(e->equipmentValueRoundStart)
            .num(e->cash)
            .num(e->cashSpendTotal);

    TemporalStreams out;
    for (auto k : kAllStreams) out[k] = to_matrix(rows[static_cast<std::size_t>(k)], k);
    return out;
}

nlohmann::json streams_to_json(const TemporalStreams& s) {
    nlohmann::json j = nlohmann::json::object();
    for (auto k : kAllStreams) {
        const Sequence& q = s[k];
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < q.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < q.cols(); ++c) row.push_back(q(r, c));
            rows.push_back(std::move(row));
        }
        j[std::string(to_string(k))] = std::move(rows);
    }
    return j;
}

TemporalStreams streams_from_json(const nlohmann::json& j) {
    TemporalStreams s;
    for (auto k : kAllStreams) {
        const std::string name(to_string(k));
        if (!j.contains(name) || !j[name].is_array()) throw SchemaError("streams." + name + ": missing");
        const auto& rows = j[name];
        const int w = stream_width(k);
        Sequence q(static_cast<Eigen::Index>(rows.size()), w);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != w)
                throw SchemaError("streams." + name + "[" + std::to_string(r) + "]: expected " + std::to_string(w) +
                                  " columns");
            for (int c = 0; c < w; ++c) q(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)].get<double>();
        }
        s[k] = std::move(q);
    }
    return s;
}

} // namespace hawk::features
