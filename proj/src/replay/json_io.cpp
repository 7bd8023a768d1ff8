#include "hawk/replay/json_io.hpp"

#include "hawk/error.hpp"

#include <json.hpp>

#include <set>

namespace hawk::replay {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string child(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

const json& field(const json& obj, std::string_view key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(child(path, key) + ": missing required field");
    return *it;
}

std::string get_string(const json& obj, std::string_view key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_string()) throw SchemaError(child(path, key) + ": expected string");
    return v.get<std::string>();
}

std::optional<std::string> get_opt_string(const json& obj, std::string_view key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw SchemaError(child(path, key) + ": expected string");
    return it->get<std::string>();
}

double get_double(const json& obj, std::string_view key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_number()) throw SchemaError(child(path, key) + ": expected number");
    return v.get<double>();
}

std::int64_t get_int(const json& obj, std::string_view key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_number_integer()) throw SchemaError(child(path, key) + ": expected integer");
    return v.get<std::int64_t>();
}

int get_int32(const json& obj, std::string_view key, const std::string& path) {
    return static_cast<int>(get_int(obj, key, path));
}

bool get_bool(const json& obj, std::string_view key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_boolean()) throw SchemaError(child(path, key) + ": expected boolean");
    return v.get<bool>();
}

Side get_side(const json& obj, std::string_view key, const std::string& path) {
    auto s = side_from_string(get_string(obj, key, path));
    if (!s) throw SchemaError(child(path, key) + ": expected \"T\" or \"CT\"");
    return *s;
}

std::optional<Side> get_opt_side(const json& obj, std::string_view key, const std::string& path) {
    auto s = get_opt_string(obj, key, path);
    if (!s) return std::nullopt;
    auto side = side_from_string(*s);
    if (!side) throw SchemaError(child(path, key) + ": expected \"T\" or \"CT\"");
    return side;
}

Vec3 get_vec(const json& obj, const std::string& prefix, const std::string& path) {
    return {get_double(obj, prefix + "X", path), get_double(obj, prefix + "Y", path),
            get_double(obj, prefix + "Z", path)};
}

View get_view(const json& obj, const std::string& prefix, const std::string& path) {
    return {get_double(obj, prefix + "ViewX", path), get_double(obj, prefix + "ViewY", path)};
}

const json& get_array(const json& obj, std::string_view key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_array()) throw SchemaError(child(path, key) + ": expected array");
    return v;
}

void require_object(const json& v, const std::string& path) {
    if (!v.is_object()) throw SchemaError(path + ": expected object");
}

template <typename T, typename Fn>
std::vector<T> read_list(const json& root, std::string_view key, Fn&& read) {
    const json& arr = get_array(root, key, "");
    std::vector<T> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = index(std::string(key), i);
        require_object(arr[i], p);
        out.push_back(read(arr[i], p));
    }
    return out;
}

DamageEvent read_damage(const json& o, const std::string& p) {
    DamageEvent e;
    e.tick = get_int(o, "tick", p);
    e.roundNum = get_int32(o, "roundNum", p);
    e.attackerSteamID = get_string(o, "attackerSteamID", p);
    e.victimSteamID = get_string(o, "victimSteamID", p);
    e.attackerSide = get_side(o, "attackerSide", p);
    e.victimSide = get_side(o, "victimSide", p);
    e.attackerPos = get_vec(o, "attacker", p);
    e.victimPos = get_vec(o, "victim", p);
    e.attackerView = get_view(o, "attacker", p);
    e.victimView = get_view(o, "victim", p);
    e.attackerStrafe = get_bool(o, "attackerStrafe", p);
    e.weapon = get_string(o, "weapon", p);
    e.weaponClass = get_string(o, "weaponClass", p);
    e.hpDamage = get_int32(o, "hpDamage", p);
    e.hpDamageTaken = get_int32(o, "hpDamageTaken", p);
    e.armorDamage = get_int32(o, "armorDamage", p);
    e.armorDamageTaken = get_int32(o, "armorDamageTaken", p);
    const std::string hg = get_string(o, "hitGroup", p);
    auto group = hit_group_from_string(hg);
    if (!group) throw SchemaError(child(p, "hitGroup") + ": unknown hit group '" + hg + "'");
    e.hitGroup = *group;
    e.isFriendlyFire = get_bool(o, "isFriendlyFire", p);
    e.distance = get_double(o, "distance", p);
    e.zoomLevel = get_int32(o, "zoomLevel", p);
    return e;
}

KillEvent read_kill(const json& o, const std::string& p) {
    KillEvent e;
    e.tick = get_int(o, "tick", p);
    e.roundNum = get_int32(o, "roundNum", p);
    e.attackerSteamID = get_string(o, "attackerSteamID", p);
    e.victimSteamID = get_string(o, "victimSteamID", p);
    e.attackerSide = get_side(o, "attackerSide", p);
    e.victimSide = get_side(o, "victimSide", p);
    e.attackerPos = get_vec(o, "attacker", p);
    e.victimPos = get_vec(o, "victim", p);
    e.attackerView = get_view(o, "attacker", p);
    e.victimView = get_view(o, "victim", p);
    e.assisterSteamID = get_opt_string(o, "assisterSteamID", p);
    e.assisterSide = get_opt_side(o, "assisterSide", p);
    e.isSuicide = get_bool(o, "isSuicide", p);
    e.isTeamkill = get_bool(o, "isTeamkill", p);
    e.isWallbang = get_bool(o, "isWallbang", p);
    e.penetratedObjects = get_int32(o, "penetratedObjects", p);
    e.isFirstKill = get_bool(o, "isFirstKill", p);
    e.isHeadshot = get_bool(o, "isHeadshot", p);
    e.victimBlinded = get_bool(o, "victimBlinded", p);
    e.attackerBlinded = get_bool(o, "attackerBlinded", p);
    e.flashThrowerSteamID = get_opt_string(o, "flashThrowerSteamID", p);
    e.flashThrowerSide = get_opt_side(o, "flashThrowerSide", p);
    e.noScope = get_bool(o, "noScope", p);
    e.thruSmoke = get_bool(o, "thruSmoke", p);
    e.isTrade = get_bool(o, "isTrade", p);
    e.distance = get_double(o, "distance", p);
    e.weapon = get_string(o, "weapon", p);
    e.weaponClass = get_string(o, "weaponClass", p);
    return e;
}

WeaponFireEvent read_fire(const json& o, const std::string& p) {
    WeaponFireEvent e;
    e.tick = get_int(o, "tick", p);
    e.roundNum = get_int32(o, "roundNum", p);
    e.playerSteamID = get_string(o, "playerSteamID", p);
    e.playerSide = get_side(o, "playerSide", p);
    e.playerPos = get_vec(o, "player", p);
    e.playerView = get_view(o, "player", p);
    e.playerStrafe = get_bool(o, "playerStrafe", p);
    e.weapon = get_string(o, "weapon", p);
    e.weaponClass = get_string(o, "weaponClass", p);
    e.zoomLevel = get_int32(o, "zoomLevel", p);
    e.ammoInMagazine = get_int32(o, "ammoInMagazine", p);
    e.ammoInReserve = get_int32(o, "ammoInReserve", p);
    return e;
}

FlashEvent read_flash(const json& o, const std::string& p) {
    FlashEvent e;
    e.tick = get_int(o, "tick", p);
    e.roundNum = get_int32(o, "roundNum", p);
    e.attackerSteamID = get_string(o, "attackerSteamID", p);
    e.victimSteamID = get_string(o, "victimSteamID", p);
    e.attackerSide = get_side(o, "attackerSide", p);
    e.victimSide = get_side(o, "victimSide", p);
    e.attackerPos = get_vec(o, "attacker", p);
    e.victimPos = get_vec(o, "victim", p);
    e.attackerView = get_view(o, "attacker", p);
    e.victimView = get_view(o, "victim", p);
    e.flashDuration = get_double(o, "flashDuration", p);
    return e;
}

GrenadeEvent read_grenade(const json& o, const std::string& p) {
    GrenadeEvent e;
    e.roundNum = get_int32(o, "roundNum", p);
    e.throwerSteamID = get_string(o, "throwerSteamID", p);
    e.throwerSide = get_side(o, "throwerSide", p);
    e.throwerPos = get_vec(o, "thrower", p);
    e.throwerView = get_view(o, "thrower", p);
    const std::string type = get_string(o, "grenadeType", p);
    auto g = grenade_type_from_string(type);
    if (!g) throw SchemaError(child(p, "grenadeType") + ": unknown grenade type '" + type + "'");
    e.grenadeType = *g;
    e.grenadePos = get_vec(o, "grenade", p);
    e.throwTick = get_int(o, "throwTick", p);
    e.destroyTick = get_int(o, "destroyTick", p);
    return e;
}

PlayerFrame read_player_frame(const json& o, const std::string& p) {
    PlayerFrame f;
    f.steamId = get_string(o, "steamID", p);
    f.side = get_side(o, "side", p);
    f.pos = {get_double(o, "x", p), get_double(o, "y", p), get_double(o, "z", p)};
    f.view = {get_double(o, "viewX", p), get_double(o, "viewY", p)};
    f.velocity = get_vec(o, "velocity", p);
    f.isAlive = get_bool(o, "isAlive", p);
    f.isBlinded = get_bool(o, "isBlinded", p);
    f.isDucking = get_bool(o, "isDucking", p);
    f.isScoped = get_bool(o, "isScoped", p);
    f.isWalking = get_bool(o, "isWalking", p);
    f.isReloading = get_bool(o, "isReloading", p);
    f.isDefusing = get_bool(o, "isDefusing", p);
    f.isPlanting = get_bool(o, "isPlanting", p);
    f.isInBombZone = get_bool(o, "isInBombZone", p);
    f.isAirborne = get_bool(o, "isAirborne", p);
    f.isStanding = get_bool(o, "isStanding", p);
    f.isDuckingInProgress = get_bool(o, "isDuckingInProgress", p);
    f.isUnDuckingInProgress = get_bool(o, "isUnDuckingInProgress", p);
    f.isolationDegree = get_double(o, "isolationDegree", p);
    return f;
}

MovementFrame read_frame(const json& o, const std::string& p) {
    MovementFrame f;
    f.tick = get_int(o, "tick", p);
    const json& arr = get_array(o, "players", p);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string pp = index(child(p, "players"), i);
        require_object(arr[i], pp);
        f.players.push_back(read_player_frame(arr[i], pp));
    }
    return f;
}

EconomyRecord read_economy(const json& o, const std::string& p) {
    EconomyRecord e;
    e.roundNum = get_int32(o, "roundNum", p);
    e.steamId = get_string(o, "steamID", p);
    e.equipmentValueFreezetimeEnd = get_double(o, "equipmentValueFreezetimeEnd", p);
    e.equipmentValueRoundStart = get_double(o, "equipmentValueRoundStart", p);
    e.cash = get_double(o, "cash", p);
    e.cashSpendTotal = get_double(o, "cashSpendTotal", p);
    return e;
}

// ---- validation ----

struct Validator {
    const MatchRecord& m;
    std::set<std::string> ids;

    void player(const std::string& id, const std::string& path) const {
        if (!ids.count(id)) throw ConsistencyError(path + ": unknown steamId '" + id + "'");
    }

    void tick_in_round(Tick tick, int roundNum, const std::string& path) const {
        const RoundRecord* r = m.round(roundNum);
        if (!r) throw ConsistencyError(path + ".roundNum: no round " + std::to_string(roundNum));
        if (tick < r->startTick || tick > r->endTick)
            throw ConsistencyError(path + ".tick: tick " + std::to_string(tick) + " outside round " +
                                   std::to_string(roundNum));
    }
};

void normalize_views(MatchRecord& m) {
    for (auto& e : m.damages) {
        e.attackerView = normalize_view(e.attackerView);
        e.victimView = normalize_view(e.victimView);
    }
    for (auto& e : m.kills) {
        e.attackerView = normalize_view(e.attackerView);
        e.victimView = normalize_view(e.victimView);
    }
    for (auto& e : m.weaponFires) e.playerView = normalize_view(e.playerView);
    for (auto& e : m.flashes) {
        e.attackerView = normalize_view(e.attackerView);
        e.victimView = normalize_view(e.victimView);
    }
    for (auto& e : m.grenades) e.throwerView = normalize_view(e.throwerView);
    for (auto& f : m.frames)
        for (auto& p : f.players) p.view = normalize_view(p.view);
}

// ---- serialization ----

void put_vec(ojson& o, const std::string& prefix, const Vec3& v) {
    o[prefix + "X"] = v.x;
    o[prefix + "Y"] = v.y;
    o[prefix + "Z"] = v.z;
}

void put_view(ojson& o, const std::string& prefix, const View& v) {
    o[prefix + "ViewX"] = v.x;
    o[prefix + "ViewY"] = v.y;
}

template <typename T>
void put_opt(ojson& o, const std::string& key, const std::optional<T>& v) {
    if (v) o[key] = *v;
    else o[key] = nullptr;
}

double round_seconds(const MatchRecord& m, Tick tick, int roundNum) {
    const RoundRecord* r = m.round(roundNum);
    return r ? static_cast<double>(tick - r->startTick) / m.tickRate : 0.0;
}

} // namespace

void validate_match(MatchRecord& m) {
    normalize_views(m);
    if (!(m.tickRate > 0)) throw ConsistencyError("tickRate: must be positive");
    parse_utc(m.dateUtc);

    Validator v{m, {}};
    for (std::size_t i = 0; i < m.players.size(); ++i)
        if (!v.ids.insert(m.players[i].steamId).second)
            throw ConsistencyError(index("players", i) + ".steamID: duplicate steamId '" + m.players[i].steamId +
                                   "'");

    for (std::size_t i = 0; i < m.rounds.size(); ++i) {
        const RoundRecord& r = m.rounds[i];
        const std::string p = index("rounds", i);
        if (r.roundNum != static_cast<int>(i) + 1)
            throw ConsistencyError(p + ".roundNum: rounds must be numbered contiguously from 1");
        if (!(r.startTick <= r.freezeTimeEndTick && r.freezeTimeEndTick <= r.endTick))
            throw ConsistencyError(p + ": requires startTick <= freezeTimeEndTick <= endTick");
    }

    for (std::size_t i = 0; i < m.damages.size(); ++i) {
        const auto& e = m.damages[i];
        const std::string p = index("damages", i);
        v.tick_in_round(e.tick, e.roundNum, p);
        v.player(e.attackerSteamID, p + ".attackerSteamID");
        v.player(e.victimSteamID, p + ".victimSteamID");
        if (e.hpDamage < 0 || e.hpDamageTaken < 0 || e.armorDamage < 0 || e.armorDamageTaken < 0)
            throw ConsistencyError(p + ": damage values must be non-negative");
        if (e.hpDamageTaken > e.hpDamage) throw ConsistencyError(p + ".hpDamageTaken: exceeds hpDamage");
    }
    for (std::size_t i = 0; i < m.kills.size(); ++i) {
        const auto& e = m.kills[i];
        const std::string p = index("kills", i);
        v.tick_in_round(e.tick, e.roundNum, p);
        v.player(e.attackerSteamID, p + ".attackerSteamID");
        v.player(e.victimSteamID, p + ".victimSteamID");
        if (e.assisterSteamID) v.player(*e.assisterSteamID, p + ".assisterSteamID");
        if (e.flashThrowerSteamID) v.player(*e.flashThrowerSteamID, p + ".flashThrowerSteamID");
        if (e.penetratedObjects < 0) throw ConsistencyError(p + ".penetratedObjects: must be non-negative");
    }
    for (std::size_t i = 0; i < m.weaponFires.size(); ++i) {
        const auto& e = m.weaponFires[i];
        const std::string p = index("weaponFires", i);
        v.tick_in_round(e.tick, e.roundNum, p);
        v.player(e.playerSteamID, p + ".playerSteamID");
    }
    for (std::size_t i = 0; i < m.flashes.size(); ++i) {
        const auto& e = m.flashes[i];
        const std::string p = index("flashes", i);
        v.tick_in_round(e.tick, e.roundNum, p);
        v.player(e.attackerSteamID, p + ".attackerSteamID");
        v.player(e.victimSteamID, p + ".victimSteamID");
        if (e.flashDuration < 0) throw ConsistencyError(p + ".flashDuration: must be non-negative");
    }
    for (std::size_t i = 0; i < m.grenades.size(); ++i) {
        const auto& e = m.grenades[i];
        const std::string p = index("grenades", i);
        const RoundRecord* r = m.round(e.roundNum);
        if (!r) throw ConsistencyError(p + ".roundNum: no round " + std::to_string(e.roundNum));
        if (e.throwTick < r->startTick || e.throwTick > r->endTick)
            throw ConsistencyError(p + ".throwTick: tick " + std::to_string(e.throwTick) + " outside round " +
                                   std::to_string(e.roundNum));
        if (e.destroyTick < e.throwTick) throw ConsistencyError(p + ".destroyTick: precedes throwTick");
        v.player(e.throwerSteamID, p + ".throwerSteamID");
    }
    for (std::size_t i = 0; i < m.frames.size(); ++i) {
        const auto& f = m.frames[i];
        const std::string p = index("frames", i);
        if (!m.round_at(f.tick))
            throw ConsistencyError(p + ".tick: tick " + std::to_string(f.tick) + " outside rounds");
        for (std::size_t j = 0; j < f.players.size(); ++j)
            v.player(f.players[j].steamId, index(p + ".players", j) + ".steamID");
    }
    for (std::size_t i = 0; i < m.economy.size(); ++i) {
        const auto& e = m.economy[i];
        const std::string p = index("economy", i);
        if (!m.round(e.roundNum)) throw ConsistencyError(p + ".roundNum: no round " + std::to_string(e.roundNum));
        v.player(e.steamId, p + ".steamID");
        if (e.equipmentValueFreezetimeEnd < 0 || e.equipmentValueRoundStart < 0 || e.cash < 0 ||
            e.cashSpendTotal < 0)
            throw ConsistencyError(p + ": economy values must be non-negative");
    }
}

MatchRecord parse_match_json(std::string_view bytes) {
    json root;
    try {
        root = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("$: invalid JSON: ") + e.what());
    }
    require_object(root, "$");

    MatchRecord m;
    m.matchId = get_string(root, "matchId", "");
    m.mapName = get_string(root, "mapName", "");
    m.tickRate = get_double(root, "tickRate", "");
    m.dateUtc = get_string(root, "dateUtc", "");
    try {
        parse_utc(m.dateUtc);
    } catch (const SchemaError&) {
        throw SchemaError("dateUtc: malformed ISO-8601 UTC timestamp");
    }
    m.players = read_list<PlayerRef>(root, "players", [](const json& o, const std::string& p) {
        return PlayerRef{get_string(o, "steamID", p), get_side(o, "side", p)};
    });
    m.rounds = read_list<RoundRecord>(root, "rounds", [](const json& o, const std::string& p) {
        RoundRecord r;
        r.roundNum = get_int32(o, "roundNum", p);
        r.startTick = get_int(o, "startTick", p);
        r.freezeTimeEndTick = get_int(o, "freezeTimeEndTick", p);
        r.endTick = get_int(o, "endTick", p);
        r.winnerSide = get_side(o, "winnerSide", p);
        return r;
    });
    m.damages = read_list<DamageEvent>(root, "damages", read_damage);
    m.kills = read_list<KillEvent>(root, "kills", read_kill);
    m.weaponFires = read_list<WeaponFireEvent>(root, "weaponFires", read_fire);
    m.flashes = read_list<FlashEvent>(root, "flashes", read_flash);
    m.grenades = read_list<GrenadeEvent>(root, "grenades", read_grenade);
    m.frames = read_list<MovementFrame>(root, "frames", read_frame);
    m.economy = read_list<EconomyRecord>(root, "economy", read_economy);

    validate_match(m);
    return m;
}

std::string serialize_match(const MatchRecord& m, int indent) {
    ojson root;
    root["matchId"] = m.matchId;
    root["mapName"] = m.mapName;
    root["tickRate"] = m.tickRate;
    root["dateUtc"] = m.dateUtc;

    ojson players = ojson::array();
    for (const auto& p : m.players) players.push_back({{"steamID", p.steamId}, {"side", to_string(p.side)}});
    root["players"] = std::move(players);

    ojson rounds = ojson::array();
    for (const auto& r : m.rounds)
        rounds.push_back({{"roundNum", r.roundNum},
                          {"startTick", r.startTick},
                          {"freezeTimeEndTick", r.freezeTimeEndTick},
                          {"endTick", r.endTick},
                          {"winnerSide", to_string(r.winnerSide)}});
    root["rounds"] = std::move(rounds);

    ojson damages = ojson::array();
    for (const auto& e : m.damages) {
        ojson o;
        o["tick"] = e.tick;
        o["seconds"] = round_seconds(m, e.tick, e.roundNum);
        o["roundNum"] = e.roundNum;
        o["attackerSteamID"] = e.attackerSteamID;
        o["victimSteamID"] = e.victimSteamID;
        o["attackerSide"] = to_string(e.attackerSide);
        o["victimSide"] = to_string(e.victimSide);
        put_vec(o, "attacker", e.attackerPos);
        put_vec(o, "victim", e.victimPos);
        put_view(o, "attacker", e.attackerView);
        put_view(o, "victim", e.victimView);
        o["attackerStrafe"] = e.attackerStrafe;
        o["weapon"] = e.weapon;
        o["weaponClass"] = e.weaponClass;
        o["hpDamage"] = e.hpDamage;
        o["hpDamageTaken"] = e.hpDamageTaken;
        o["armorDamage"] = e.armorDamage;
        o["armorDamageTaken"] = e.armorDamageTaken;
        o["hitGroup"] = to_string(e.hitGroup);
        o["isFriendlyFire"] = e.isFriendlyFire;
        o["distance"] = e.distance;
        o["zoomLevel"] = e.zoomLevel;
        damages.push_back(std::move(o));
    }
    root["damages"] = std::move(damages);

    ojson kills = ojson::array();
    for (const auto& e : m.kills) {
        ojson o;
        o["tick"] = e.tick;
        o["seconds"] = round_seconds(m, e.tick, e.roundNum);
        o["roundNum"] = e.roundNum;
        o["attackerSteamID"] = e.attackerSteamID;
        o["victimSteamID"] = e.victimSteamID;
        o["attackerSide"] = to_string(e.attackerSide);
        o["victimSide"] = to_string(e.victimSide);
        put_vec(o, "attacker", e.attackerPos);
        put_vec(o, "victim", e.victimPos);
        put_view(o, "attacker", e.attackerView);
        put_view(o, "victim", e.victimView);
        put_opt(o, "assisterSteamID", e.assisterSteamID);
        if (e.assisterSide) o["assisterSide"] = to_string(*e.assisterSide);
        else o["assisterSide"] = nullptr;
        o["isSuicide"] = e.isSuicide;
        o["isTeamkill"] = e.isTeamkill;
        o["isWallbang"] = e.isWallbang;
        o["penetratedObjects"] = e.penetratedObjects;
        o["isFirstKill"] = e.isFirstKill;
        o["isHeadshot"] = e.isHeadshot;
        o["victimBlinded"] = e.victimBlinded;
        o["attackerBlinded"] = e.attackerBlinded;
        put_opt(o, "flashThrowerSteamID", e.flashThrowerSteamID);
        if (e.flashThrowerSide) o["flashThrowerSide"] = to_string(*e.flashThrowerSide);
        else o["flashThrowerSide"] = nullptr;
        o["noScope"] = e.noScope;
        o["thruSmoke"] = e.thruSmoke;
        o["isTrade"] = e.isTrade;
        o["distance"] = e.distance;
        o["weapon"] = e.weapon;
        o["weaponClass"] = e.weaponClass;
        kills.push_back(std::move(o));
    }
    root["kills"] = std::move(kills);

    ojson fires = ojson::array();
    for (const auto& e : m.weaponFires) {
        ojson o;
        o["tick"] = e.tick;
        o["seconds"] = round_seconds(m, e.tick, e.roundNum);
        o["roundNum"] = e.roundNum;
        o["playerSteamID"] = e.playerSteamID;
        o["playerSide"] = to_string(e.playerSide);
        put_vec(o, "player", e.playerPos);
        put_view(o, "player", e.playerView);
        o["playerStrafe"] = e.playerStrafe;
        o["weapon"] = e.weapon;
        o["weaponClass"] = e.weaponClass;
        o["zoomLevel"] = e.zoomLevel;
        o["ammoInMagazine"] = e.ammoInMagazine;
        o["ammoInReserve"] = e.ammoInReserve;
        fires.push_back(std::move(o));
    }
    root["weaponFires"] = std::move(fires);

    ojson flashes = ojson::array();
    for (const auto& e : m.flashes) {
        ojson o;
        o["tick"] = e.tick;
        o["seconds"] = round_seconds(m, e.tick, e.roundNum);
        o["roundNum"] = e.roundNum;
        o["attackerSteamID"] = e.attackerSteamID;
        o["victimSteamID"] = e.victimSteamID;
        o["attackerSide"] = to_string(e.attackerSide);
        o["victimSide"] = to_string(e.victimSide);
        put_vec(o, "attacker", e.attackerPos);
        put_vec(o, "victim", e.victimPos);
        put_view(o, "attacker", e.attackerView);
        put_view(o, "victim", e.victimView);
        o["flashDuration"] = e.flashDuration;
        flashes.push_back(std::move(o));
    }
    root["flashes"] = std::move(flashes);

    ojson grenades = ojson::array();
    for (const auto& e : m.grenades) {
        ojson o;
        o["roundNum"] = e.roundNum;
        o["throwerSteamID"] = e.throwerSteamID;
        o["throwerSide"] = to_string(e.throwerSide);
        put_vec(o, "thrower", e.throwerPos);
        put_view(o, "thrower", e.throwerView);
        o["grenadeType"] = to_string(e.grenadeType);
        put_vec(o, "grenade", e.grenadePos);
        o["throwTick"] = e.throwTick;
        o["destroyTick"] = e.destroyTick;
        o["throwSeconds"] = round_seconds(m, e.throwTick, e.roundNum);
        o["destroySeconds"] = round_seconds(m, e.destroyTick, e.roundNum);
        grenades.push_back(std::move(o));
    }
    root["grenades"] = std::move(grenades);

    ojson frames = ojson::array();
    for (const auto& f : m.frames) {
        ojson ps = ojson::array();
        for (const auto& p : f.players) {
            ojson o;
            o["steamID"] = p.steamId;
            o["side"] = to_string(p.side);
            o["x"] = p.pos.x;
            o["y"] = p.pos.y;
            o["z"] = p.pos.z;
            o["viewX"] = p.view.x;
            o["viewY"] = p.view.y;
            put_vec(o, "velocity", p.velocity);
            o["isAlive"] = p.isAlive;
            o["isBlinded"] = p.isBlinded;
            o["isDucking"] = p.isDucking;
            o["isScoped"] = p.isScoped;
            o["isWalking"] = p.isWalking;
            o["isReloading"] = p.isReloading;
            o["isDefusing"] = p.isDefusing;
            o["isPlanting"] = p.isPlanting;
            o["isInBombZone"] = p.isInBombZone;
            o["isAirborne"] = p.isAirborne;
            o["isStanding"] = p.isStanding;
            o["isDuckingInProgress"] = p.isDuckingInProgress;
            o["isUnDuckingInProgress"] = p.isUnDuckingInProgress;
            o["isolationDegree"] = p.isolationDegree;
            ps.push_back(std::move(o));
        }
        frames.push_back({{"tick", f.tick}, {"players", std::move(ps)}});
    }
    root["frames"] = std::move(frames);

    ojson economy = ojson::array();
    for (const auto& e : m.economy)
        economy.push_back({{"roundNum", e.roundNum},
                           {"steamID", e.steamId},
                           {"equipmentValueFreezetimeEnd", e.equipmentValueFreezetimeEnd},
                           {"equipmentValueRoundStart", e.equipmentValueRoundStart},
                           {"cash", e.cash},
                           {"cashSpendTotal", e.cashSpendTotal}});
    root["economy"] = std::move(economy);

    return root.dump(indent);
}

LabelSet parse_labels_json(std::string_view bytes) {
    json root;
    try {
        root = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("$: invalid JSON: ") + e.what());
    }
    require_object(root, "$");
    LabelSet out;
    out.matchId = get_string(root, "matchId", "");
    out.labels = read_list<PlayerLabel>(root, "labels", [](const json& o, const std::string& p) {
        PlayerLabel l;
        l.steamId = get_string(o, "steamId", p);
        l.cheater = get_bool(o, "cheater", p);
        const std::string type = get_string(o, "cheatType", p);
        auto c = cheat_type_from_string(type);
        if (!c) throw SchemaError(child(p, "cheatType") + ": unknown cheat type '" + type + "'");
        l.cheatType = *c;
        l.banDateUtc = get_opt_string(o, "banDateUtc", p);
        if (l.banDateUtc) parse_utc(*l.banDateUtc);
        if ((l.cheatType == CheatType::None) == l.cheater)
            throw ConsistencyError(p + ".cheatType: must be none exactly when cheater is false");
        return l;
    });
    return out;
}

std::string serialize_labels(const LabelSet& labels, int indent) {
    ojson root;
    root["matchId"] = labels.matchId;
    ojson arr = ojson::array();
    for (const auto& l : labels.labels) {
        ojson o;
        o["steamId"] = l.steamId;
        o["cheater"] = l.cheater;
        o["cheatType"] = to_string(l.cheatType);
        if (l.banDateUtc) o["banDateUtc"] = *l.banDateUtc;
        arr.push_back(std::move(o));
    }
    root["labels"] = std::move(arr);
    return root.dump(indent);
}

} // namespace hawk::replay
