#pragma once

// Canonical in-memory form of one parsed replay. Field names follow the
// awpy-style JSON the ingestion layer reads (attackerSteamID, hpDamageTaken,
// equipmentValueFreezetimeEnd, ...).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hawk::replay {

using Tick = std::int64_t;

enum class Side { T, CT };

std::string_view to_string(Side s);
std::optional<Side> side_from_string(std::string_view s);

// The nine body regions a damage event can land on.
enum class HitGroup { Generic, Head, Chest, Stomach, LeftArm, RightArm, LeftLeg, RightLeg, Neck };
inline constexpr int kHitGroupCount = 9;

std::string_view to_string(HitGroup g);
std::optional<HitGroup> hit_group_from_string(std::string_view s);

enum class GrenadeType { HE, Incendiary, Smoke, Flash, Decoy };
inline constexpr int kGrenadeTypeCount = 5;

std::string_view to_string(GrenadeType g);
std::optional<GrenadeType> grenade_type_from_string(std::string_view s);

struct Vec3 {
    double x = 0, y = 0, z = 0;
    bool operator==(const Vec3&) const = default;
};

// View direction: x is yaw in [0, 360), y is pitch in [-90, 90].
struct View {
    double x = 0, y = 0;
    bool operator==(const View&) const = default;
};

View normalize_view(View v);

struct PlayerRef {
    std::string steamId;
    Side side = Side::T;
    bool operator==(const PlayerRef&) const = default;
};

struct RoundRecord {
    int roundNum = 0;
    Tick startTick = 0;
    Tick freezeTimeEndTick = 0;
    Tick endTick = 0;
    Side winnerSide = Side::T;
    bool operator==(const RoundRecord&) const = default;
};

struct DamageEvent {
    Tick tick = 0;
    int roundNum = 0;
    std::string attackerSteamID, victimSteamID;
    Side attackerSide = Side::T, victimSide = Side::CT;
    Vec3 attackerPos, victimPos;
    View attackerView, victimView;
    bool attackerStrafe = false;
    std::string weapon;
    std::string weaponClass;
    int hpDamage = 0, hpDamageTaken = 0;
    int armorDamage = 0, armorDamageTaken = 0;
    HitGroup hitGroup = HitGroup::Generic;
    bool isFriendlyFire = false;
    double distance = 0;
    int zoomLevel = 0;
    bool operator==(const DamageEvent&) const = default;
};

struct KillEvent {
    Tick tick = 0;
    int roundNum = 0;
    std::string attackerSteamID, victimSteamID;
    Side attackerSide = Side::T, victimSide = Side::CT;
    Vec3 attackerPos, victimPos;
    View attackerView, victimView;
    std::optional<std::string> assisterSteamID;
    std::optional<Side> assisterSide;
    bool isSuicide = false;
    bool isTeamkill = false;
    bool isWallbang = false;
    int penetratedObjects = 0;
    bool isFirstKill = false;
    bool isHeadshot = false;
    bool victimBlinded = false;
    bool attackerBlinded = false;
    std::optional<std::string> flashThrowerSteamID;
    std::optional<Side> flashThrowerSide;
    bool noScope = false;
    bool thruSmoke = false;
    bool isTrade = false;
    double distance = 0;
    std::string weapon;
    std::string weaponClass;
    bool operator==(const KillEvent&) const = default;
};

struct WeaponFireEvent {
    Tick tick = 0;
    int roundNum = 0;
    std::string playerSteamID;
    Side playerSide = Side::T;
    Vec3 playerPos;
    View playerView;
    bool playerStrafe = false;
    std::string weapon;
    std::string weaponClass;
    int zoomLevel = 0;
    int ammoInMagazine = 0;
    int ammoInReserve = 0;
    bool operator==(const WeaponFireEvent&) const = default;
};

// One blinding: `attacker` threw the flash, `victim` was blinded.
struct FlashEvent {
    Tick tick = 0;
    int roundNum = 0;
    std::string attackerSteamID, victimSteamID;
    Side attackerSide = Side::T, victimSide = Side::T;
    Vec3 attackerPos, victimPos;
    View attackerView, victimView;
    double flashDuration = 0; // seconds
    bool operator==(const FlashEvent&) const = default;
};

struct GrenadeEvent {
    int roundNum = 0;
    std::string throwerSteamID;
    Side throwerSide = Side::T;
    Vec3 throwerPos;
    View throwerView;
    GrenadeType grenadeType = GrenadeType::HE;
    Vec3 grenadePos;
    Tick throwTick = 0;
    Tick destroyTick = 0;
    bool operator==(const GrenadeEvent&) const = default;
};

struct PlayerFrame {
    std::string steamId;
    Side side = Side::T;
    Vec3 pos;
    View view;
    Vec3 velocity;
    bool isAlive = true;
    bool isBlinded = false;
    bool isDucking = false;
    bool isScoped = false;
    bool isWalking = false;
    bool isReloading = false;
    bool isDefusing = false;
    bool isPlanting = false;
    bool isInBombZone = false;
    bool isAirborne = false;
    bool isStanding = true;
    bool isDuckingInProgress = false;
    bool isUnDuckingInProgress = false;
    double isolationDegree = 0;
    bool operator==(const PlayerFrame&) const = default;
};

struct MovementFrame {
    Tick tick = 0;
    std::vector<PlayerFrame> players;
    bool operator==(const MovementFrame&) const = default;
};

struct EconomyRecord {
    int roundNum = 0;
    std::string steamId;
    double equipmentValueFreezetimeEnd = 0;
    double equipmentValueRoundStart = 0;
    double cash = 0;
    double cashSpendTotal = 0;
    bool operator==(const EconomyRecord&) const = default;
};

struct MatchRecord {
    std::string matchId;
    std::string mapName;
    double tickRate = 128;
    std::string dateUtc; // ISO-8601, e.g. 2024-03-01T18:00:00Z
    std::vector<PlayerRef> players;
    std::vector<RoundRecord> rounds;
    std::vector<DamageEvent> damages;
    std::vector<KillEvent> kills;
    std::vector<WeaponFireEvent> weaponFires;
    std::vector<FlashEvent> flashes;
    std::vector<GrenadeEvent> grenades;
    std::vector<MovementFrame> frames;
    std::vector<EconomyRecord> economy;

    bool operator==(const MatchRecord&) const = default;

    const PlayerRef* find_player(std::string_view steamId) const;
    // Round with the given 1-based number, or nullptr.
    const RoundRecord* round(int roundNum) const;
    // Round whose [startTick, endTick] contains `tick`, or nullptr.
    const RoundRecord* round_at(Tick tick) const;
    double seconds(Tick tick) const { return static_cast<double>(tick) / tickRate; }
};

enum class CheatType { None, Aimbot, Wallhack };

std::string_view to_string(CheatType c);
std::optional<CheatType> cheat_type_from_string(std::string_view s);

struct PlayerLabel {
    std::string steamId;
    bool cheater = false;
    CheatType cheatType = CheatType::None;
    std::optional<std::string> banDateUtc;
    bool operator==(const PlayerLabel&) const = default;
};

struct LabelSet {
    std::string matchId;
    std::vector<PlayerLabel> labels;
    bool operator==(const LabelSet&) const = default;

    const PlayerLabel* find(std::string_view steamId) const;
};

// Seconds since the Unix epoch for an ISO-8601 UTC timestamp
// (YYYY-MM-DDTHH:MM:SS[.fff]Z). Throws SchemaError on malformed input.
std::int64_t parse_utc(std::string_view iso);
std::string format_utc(std::int64_t epochSeconds);

} // namespace hawk::replay
