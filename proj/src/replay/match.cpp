#include "hawk/replay/match.hpp"

#include "hawk/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hawk::replay {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == s) return static_cast<E>(i);
    return std::nullopt;
}

constexpr std::array<std::string_view, 2> kSideNames{"T", "CT"};
constexpr std::array<std::string_view, kHitGroupCount> kHitGroupNames{
    "Generic", "Head", "Chest", "Stomach", "LeftArm", "RightArm", "LeftLeg", "RightLeg", "Neck"};
constexpr std::array<std::string_view, kGrenadeTypeCount> kGrenadeNames{
    "HE Grenade", "Incendiary Grenade", "Smoke Grenade", "Flashbang", "Decoy Grenade"};
constexpr std::array<std::string_view, 3> kCheatNames{"none", "aimbot", "wallhack"};

// Days from 1970-01-01 to y-m-d (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

} // namespace

std::string_view to_string(Side s) { return kSideNames[static_cast<std::size_t>(s)]; }
std::optional<Side> side_from_string(std::string_view s) { return lookup<Side>(kSideNames, s); }

std::string_view to_string(HitGroup g) { return kHitGroupNames[static_cast<std::size_t>(g)]; }
std::optional<HitGroup> hit_group_from_string(std::string_view s) {
    return lookup<HitGroup>(kHitGroupNames, s);
}

std::string_view to_string(GrenadeType g) { return kGrenadeNames[static_cast<std::size_t>(g)]; }
std::optional<GrenadeType> grenade_type_from_string(std::string_view s) {
    if (s == "Molotov") return GrenadeType::Incendiary;
    return lookup<GrenadeType>(kGrenadeNames, s);
}

std::string_view to_string(CheatType c) { return kCheatNames[static_cast<std::size_t>(c)]; }
std::optional<CheatType> cheat_type_from_string(std::string_view s) {
    return lookup<CheatType>(kCheatNames, s);
}

View normalize_view(View v) {
    double yaw = std::fmod(v.x, 360.0);
    if (yaw < 0) yaw += 360.0;
    if (yaw >= 360.0) yaw = 0.0; // fmod of a tiny negative can round up to 360
    return {yaw, std::clamp(v.y, -90.0, 90.0)};
}

const PlayerRef* MatchRecord::find_player(std::string_view steamId) const {
    auto it = std::find_if(players.begin(), players.end(),
                           [&](const PlayerRef& p) { return p.steamId == steamId; });
    return it == players.end() ? nullptr : &*it;
}

const RoundRecord* MatchRecord::round(int roundNum) const {
    if (roundNum < 1 || roundNum > static_cast<int>(rounds.size())) return nullptr;
    const RoundRecord& r = rounds[static_cast<std::size_t>(roundNum - 1)];
    return r.roundNum == roundNum ? &r : nullptr;
}

const RoundRecord* MatchRecord::round_at(Tick tick) const {
    for (const auto& r : rounds)
        if (tick >= r.startTick && tick <= r.endTick) return &r;
    return nullptr;
}

const PlayerLabel* LabelSet::find(std::string_view steamId) const {
    auto it = std::find_if(labels.begin(), labels.end(),
                           [&](const PlayerLabel& l) { return l.steamId == steamId; });
    return it == labels.end() ? nullptr : &*it;
}

std::int64_t parse_utc(std::string_view iso) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0, consumed = 0;
    const std::string buf(iso);
    if (std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s, &consumed) != 6)
        throw SchemaError("malformed UTC timestamp '" + buf + "'");
    std::string_view rest = iso.substr(static_cast<std::size_t>(consumed));
    if (!rest.empty() && rest.front() == '.') {
        rest.remove_prefix(1);
        while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') rest.remove_prefix(1);
    }
    if (rest != "Z" || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60)
        throw SchemaError("malformed UTC timestamp '" + buf + "'");
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 + h * 3600 +
           mi * 60 + s;
}

std::string format_utc(std::int64_t epochSeconds) {
    std::int64_t days = epochSeconds / 86400;
    std::int64_t rem = epochSeconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t y = 0;
    unsigned m = 0, d = 0;
    civil_from_days(days, y, m, d);
    char out[32];
    std::snprintf(out, sizeof out, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(y), m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return out;
}

} // namespace hawk::replay
