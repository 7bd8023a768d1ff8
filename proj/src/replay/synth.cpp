#include "hawk/replay/synth.hpp"

#include "hawk/error.hpp"
#include "hawk/replay/json_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace hawk::replay {

std::string_view to_string(ProfileKind k) {
    switch (k) {
    case ProfileKind::Honest: return "honest";
    case ProfileKind::Aimbot: return "aimbot";
    case ProfileKind::Wallhack: return "wallhack";
    case ProfileKind::BoostingLike: return "boosting-like";
    }
    return "honest";
}

std::optional<ProfileKind> profile_kind_from_string(std::string_view s) {
    for (auto k : {ProfileKind::Honest, ProfileKind::Aimbot, ProfileKind::Wallhack, ProfileKind::BoostingLike})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

namespace {

constexpr double kPi = std::numbers::pi;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng_); }
    double normal(double mean, double sigma) {
        if (sigma <= 0) return mean;
        return std::normal_distribution<double>(mean, sigma)(eng_);
    }
    bool chance(double p) { return uniform(0.0, 1.0) < p; }
    int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(eng_); }
    int poisson(double mean) { return mean <= 0 ? 0 : std::poisson_distribution<int>(mean)(eng_); }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

// Resolved per-player behavior. Cheater shifts scale with strength = 1 - sophistication.
struct Behavior {
    double reactionMean = 0.42;
    double reactionSigma = 0.12;
    double hitProb = 0.28;
    double headshotBias = 0.22;
    double aimResidual = 4.0; // degrees of crosshair error on the first shot
    double wallbangRate = 0.03;
    double smokeKillRate = 0.02;
    double propsRate = 0.2; // fraction of the 5-prop allowance used per round
    double preAimRate = 0.08;
    double initiative = 1.0;
    double inertialRate = 0.55;
    double strafeRate = 0.35;
    double sprayRate = 0.3;
    double flashOpponentRate = 0.5;
    double flashAllyRate = 0.12;
};

void check_rate(std::optional<double> v, const char* name) {
    if (v && (*v < 0 || *v > 1)) throw ConfigError(std::string("profile.") + name + ": must lie in [0,1]");
}

Behavior resolve(const CheatProfile& p) {
    if (p.sophistication < 0 || p.sophistication > 1)
        throw ConfigError("profile.sophistication: must lie in [0,1]");
    check_rate(p.overrides.headshotBias, "headshotBias");
    check_rate(p.overrides.wallbangRate, "wallbangRate");
    check_rate(p.overrides.propsRate, "propsRate");
    check_rate(p.overrides.preAimRate, "preAimRate");
    if (p.overrides.reactionMean && *p.overrides.reactionMean <= 0)
        throw ConfigError("profile.reactionMean: must be positive");
    if (p.overrides.reactionSigma && *p.overrides.reactionSigma < 0)
        throw ConfigError("profile.reactionSigma: must be non-negative");

    Behavior b;
    const double k = 1.0 - p.sophistication;
    switch (p.kind) {
    case ProfileKind::Honest: break;
    case ProfileKind::Aimbot:
        // Firing follows engagement almost immediately and lands on the head.
        b.reactionMean -= 0.27 * k;
        b.reactionSigma -= 0.07 * k;
        b.hitProb += 0.45 * k;
        b.headshotBias += 0.6 * k;
        b.aimResidual -= 3.5 * k;
        b.inertialRate -= 0.45 * k;
        b.propsRate *= 1.0 - 0.6 * k;
        b.initiative += 0.5 * k;
        b.sprayRate *= 1.0 - 0.7 * k;
        b.flashOpponentRate *= 1.0 - 0.4 * k;
        break;
    case ProfileKind::Wallhack:
        // Guards the exact spot just before the opponent appears and shoots
        // through occluders.
        b.preAimRate += 0.8 * k;
        b.reactionMean -= 0.12 * k;
        b.wallbangRate += 0.3 * k;
        b.smokeKillRate += 0.25 * k;
        b.initiative += 2.5 * k;
        b.hitProb += 0.12 * k;
        b.headshotBias += 0.1 * k;
        b.propsRate *= 1.0 - 0.6 * k;
        b.sprayRate *= 1.0 - 0.7 * k;
        b.flashOpponentRate *= 1.0 - 0.4 * k;
        break;
    case ProfileKind::BoostingLike:
        // Strong mechanics with weak game sense.
        b.hitProb += 0.2;
        b.headshotBias += 0.2;
        b.reactionMean -= 0.08;
        b.propsRate = 0.06;
        b.flashOpponentRate = 0.2;
        b.flashAllyRate = 0.35;
        break;
    }
    const auto& o = p.overrides;
    if (o.reactionMean) b.reactionMean = *o.reactionMean;
    if (o.reactionSigma) b.reactionSigma = *o.reactionSigma;
    if (o.headshotBias) b.headshotBias = *o.headshotBias;
    if (o.wallbangRate) b.wallbangRate = *o.wallbangRate;
    if (o.propsRate) b.propsRate = *o.propsRate;
    if (o.preAimRate) b.preAimRate = *o.preAimRate;
    b.hitProb = std::clamp(b.hitProb, 0.02, 0.95);
    b.headshotBias = std::clamp(b.headshotBias, 0.0, 0.95);
    b.aimResidual = std::max(b.aimResidual, 0.2);
    b.inertialRate = std::clamp(b.inertialRate, 0.0, 1.0);
    return b;
}

enum class WeaponClass { Pistol, Smg, Rifle, Sniper };

struct WeaponSpec {
    const char* nameT;
    const char* nameCT;
    const char* cls;
    double interval; // seconds between shots
    int magazine;
    int price;
    std::array<int, kHitGroupCount> damage; // indexed by HitGroup
};

// Generic, Head, Chest, Stomach, LeftArm, RightArm, LeftLeg, RightLeg, Neck
constexpr WeaponSpec kPistol{"Glock-18", "USP-S", "pistol", 0.15, 20, 200, {20, 100, 24, 30, 18, 18, 15, 15, 60}};
constexpr WeaponSpec kSmg{"MAC-10", "MP9", "smg", 0.08, 30, 1250, {24, 100, 26, 32, 20, 20, 16, 16, 80}};
constexpr WeaponSpec kRifle{"AK-47", "M4A4", "rifle", 0.1, 30, 2900, {30, 140, 33, 40, 27, 27, 21, 21, 110}};
constexpr WeaponSpec kSniper{"AWP", "AWP", "sniper", 1.25, 10, 4750, {100, 400, 115, 140, 90, 90, 85, 85, 200}};

const WeaponSpec& weapon_spec(WeaponClass c) {
    switch (c) {
    case WeaponClass::Pistol: return kPistol;
    case WeaponClass::Smg: return kSmg;
    case WeaponClass::Rifle: return kRifle;
    case WeaponClass::Sniper: return kSniper;
    }
    return kRifle;
}

// Emitted values are rounded to a fixed grid so the JSON stays compact and
// exactly round-trips.
double quant(double v, double step = 0.01) { return std::round(v / step) * step; }
Vec3 quant(const Vec3& p) { return {quant(p.x), quant(p.y), quant(p.z)}; }

double wrap_yaw(double yaw) {
    double y = std::fmod(yaw, 360.0);
    return y < 0 ? y + 360.0 : y;
}

View direction(const Vec3& from, const Vec3& to) {
    const double dx = to.x - from.x, dy = to.y - from.y, dz = to.z - from.z;
    const double yaw = std::atan2(dy, dx) * 180.0 / kPi;
    const double pitch = std::atan2(dz, std::hypot(dx, dy)) * 180.0 / kPi;
    return {wrap_yaw(yaw), pitch};
}

double distance(const Vec3& a, const Vec3& b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

struct Region {
    double x0, x1, y0, y1;
};
constexpr Region kTRegion{100, 800, 300, 1300};
constexpr Region kCTRegion{1000, 1700, 300, 1300};
constexpr Region kMidRegion{800, 1000, 400, 1200};

// Simulates one round. Event lists are appended to the match in tick order
// per list; frames and economy are appended at the end of the round.
class RoundSimulator {
public:
    RoundSimulator(MatchRecord& m, const std::vector<Behavior>& behaviors, const SynthConfig& cfg, Rng& rng)
        : m_(m), beh_(behaviors), cfg_(cfg), rng_(rng), n_(static_cast<int>(m.players.size())) {}

    void run(int roundNum, Tick startTick, std::vector<double>& cash, std::vector<double>& carriedEquipment,
             std::vector<int>& prevKills);

private:
    struct Key {
        Tick tick;
        View view;
    };

    Tick to_ticks(double seconds) const { return static_cast<Tick>(std::llround(seconds * cfg_.tickRate)); }
    bool alive(int p, Tick t) const { return deathTick_[static_cast<std::size_t>(p)] > t; }
    bool blinded(int p, Tick t) const {
        for (const auto& [from, to] : blind_[static_cast<std::size_t>(p)])
            if (t >= from && t <= to) return true;
        return false;
    }
    Vec3 pos_at(int p, Tick t) const {
        const auto& traj = traj_[static_cast<std::size_t>(p)];
        const Tick clamped = std::min(t, deathTick_[static_cast<std::size_t>(p)]);
        auto idx = static_cast<std::size_t>(std::max<Tick>(0, (clamped - start_) / cfg_.frameStride));
        return traj[std::min(idx, traj.size() - 1)];
    }
    View view_at(int p, Tick t) const {
        const auto& keys = keys_[static_cast<std::size_t>(p)];
        View v = keys.front().view;
        for (const auto& k : keys) {
            if (k.tick > t) break;
            v = k.view;
        }
        return v;
    }
    Side side(int p) const { return m_.players[static_cast<std::size_t>(p)].side; }
    const std::string& id(int p) const { return m_.players[static_cast<std::size_t>(p)].steamId; }
    Tick frame_ceil(Tick t) const {
        const Tick rel = t - start_;
        const Tick k = (rel + cfg_.frameStride - 1) / cfg_.frameStride;
        return start_ + k * cfg_.frameStride;
    }
    View key(int p, Tick t, View v) {
        const View q = normalize_view({quant(v.x, 0.001), quant(v.y, 0.001)});
        keys_[static_cast<std::size_t>(p)].push_back({t, q});
        return q;
    }
    View offset(View v, double yaw, double pitch) const { return {v.x + yaw, std::clamp(v.y + pitch, -89.0, 89.0)}; }

    void build_trajectories(Tick horizon);
    void schedule_grenades(Tick activeEnd);
    void process_grenades_until(Tick t);
    Tick shoot(int shooter, int target, Tick tick, bool first, bool aimed);
    Tick duel(int attacker, int victim, Tick t0);
    void spray(int p, Tick t, Tick until);
    void emit_frames();

    MatchRecord& m_;
    const std::vector<Behavior>& beh_;
    const SynthConfig& cfg_;
    Rng& rng_;
    int n_;

    int roundNum_ = 0;
    Tick start_ = 0, freezeEnd_ = 0, activeEnd_ = 0, end_ = 0, lastEvent_ = 0;
    bool firstKillDone_ = false;
    std::vector<std::vector<Vec3>> traj_;
    std::vector<std::vector<Key>> keys_;
    std::vector<View> defaultView_;
    std::vector<Tick> deathTick_;
    std::vector<int> health_, armor_, mag_, reserve_, kills_;
    std::vector<Tick> reloadUntil_;
    std::vector<std::vector<std::pair<Tick, Tick>>> blind_, reloads_;
    std::vector<WeaponClass> weapon_;
    std::vector<std::pair<int, Tick>> lastKillBy_; // victim's killer's teammate tracking: (killer, tick)
    std::vector<int> damagedBy_;                   // last other player who damaged p this round
    struct PendingGrenade {
        Tick tick;
        int thrower;
        GrenadeType type;
    };
    std::vector<PendingGrenade> pending_;
    std::size_t nextGrenade_ = 0;
};

void RoundSimulator::build_trajectories(Tick horizon) {
    const std::size_t frames = static_cast<std::size_t>((horizon - start_) / cfg_.frameStride + 1);
    const double dt = cfg_.frameStride / cfg_.tickRate;
    traj_.assign(static_cast<std::size_t>(n_), {});
    for (int p = 0; p < n_; ++p) {
        const Region& r = side(p) == Side::T ? kTRegion : kCTRegion;
        Vec3 pos{rng_.uniform(r.x0, r.x1), rng_.uniform(r.y0, r.y1), rng_.uniform(0, 64)};
        double heading = rng_.uniform(0, 2 * kPi);
        double speed = rng_.uniform(80, 240);
        auto& traj = traj_[static_cast<std::size_t>(p)];
        traj.reserve(frames);
        for (std::size_t f = 0; f < frames; ++f) {
            pos = quant(pos);
            traj.push_back(pos);
            const Tick t = start_ + static_cast<Tick>(f) * cfg_.frameStride;
            if (t < freezeEnd_) continue;
            if (rng_.chance(0.08)) {
                heading = rng_.uniform(0, 2 * kPi);
                speed = rng_.uniform(0, 250);
            }
            pos.x += std::cos(heading) * speed * dt;
            pos.y += std::sin(heading) * speed * dt;
            if (pos.x < r.x0 || pos.x > r.x1) {
                heading = kPi - heading;
                pos.x = std::clamp(pos.x, r.x0, r.x1);
            }
            if (pos.y < r.y0 || pos.y > r.y1) {
                heading = -heading;
                pos.y = std::clamp(pos.y, r.y0, r.y1);
            }
        }
    }
}

void RoundSimulator::schedule_grenades(Tick activeEnd) {
    pending_.clear();
    nextGrenade_ = 0;
    for (int p = 0; p < n_; ++p) {
        const int count = std::min(4, rng_.poisson(5.0 * beh_[static_cast<std::size_t>(p)].propsRate));
        for (int i = 0; i < count; ++i) {
            const Tick t = freezeEnd_ + to_ticks(rng_.uniform(0.5, 0.7 * cfg_.maxActiveSeconds));
            const auto type = static_cast<GrenadeType>(rng_.below(4)); // HE, Incendiary, Smoke, Flash
            pending_.push_back({std::min(t, activeEnd), p, type});
        }
    }
    std::stable_sort(pending_.begin(), pending_.end(),
                     [](const PendingGrenade& a, const PendingGrenade& b) { return a.tick < b.tick; });
}

void RoundSimulator::process_grenades_until(Tick t) {
    while (nextGrenade_ < pending_.size() && pending_[nextGrenade_].tick <= t) {
        const PendingGrenade g = pending_[nextGrenade_++];
        if (!alive(g.thrower, g.tick)) continue;
        GrenadeEvent e;
        e.roundNum = roundNum_;
        e.throwerSteamID = id(g.thrower);
        e.throwerSide = side(g.thrower);
        e.throwerPos = pos_at(g.thrower, g.tick);
        e.throwerView = view_at(g.thrower, g.tick);
        e.grenadeType = g.type;
        e.grenadePos = Vec3{rng_.uniform(kMidRegion.x0, kMidRegion.x1), rng_.uniform(kMidRegion.y0, kMidRegion.y1),
                        rng_.uniform(0, 32)};
        e.grenadePos = quant(e.grenadePos);
        e.throwTick = g.tick;
        double life = 1.6;
        if (g.type == GrenadeType::Incendiary) life = 7.0;
        if (g.type == GrenadeType::Smoke) life = 18.0;
        e.destroyTick = g.tick + to_ticks(life);
        m_.grenades.push_back(e);
        lastEvent_ = std::max(lastEvent_, g.tick);

        if (g.type != GrenadeType::Flash) continue;
        const Tick pop = g.tick + to_ticks(1.6);
        const Behavior& b = beh_[static_cast<std::size_t>(g.thrower)];
        for (int v = 0; v < n_; ++v) {
            if (!alive(v, pop)) continue;
            const bool opponent = side(v) != side(g.thrower);
            const double p = opponent ? b.flashOpponentRate : (v == g.thrower ? 0.08 : b.flashAllyRate);
            if (!rng_.chance(p)) continue;
            const double dur = quant(opponent ? rng_.uniform(0.8, 3.5) : rng_.uniform(0.4, 2.5), 0.001);
            FlashEvent f;
            f.tick = pop;
            f.roundNum = roundNum_;
            f.attackerSteamID = id(g.thrower);
            f.victimSteamID = id(v);
            f.attackerSide = side(g.thrower);
            f.victimSide = side(v);
            f.attackerPos = pos_at(g.thrower, pop);
            f.victimPos = pos_at(v, pop);
            f.attackerView = view_at(g.thrower, pop);
            f.victimView = view_at(v, pop);
            f.flashDuration = dur;
            m_.flashes.push_back(f);
            blind_[static_cast<std::size_t>(v)].push_back({pop, pop + to_ticks(dur)});
        }
    }
}

// Fires one shot; returns the tick of the shooter's next possible shot, or
// -1 when the target died.
Tick RoundSimulator::shoot(int s, int target, Tick tick, bool first, bool aimed) {
    const auto su = static_cast<std::size_t>(s);
    const Behavior& b = beh_[su];
    const WeaponSpec& w = weapon_spec(weapon_[su]);
    const Vec3 from = pos_at(s, tick), to = pos_at(target, tick);
    const View dir = direction(from, to);
    View v = dir;
    if (aimed) {
        const double residual = first ? b.aimResidual : b.aimResidual * 0.5;
        v = offset(dir, rng_.normal(0, residual), rng_.normal(0, residual * 0.4));
    } else {
        v = offset(defaultView_[su], rng_.normal(0, 3), rng_.normal(0, 2));
    }
    v = key(s, tick, v);
    const bool strafe = rng_.chance(b.strafeRate);
    mag_[su] -= 1;

    WeaponFireEvent fe;
    fe.tick = tick;
    fe.roundNum = roundNum_;
    fe.playerSteamID = id(s);
    fe.playerSide = side(s);
    fe.playerPos = from;
    fe.playerView = v;
    fe.playerStrafe = strafe;
    fe.weapon = side(s) == Side::T ? w.nameT : w.nameCT;
    fe.weaponClass = w.cls;
    fe.zoomLevel = weapon_[su] == WeaponClass::Sniper ? 1 : 0;
    fe.ammoInMagazine = mag_[su];
    fe.ammoInReserve = reserve_[su];
    m_.weaponFires.push_back(fe);
    lastEvent_ = std::max(lastEvent_, tick);

    Tick next = tick + std::max<Tick>(1, to_ticks(w.interval));
    if (mag_[su] == 0) {
        const int refill = std::min(w.magazine, reserve_[su]);
        if (refill > 0) {
            reloads_[su].push_back({tick + 1, tick + to_ticks(2.5)});
            next = tick + to_ticks(2.5);
            mag_[su] = refill;
            reserve_[su] -= refill;
        } else {
            next = tick + to_ticks(60); // dry
        }
    }
    if (!aimed) return next;

    double hit = b.hitProb * (first ? 0.85 : 1.0);
    if (blinded(s, tick)) hit *= 0.35;
    if (!rng_.chance(hit)) return next;

    HitGroup group = HitGroup::Head;
    if (!rng_.chance(b.headshotBias)) {
        const double u = rng_.uniform(0, 1);
        group = u < 0.45   ? HitGroup::Chest
                : u < 0.65 ? HitGroup::Stomach
                : u < 0.72 ? HitGroup::LeftArm
                : u < 0.79 ? HitGroup::RightArm
                : u < 0.86 ? HitGroup::LeftLeg
                : u < 0.93 ? HitGroup::RightLeg
                : u < 0.96 ? HitGroup::Neck
                           : HitGroup::Generic;
    }
    const auto tu = static_cast<std::size_t>(target);
    const int dmg = w.damage[static_cast<std::size_t>(group)];
    const int taken = std::min(dmg, health_[tu]);
    const bool legs = group == HitGroup::LeftLeg || group == HitGroup::RightLeg;
    const int armorDmg = legs ? 0 : dmg / 5;
    const int armorTaken = std::min(armorDmg, armor_[tu]);
    health_[tu] -= taken;
    armor_[tu] -= armorTaken;
    damagedBy_[tu] = s;

    DamageEvent de;
    de.tick = tick;
    de.roundNum = roundNum_;
    de.attackerSteamID = id(s);
    de.victimSteamID = id(target);
    de.attackerSide = side(s);
    de.victimSide = side(target);
    de.attackerPos = from;
    de.victimPos = to;
    de.attackerView = v;
    de.victimView = view_at(target, tick);
    de.attackerStrafe = strafe;
    de.weapon = fe.weapon;
    de.weaponClass = w.cls;
    de.hpDamage = dmg;
    de.hpDamageTaken = taken;
    de.armorDamage = armorDmg;
    de.armorDamageTaken = armorTaken;
    de.hitGroup = group;
    de.isFriendlyFire = false;
    de.distance = quant(distance(from, to));
    de.zoomLevel = fe.zoomLevel;
    m_.damages.push_back(de);

    if (health_[tu] > 0) return next;

    deathTick_[tu] = tick;
    KillEvent ke;
    ke.tick = tick;
    ke.roundNum = roundNum_;
    ke.attackerSteamID = id(s);
    ke.victimSteamID = id(target);
    ke.attackerSide = side(s);
    ke.victimSide = side(target);
    ke.attackerPos = from;
    ke.victimPos = to;
    ke.attackerView = de.attackerView;
    ke.victimView = de.victimView;
    ke.isWallbang = rng_.chance(b.wallbangRate);
    if (ke.isWallbang) {
        const double u = rng_.uniform(0, 1);
        ke.penetratedObjects = u < 0.6 ? 1 : (u < 0.9 ? 2 : 3);
    }
    ke.thruSmoke = rng_.chance(b.smokeKillRate);
    ke.isFirstKill = !firstKillDone_;
    firstKillDone_ = true;
    ke.isHeadshot = group == HitGroup::Head;
    ke.attackerBlinded = blinded(s, tick);
    ke.victimBlinded = blinded(target, tick);
    if (ke.victimBlinded) {
        for (auto it = m_.flashes.rbegin(); it != m_.flashes.rend(); ++it) {
            if (it->roundNum == roundNum_ && it->victimSteamID == id(target) && it->tick <= tick) {
                ke.flashThrowerSteamID = it->attackerSteamID;
                ke.flashThrowerSide = it->attackerSide;
                break;
            }
        }
    }
    const int helper = damagedBy_[tu];
    (void)helper;
    for (int a = 0; a < n_; ++a) {
        if (a != s && side(a) == side(s) && a != target) {
            // An assist goes to a teammate who damaged the victim earlier this round.
            for (auto it = m_.damages.rbegin(); it != m_.damages.rend() && it->roundNum == roundNum_; ++it) {
                if (it->attackerSteamID == id(a) && it->victimSteamID == id(target)) {
                    ke.assisterSteamID = id(a);
                    ke.assisterSide = side(a);
                    break;
                }
            }
            if (ke.assisterSteamID) break;
        }
    }
    ke.noScope = weapon_[su] == WeaponClass::Sniper && rng_.chance(0.1);
    const auto& [prevKiller, prevTick] = lastKillBy_[tu];
    ke.isTrade = prevKiller >= 0 && tick - prevTick <= to_ticks(5.0);
    ke.distance = de.distance;
    ke.weapon = fe.weapon;
    ke.weaponClass = w.cls;
    m_.kills.push_back(ke);
    kills_[su] += 1;
    // Teammates of the victim can now trade the killer.
    lastKillBy_[su] = {target, tick};
    return -1;
}

Tick RoundSimulator::duel(int a, int v, Tick t0) {
    const auto au = static_cast<std::size_t>(a), vu = static_cast<std::size_t>(v);
    const Behavior& ba = beh_[au];
    const Behavior& bv = beh_[vu];

    // Attacker spots the victim at t0 (a frame tick) with the crosshair at
    // the edge of the field of view, or already on target when guarding.
    const View toVictim = direction(pos_at(a, t0), pos_at(v, t0));
    const double sign = rng_.chance(0.5) ? 1.0 : -1.0;
    if (rng_.chance(ba.preAimRate))
        key(a, t0, offset(toVictim, rng_.normal(0, 1.5), rng_.normal(0, 0.8)));
    else
        key(a, t0, offset(toVictim, sign * rng_.uniform(18, 40), rng_.uniform(-4, 4)));
    Tick aNext = t0 + std::max<Tick>(1, to_ticks(std::max(0.06, rng_.normal(ba.reactionMean, ba.reactionSigma))));

    const Tick vSpot = frame_ceil(t0 + to_ticks(rng_.uniform(0.15, 0.6)));
    Tick vNext = -1;
    if (alive(v, vSpot)) {
        const View toAttacker = direction(pos_at(v, vSpot), pos_at(a, vSpot));
        const double s2 = rng_.chance(0.5) ? 1.0 : -1.0;
        if (rng_.chance(bv.preAimRate))
            key(v, vSpot, offset(toAttacker, rng_.normal(0, 1.5), rng_.normal(0, 0.8)));
        else
            key(v, vSpot, offset(toAttacker, s2 * rng_.uniform(18, 40), rng_.uniform(-4, 4)));
        vNext = vSpot + std::max<Tick>(1, to_ticks(std::max(0.06, rng_.normal(bv.reactionMean, bv.reactionSigma))));
    }

    const Tick limit = std::min(t0 + to_ticks(5.0), activeEnd_);
    bool aFirst = true, vFirst = true;
    Tick endTick = t0;
    int aShots = 0, vShots = 0;
    while (true) {
        const bool aCan = aNext >= 0 && aShots < 10 && aNext <= limit;
        const bool vCan = vNext >= 0 && vShots < 10 && vNext <= limit;
        if (!aCan && !vCan) break;
        const bool aTurn = aCan && (!vCan || aNext <= vNext);
        if (aTurn) {
            endTick = aNext;
            const Tick next = shoot(a, v, aNext, aFirst, true);
            aFirst = false;
            ++aShots;
            if (next < 0) {
                if (rng_.chance(ba.inertialRate)) shoot(a, v, endTick + std::max<Tick>(1, to_ticks(rng_.uniform(0.03, 0.14))), false, false);
                break;
            }
            aNext = next;
        } else {
            endTick = vNext;
            const Tick next = shoot(v, a, vNext, vFirst, true);
            vFirst = false;
            ++vShots;
            if (next < 0) {
                if (rng_.chance(bv.inertialRate)) shoot(v, a, endTick + std::max<Tick>(1, to_ticks(rng_.uniform(0.03, 0.14))), false, false);
                break;
            }
            vNext = next;
        }
    }
    // Both survivors look away again once the exchange is over.
    const Tick back = frame_ceil(endTick + to_ticks(0.3));
    if (alive(a, back)) key(a, back, defaultView_[au]);
    if (alive(v, back)) key(v, back, defaultView_[vu]);
    return back;
}

// Unaimed fire that must finish before `until`.
void RoundSimulator::spray(int p, Tick t, Tick until) {
    const int shots = 1 + rng_.below(3);
    Tick tick = t;
    for (int i = 0; i < shots && tick < until; ++i) tick = shoot(p, p, tick, false, false);
    key(p, std::min(tick, until - 1), defaultView_[static_cast<std::size_t>(p)]);
}

void RoundSimulator::emit_frames() {
    const double dt = cfg_.frameStride / cfg_.tickRate;
    std::vector<bool> ducking(static_cast<std::size_t>(n_), false), walking(static_cast<std::size_t>(n_), false);
    for (Tick t = start_; t <= end_; t += cfg_.frameStride) {
        MovementFrame f;
        f.tick = t;
        const auto fi = static_cast<std::size_t>((t - start_) / cfg_.frameStride);
        for (int p = 0; p < n_; ++p) {
            const auto pu = static_cast<std::size_t>(p);
            PlayerFrame pf;
            pf.steamId = id(p);
            pf.side = side(p);
            pf.isAlive = alive(p, t);
            pf.pos = pos_at(p, t);
            pf.view = view_at(p, t);
            if (pf.isAlive && fi + 1 < traj_[pu].size() && t >= freezeEnd_) {
                const Vec3& nxt = traj_[pu][fi + 1];
                pf.velocity = quant(Vec3{(nxt.x - pf.pos.x) / dt, (nxt.y - pf.pos.y) / dt, 0});
            }
            if (rng_.chance(0.05)) ducking[pu] = !ducking[pu];
            if (rng_.chance(0.05)) walking[pu] = !walking[pu];
            pf.isBlinded = pf.isAlive && blinded(p, t);
            pf.isDucking = pf.isAlive && ducking[pu];
            pf.isStanding = pf.isAlive && !ducking[pu];
            pf.isWalking = pf.isAlive && walking[pu];
            pf.isScoped = pf.isAlive && weapon_[pu] == WeaponClass::Sniper && rng_.chance(0.3);
            for (const auto& [from, to] : reloads_[pu])
                if (t >= from && t <= to) pf.isReloading = pf.isAlive;
            pf.isAirborne = pf.isAlive && rng_.chance(0.02);
            pf.isDuckingInProgress = pf.isAlive && rng_.chance(0.01);
            pf.isInBombZone = pf.isAlive && pf.pos.x > 1400 && pf.pos.y < 700;
            if (pf.isAlive) {
                double cx = 0, cy = 0, cz = 0;
                int mates = 0;
                for (int q = 0; q < n_; ++q) {
                    if (q == p || side(q) != side(p) || !alive(q, t)) continue;
                    const Vec3 qp = pos_at(q, t);
                    cx += qp.x;
                    cy += qp.y;
                    cz += qp.z;
                    ++mates;
                }
                if (mates > 0) pf.isolationDegree = quant(distance(pf.pos, {cx / mates, cy / mates, cz / mates}));
            }
            f.players.push_back(std::move(pf));
        }
        m_.frames.push_back(std::move(f));
    }
}

void RoundSimulator::run(int roundNum, Tick startTick, std::vector<double>& cash,
                         std::vector<double>& carriedEquipment, std::vector<int>& prevKills) {
    const auto n = static_cast<std::size_t>(n_);
    roundNum_ = roundNum;
    start_ = startTick;
    freezeEnd_ = start_ + to_ticks(cfg_.freezeSeconds);
    const Tick activeEnd = freezeEnd_ + to_ticks(cfg_.maxActiveSeconds);
    activeEnd_ = activeEnd;
    lastEvent_ = freezeEnd_;
    firstKillDone_ = false;

    deathTick_.assign(n, std::numeric_limits<Tick>::max());
    health_.assign(n, 100);
    armor_.assign(n, 100);
    kills_.assign(n, 0);
    reloadUntil_.assign(n, 0);
    blind_.assign(n, {});
    reloads_.assign(n, {});
    lastKillBy_.assign(n, {-1, 0});
    damagedBy_.assign(n, -1);
    keys_.assign(n, {});
    defaultView_.assign(n, {});
    weapon_.assign(n, WeaponClass::Pistol);
    mag_.assign(n, 0);
    reserve_.assign(n, 0);

    // Buy phase.
    std::vector<double> spend(n, 0), equipStart(n, 0);
    for (std::size_t p = 0; p < n; ++p) {
        WeaponClass w = WeaponClass::Pistol;
        if (roundNum > 1) {
            const double u = rng_.uniform(0, 1);
            w = u < 0.55 ? WeaponClass::Rifle : u < 0.7 ? WeaponClass::Smg : u < 0.85 ? WeaponClass::Pistol
                                                                                      : WeaponClass::Sniper;
        }
        const double price = weapon_spec(w).price + (w == WeaponClass::Pistol ? 0.0 : 1000.0);
        if (cash[p] < price && w != WeaponClass::Pistol) w = WeaponClass::Pistol;
        weapon_[p] = w;
        equipStart[p] = carriedEquipment[p];
        spend[p] = std::min(cash[p], w == WeaponClass::Pistol ? 200.0 * rng_.below(3) : price);
        cash[p] -= spend[p];
        mag_[p] = weapon_spec(w).magazine;
        reserve_[p] = weapon_spec(w).magazine * 6;
        // Resting view faces the own half of the map, away from every opponent.
        const double yaw = side(static_cast<int>(p)) == Side::T ? 180.0 : 0.0;
        defaultView_[p] = {yaw + rng_.uniform(-30, 30), rng_.uniform(-3, 3)};
        key(static_cast<int>(p), start_, defaultView_[p]);
    }

    build_trajectories(activeEnd + to_ticks(10.0));
    schedule_grenades(activeEnd);

    Tick t = frame_ceil(freezeEnd_ + to_ticks(rng_.uniform(1.0, 3.0)));
    while (t < activeEnd) {
        process_grenades_until(t);
        std::vector<int> tAlive, ctAlive;
        for (int p = 0; p < n_; ++p)
            if (alive(p, t)) (side(p) == Side::T ? tAlive : ctAlive).push_back(p);
        if (tAlive.empty() || ctAlive.empty()) break;

        // Idle players occasionally spray at nothing.
        const Tick sprayAt = t - to_ticks(0.4);
        for (int p = 0; p < n_; ++p)
            if (sprayAt > lastEvent_ && alive(p, sprayAt) &&
                rng_.chance(beh_[static_cast<std::size_t>(p)].sprayRate * 0.15))
                spray(p, sprayAt, t);

        // Initiative: pick the attacker among everyone alive, weighted.
        double total = 0;
        for (int p : tAlive) total += beh_[static_cast<std::size_t>(p)].initiative;
        for (int p : ctAlive) total += beh_[static_cast<std::size_t>(p)].initiative;
        double u = rng_.uniform(0, total);
        int attacker = -1;
        for (const auto* team : {&tAlive, &ctAlive}) {
            for (int p : *team) {
                u -= beh_[static_cast<std::size_t>(p)].initiative;
                if (u <= 0 && attacker < 0) attacker = p;
            }
        }
        if (attacker < 0) attacker = ctAlive.back();
        const auto& foes = side(attacker) == Side::T ? ctAlive : tAlive;
        const int victim = foes[static_cast<std::size_t>(rng_.below(static_cast<int>(foes.size())))];
        const Tick back = duel(attacker, victim, t);
        t = frame_ceil(back + to_ticks(0.5 + std::exponential_distribution<double>(0.5)(rng_.engine())));
    }
    process_grenades_until(std::min(t, activeEnd));

    end_ = std::min(std::max(lastEvent_, freezeEnd_) + to_ticks(2.0), activeEnd + to_ticks(2.0));
    // Drop anything scheduled past the actual round end.
    std::erase_if(m_.flashes, [&](const FlashEvent& f) { return f.roundNum == roundNum_ && f.tick > end_; });
    std::erase_if(m_.grenades, [&](const GrenadeEvent& g) { return g.roundNum == roundNum_ && g.throwTick > end_; });
    std::erase_if(m_.weaponFires, [&](const WeaponFireEvent& e) { return e.roundNum == roundNum_ && e.tick > end_; });

    int tLeft = 0, ctLeft = 0;
    for (int p = 0; p < n_; ++p)
        if (alive(p, end_)) (side(p) == Side::T ? tLeft : ctLeft) += 1;
    const Side winner = tLeft > ctLeft ? Side::T : Side::CT;
    m_.rounds.push_back({roundNum_, start_, freezeEnd_, end_, winner});

    emit_frames();

    for (std::size_t p = 0; p < n; ++p) {
        const double freezeEndValue = equipStart[p] + spend[p];
        const bool survived = alive(static_cast<int>(p), end_);
        cash[p] = std::min(16000.0, cash[p] + (side(static_cast<int>(p)) == winner ? 3250.0 : 1900.0) +
                                        300.0 * kills_[p]);
        m_.economy.push_back({roundNum_, id(static_cast<int>(p)), freezeEndValue, equipStart[p], cash[p], spend[p]});
        carriedEquipment[p] = survived ? std::floor(freezeEndValue * 0.8) : 200.0;
        prevKills[p] = kills_[p];
    }
}

template <typename T, typename Key>
void sort_by(std::vector<T>& v, Key key) {
    std::stable_sort(v.begin(), v.end(), [&](const T& a, const T& b) { return key(a) < key(b); });
}

} // namespace

std::pair<MatchRecord, LabelSet> generate_synthetic_match(std::span<const CheatProfile> profiles, int rounds,
                                                          std::uint64_t seed, const SynthConfig& config) {
    if (profiles.empty()) throw ConfigError("profiles: player list is empty");
    if (profiles.size() < 2 || profiles.size() > 10) throw ConfigError("profiles: need 2 to 10 players");
    if (rounds < 1) throw ConfigError("rounds: must be at least 1");
    if (!(config.tickRate > 0) || config.frameStride < 1) throw ConfigError("config: invalid tick rate or stride");

    std::vector<Behavior> behaviors;
    for (const auto& p : profiles) behaviors.push_back(resolve(p));

    Rng rng(seed);
    MatchRecord m;
    m.matchId = config.matchId.empty() ? "synth-" + std::to_string(seed) : config.matchId;
    m.mapName = config.mapName;
    m.tickRate = config.tickRate;
    m.dateUtc = config.dateUtc;

    LabelSet labels;
    labels.matchId = m.matchId;
    const std::size_t n = profiles.size();
    const std::uint64_t base = 76561197960265728ULL + (seed % 100000000ULL) * 16ULL;
    for (std::size_t i = 0; i < n; ++i) {
        PlayerRef p{std::to_string(base + i), i < (n + 1) / 2 ? Side::T : Side::CT};
        m.players.push_back(p);
        PlayerLabel l;
        l.steamId = p.steamId;
        switch (profiles[i].kind) {
        case ProfileKind::Aimbot: l.cheater = true; l.cheatType = CheatType::Aimbot; break;
        case ProfileKind::Wallhack: l.cheater = true; l.cheatType = CheatType::Wallhack; break;
        default: break;
        }
        labels.labels.push_back(l);
    }

    std::vector<double> cash(n, 800.0), equipment(n, 200.0);
    std::vector<int> prevKills(n, 0);
    Tick start = 64;
    RoundSimulator sim(m, behaviors, config, rng);
    for (int r = 1; r <= rounds; ++r) {
        sim.run(r, start, cash, equipment, prevKills);
        start = m.rounds.back().endTick + static_cast<Tick>(config.tickRate);
    }

    // official bans trail the match by 3 to 45 days
    std::mt19937_64 banRng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<std::int64_t> banDelay(3 * 86400, 45 * 86400);
    for (auto& l : labels.labels)
        if (l.cheater) l.banDateUtc = format_utc(parse_utc(m.dateUtc) + banDelay(banRng));

    sort_by(m.damages, [](const DamageEvent& e) { return e.tick; });
    sort_by(m.kills, [](const KillEvent& e) { return e.tick; });
    sort_by(m.weaponFires, [](const WeaponFireEvent& e) { return e.tick; });
    sort_by(m.flashes, [](const FlashEvent& e) { return e.tick; });
    sort_by(m.grenades, [](const GrenadeEvent& e) { return e.throwTick; });
    validate_match(m);
    return {std::move(m), std::move(labels)};
}

std::vector<LabeledMatch> generate_synthetic_dataset(const DatasetSpec& spec) {
    if (spec.matches < 1) throw ConfigError("matches: must be at least 1");
    int cheatersPerMatch = 0;
    for (const auto& q : spec.cheaters) {
        if (q.perMatch < 0) throw ConfigError("cheaters: negative count");
        cheatersPerMatch += spec.alternateKinds ? 0 : q.perMatch;
    }
    if (spec.alternateKinds && !spec.cheaters.empty()) cheatersPerMatch = spec.cheaters.front().perMatch;
    if (cheatersPerMatch > spec.playersPerMatch) throw ConfigError("cheaters: more cheaters than players");

    std::mt19937_64 seeder(spec.seed);
    const std::int64_t t0 = parse_utc(spec.startDateUtc);
    std::vector<LabeledMatch> out;
    out.reserve(static_cast<std::size_t>(spec.matches));
    for (int i = 0; i < spec.matches; ++i) {
        const std::uint64_t matchSeed = seeder();
        std::vector<CheatProfile> profiles(static_cast<std::size_t>(spec.playersPerMatch));
        std::vector<ProfileKind> kinds;
        if (spec.alternateKinds && !spec.cheaters.empty()) {
            const auto& q = spec.cheaters[static_cast<std::size_t>(i) % spec.cheaters.size()];
            kinds.assign(static_cast<std::size_t>(q.perMatch), q.kind);
        } else {
            for (const auto& q : spec.cheaters) kinds.insert(kinds.end(), static_cast<std::size_t>(q.perMatch), q.kind);
        }
        std::vector<std::size_t> slots(profiles.size());
        for (std::size_t s = 0; s < slots.size(); ++s) slots[s] = s;
        std::shuffle(slots.begin(), slots.end(), seeder);
        for (std::size_t c = 0; c < kinds.size(); ++c) {
            auto& p = profiles[slots[c]];
            p.kind = kinds[c];
            p.sophistication = spec.sophistication;
            p.overrides = spec.cheaterOverrides;
        }
        SynthConfig cfg = spec.match;
        char id[32];
        std::snprintf(id, sizeof id, "m%05d-%08llx", i, static_cast<unsigned long long>(matchSeed & 0xffffffffULL));
        cfg.matchId = id;
        cfg.dateUtc = format_utc(t0 + static_cast<std::int64_t>(std::llround(i * spec.hoursBetweenMatches * 3600.0)));
        auto [match, labels] = generate_synthetic_match(profiles, spec.rounds, matchSeed, cfg);
        out.push_back({std::move(match), std::move(labels)});
    }
    return out;
}

} // namespace hawk::replay
