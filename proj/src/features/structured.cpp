#include "hawk/features/structured.hpp"

#include "hawk/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace hawk::features {

using namespace replay;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double yaw_diff(double a, double b) {
    double d = std::fmod(std::abs(a - b), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

View direction(const Vec3& from, const Vec3& to) {
    const double dx = to.x - from.x, dy = to.y - from.y, dz = to.z - from.z;
    double yaw = std::atan2(dy, dx) / kDeg;
    if (yaw < 0) yaw += 360.0;
    return {yaw, std::atan2(dz, std::hypot(dx, dy)) / kDeg};
}

// Squared distance from point c to segment [a, b].
double seg_dist2(const Vec3& a, const Vec3& b, const Vec3& c) {
    const double abx = b.x - a.x, aby = b.y - a.y, abz = b.z - a.z;
    const double acx = c.x - a.x, acy = c.y - a.y, acz = c.z - a.z;
    const double len2 = abx * abx + aby * aby + abz * abz;
    double t = len2 > 0 ? (acx * abx + acy * aby + acz * abz) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = acx - t * abx, dy = acy - t * aby, dz = acz - t * abz;
    return dx * dx + dy * dy + dz * dz;
}

struct Moments {
    double mean = 0, var = 0;
    bool missing = true;
};

// Population mean/variance in input order.
Moments moments(const std::vector<double>& xs) {
    Moments r;
    if (xs.empty()) return r;
    const double n = static_cast<double>(xs.size());
    double sum = 0;
    for (double x : xs) sum += x;
    r.mean = sum / n;
    double ss = 0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.var = ss / n;
    r.missing = false;
    return r;
}

double ratio(double num, double den, bool& missing) {
    missing = den == 0;
    return missing ? 0.0 : num / den;
}

bool opponent_damage(const DamageEvent& d, std::string_view id) {
    return d.attackerSteamID == id && !d.isFriendlyFire && d.attackerSide != d.victimSide && d.victimSteamID != id;
}

bool opponent_kill(const KillEvent& k, std::string_view id) {
    return k.attackerSteamID == id && !k.isSuicide && !k.isTeamkill && k.attackerSide != k.victimSide &&
           k.victimSteamID != id;
}

const PlayerFrame* frame_of(const MovementFrame& f, std::string_view id) {
    for (const auto& p : f.players)
        if (p.steamId == id) return &p;
    return nullptr;
}

struct OpenEngagement {
    bool open = false;
    Tick last = 0;
    Engagement e;
    View v0, v1, v2;
    double distT2 = 0;
};

void finalize(OpenEngagement& s, double rate, std::vector<Engagement>& out) {
    Engagement& e = s.e;
    e.t0 = static_cast<double>(e.t0Tick) / rate;
    if (e.t1Tick) {
        e.t1 = static_cast<double>(*e.t1Tick) / rate;
        e.rat = static_cast<double>(*e.t1Tick - e.t0Tick) / rate;
        e.raa = view_angle(s.v0, s.v1);
    }
    if (e.t2Tick) {
        e.t2 = static_cast<double>(*e.t2Tick) / rate;
        e.ajt = static_cast<double>(*e.t2Tick - *e.t1Tick) / rate;
        e.drt = static_cast<double>(*e.t2Tick - e.t0Tick) / rate;
        e.aja = view_angle(s.v1, s.v2);
        if (*e.drt > 0) e.velocity = s.distT2 / *e.drt;
    }
    out.push_back(std::move(e));
    s = OpenEngagement{};
}

} // namespace

double view_angle(const View& a, const View& b) {
    const double ya = a.x * kDeg, pa = a.y * kDeg, yb = b.x * kDeg, pb = b.y * kDeg;
    const double ax = std::cos(pa) * std::cos(ya), ay = std::cos(pa) * std::sin(ya), az = std::sin(pa);
    const double bx = std::cos(pb) * std::cos(yb), by = std::cos(pb) * std::sin(yb), bz = std::sin(pb);
    const double cx = ay * bz - az * by, cy = az * bx - ax * bz, cz = ax * by - ay * bx;
    const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
    const double dot = ax * bx + ay * by + az * bz;
    return std::atan2(cross, dot) / kDeg;
}

int feature_index(std::string_view name) {
    for (int i = 0; i < kFeatureCount; ++i)
        if (kFeatureNames[static_cast<std::size_t>(i)] == name) return i;
    return -1;
}

std::vector<Engagement> segment_engagements(const MatchRecord& m, std::string_view id, const FeatureConfig& cfg) {
    if (!m.find_player(id)) throw UnknownPlayer(std::string(id));
    std::map<std::string, std::size_t, std::less<>> order;
    for (std::size_t i = 0; i < m.players.size(); ++i) order[m.players[i].steamId] = i;
    const double rate = m.tickRate;
    const double radius2 = cfg.smokeRadius * cfg.smokeRadius;

    std::vector<const GrenadeEvent*> smokes;
    for (const auto& g : m.grenades)
        if (g.grenadeType == GrenadeType::Smoke) smokes.push_back(&g);

    // 0 = sighting frame, 1 = own fire, 2 = own damage on an opponent.
    struct Moment {
        Tick tick;
        int kind;
        std::size_t index;
    };

    std::vector<Engagement> out;
    for (const auto& round : m.rounds) {
        std::vector<Moment> moments;
        for (std::size_t i = 0; i < m.frames.size(); ++i)
            if (m.frames[i].tick >= round.startTick && m.frames[i].tick <= round.endTick)
                moments.push_back({m.frames[i].tick, 0, i});
        for (std::size_t i = 0; i < m.weaponFires.size(); ++i)
            if (m.weaponFires[i].roundNum == round.roundNum && m.weaponFires[i].playerSteamID == id)
                moments.push_back({m.weaponFires[i].tick, 1, i});
        for (std::size_t i = 0; i < m.damages.size(); ++i)
            if (m.damages[i].roundNum == round.roundNum && opponent_damage(m.damages[i], id))
                moments.push_back({m.damages[i].tick, 2, i});
        std::stable_sort(moments.begin(), moments.end(), [](const Moment& a, const Moment& b) {
            return a.tick != b.tick ? a.tick < b.tick : a.kind < b.kind;
        });

        std::vector<OpenEngagement> state(m.players.size());
        for (const Moment& mo : moments) {
            for (auto& s : state)
                if (s.open && static_cast<double>(mo.tick - s.last) / rate > cfg.engagementResetSeconds)
                    finalize(s, rate, out);

            if (mo.kind == 0) {
                const MovementFrame& f = m.frames[mo.index];
                const PlayerFrame* self = frame_of(f, id);
                if (!self || !self->isAlive) continue;
                for (const auto& o : f.players) {
                    if (o.side == self->side || !o.isAlive || o.steamId == id) continue;
                    auto it = order.find(o.steamId);
                    if (it == order.end()) continue;
                    const View dir = direction(self->pos, o.pos);
                    if (yaw_diff(dir.x, self->view.x) > cfg.fovHalfAngle ||
                        std::abs(dir.y - self->view.y) > cfg.fovHalfAngle)
                        continue;
                    bool blocked = false;
                    for (const auto* g : smokes)
                        if (f.tick >= g->throwTick && f.tick <= g->destroyTick &&
                            seg_dist2(self->pos, o.pos, g->grenadePos) <= radius2) {
                            blocked = true;
                            break;
                        }
                    if (blocked) continue;
                    OpenEngagement& s = state[it->second];
                    if (!s.open) {
                        s.open = true;
                        s.e.opponentId = o.steamId;
                        s.e.roundNum = round.roundNum;
                        s.e.t0Tick = f.tick;
                        s.e.attackerPosT0 = self->pos;
                        s.e.victimPosT0 = o.pos;
                        s.v0 = self->view;
                    }
                    s.last = f.tick;
                }
            } else if (mo.kind == 1) {
                const WeaponFireEvent& fe = m.weaponFires[mo.index];
                for (auto& s : state) {
                    if (!s.open) continue;
                    if (!s.e.t1Tick) {
                        s.e.t1Tick = fe.tick;
                        s.e.attackerPosT1 = fe.playerPos;
                        s.v1 = fe.playerView;
                    }
                    s.last = fe.tick;
                }
            } else {
                const DamageEvent& d = m.damages[mo.index];
                auto it = order.find(d.victimSteamID);
                if (it == order.end()) continue;
                OpenEngagement& s = state[it->second];
                if (!s.open) continue;
                if (s.e.t1Tick && !s.e.t2Tick) {
                    s.e.t2Tick = d.tick;
                    s.e.attackerPosT2 = d.attackerPos;
                    s.v2 = d.attackerView;
                    s.distT2 = d.distance;
                }
                s.last = d.tick;
            }
        }
        for (auto& s : state)
            if (s.open) finalize(s, rate, out);
    }
    std::stable_sort(out.begin(), out.end(), [&](const Engagement& a, const Engagement& b) {
        if (a.t0Tick != b.t0Tick) return a.t0Tick < b.t0Tick;
        return order.find(a.opponentId)->second < order.find(b.opponentId)->second;
    });
    return out;
}

FeatureBlock<12> aiming_features(std::span<const Engagement> es) {
    std::array<std::vector<double>, 6> samples; // rat, ajt, drt, v, raa, aja
    for (const auto& e : es) {
        if (e.rat) samples[0].push_back(*e.rat);
        if (e.ajt) samples[1].push_back(*e.ajt);
        if (e.drt) samples[2].push_back(*e.drt);
        if (e.velocity) samples[3].push_back(*e.velocity);
        if (e.raa) samples[4].push_back(*e.raa);
        if (e.aja) samples[5].push_back(*e.aja);
    }
    FeatureBlock<12> b;
    for (std::size_t i = 0; i < 6; ++i) {
        const Moments mo = moments(samples[i]);
        b.values[2 * i] = mo.mean;
        b.values[2 * i + 1] = mo.var;
        b.missing[2 * i] = b.missing[2 * i + 1] = mo.missing;
    }
    return b;
}

FeatureBlock<6> firing_features(const MatchRecord& m, std::string_view id, const FeatureConfig& cfg) {
    if (!m.find_player(id)) throw UnknownPlayer(std::string(id));
    const double rate = m.tickRate;

    std::vector<const WeaponFireEvent*> fires;
    for (const auto& f : m.weaponFires)
        if (f.playerSteamID == id) fires.push_back(&f);
    std::stable_sort(fires.begin(), fires.end(),
                     [](const WeaponFireEvent* a, const WeaponFireEvent* b) { return a->tick < b->tick; });
    std::vector<const DamageEvent*> dmg;
    for (const auto& d : m.damages)
        if (opponent_damage(d, id)) dmg.push_back(&d);

    // isp
    double kills = 0, inertial = 0;
    for (const auto& k : m.kills) {
        if (!opponent_kill(k, id)) continue;
        kills += 1;
        for (const auto* f : fires) {
            if (f->tick <= k.tick) continue;
            if (static_cast<double>(f->tick - k.tick) / rate <= cfg.inertialWindowSeconds) {
                inertial += 1;
                break;
            }
            break; // fires are sorted; later ones are further away
        }
    }

    // fhp over fire rounds
    double rounds = 0, firstHits = 0;
    for (std::size_t i = 0; i < fires.size(); ++i) {
        const bool starts = i == 0 || fires[i]->roundNum != fires[i - 1]->roundNum ||
                            fires[i]->ammoInMagazine > fires[i - 1]->ammoInMagazine ||
                            static_cast<double>(fires[i]->tick - fires[i - 1]->tick) / rate > cfg.fireRoundGapSeconds;
        if (!starts) continue;
        rounds += 1;
        for (const auto* d : dmg) {
            const double gap = static_cast<double>(std::abs(d->tick - fires[i]->tick)) / rate;
            if (gap <= cfg.fhpToleranceSeconds) {
                firstHits += 1;
                break;
            }
        }
    }

    const double nd = static_cast<double>(dmg.size());
    double strafing = 0, special = 0;
    std::array<double, kHitGroupCount> groups{};
    for (const auto* d : dmg) {
        if (d->attackerStrafe) strafing += 1;
        groups[static_cast<std::size_t>(d->hitGroup)] += 1;
        const double dist = d->distance * cfg.distanceScale;
        const bool head = d->hitGroup == HitGroup::Head;
        if (d->weaponClass == "sniper") {
            if (dist >= 50 && dist <= 150) special += 1;
            if (head && dist >= 40 && dist <= 170) special += 1;
        } else {
            if (dist >= 800) special += 1;
            if (head && dist >= 700) special += 1;
        }
    }

    FeatureBlock<6> b;
    b.values[0] = ratio(inertial, kills, b.missing[0]);
    b.values[1] = ratio(firstHits, rounds, b.missing[1]);
    b.values[2] = ratio(nd, static_cast<double>(fires.size()), b.missing[2]);
    b.values[3] = ratio(strafing, nd, b.missing[3]);
    if (nd > 0) {
        double total = 0;
        for (double g : groups) total += g;
        const double mean = total / nd;
        double ss = 0;
        for (double g : groups) ss += (g - mean) * (g - mean);
        b.values[4] = ss / nd;
    }
    b.missing[4] = nd == 0;
    b.values[5] = ratio(special, nd, b.missing[5]);
    return b;
}

FeatureBlock<8> elimination_features(const MatchRecord& m, std::string_view id, const FeatureConfig& cfg) {
    if (!m.find_player(id)) throw UnknownPlayer(std::string(id));
    const double rate = m.tickRate;
    const double rounds = static_cast<double>(m.rounds.size());

    // ttk: window per victim opened by the first damage, closed by the kill.
    struct Hit {
        Tick tick;
        int kind; // 0 damage, 1 kill
        const std::string* victim;
        int roundNum;
    };
    std::vector<Hit> hits;
    for (const auto& d : m.damages)
        if (opponent_damage(d, id)) hits.push_back({d.tick, 0, &d.victimSteamID, d.roundNum});
    for (const auto& k : m.kills)
        if (opponent_kill(k, id)) hits.push_back({k.tick, 1, &k.victimSteamID, k.roundNum});
    std::stable_sort(hits.begin(), hits.end(),
                     [](const Hit& a, const Hit& b) { return a.tick != b.tick ? a.tick < b.tick : a.kind < b.kind; });
    std::vector<double> ttk;
    std::map<std::pair<int, std::string>, Tick> open;
    for (const Hit& h : hits) {
        const auto key = std::make_pair(h.roundNum, *h.victim);
        auto it = open.find(key);
        if (it != open.end() && static_cast<double>(h.tick - it->second) / rate > cfg.ttkCapSeconds) {
            open.erase(it);
            it = open.end();
        }
        if (h.kind == 0) {
            if (it == open.end()) open.emplace(key, h.tick);
        } else if (it != open.end()) {
            ttk.push_back(static_cast<double>(h.tick - it->second) / rate);
            open.erase(it);
        }
    }

    double kills = 0, first = 0, onetap = 0, blind = 0;
    std::array<double, 4> pen{};
    for (const auto& k : m.kills) {
        if (!opponent_kill(k, id)) continue;
        kills += 1;
        if (k.isFirstKill) first += 1;
        if (k.attackerBlinded) blind += 1;
        if (k.penetratedObjects == 1) pen[0] += 1;
        else if (k.penetratedObjects == 2) pen[1] += 1;
        else if (k.penetratedObjects > 2) pen[2] += 1;
        if (k.thruSmoke) pen[3] += 1;
        if (k.isHeadshot && k.weaponClass != "sniper") {
            for (const auto& d : m.damages) {
                if (d.tick == k.tick && opponent_damage(d, id) && d.victimSteamID == k.victimSteamID &&
                    d.hpDamage >= cfg.onetapDamage) {
                    onetap += 1;
                    break;
                }
            }
        }
    }
    double damages = 0, normal = 0, heads = 0;
    for (const auto& d : m.damages) {
        if (!opponent_damage(d, id)) continue;
        damages += 1;
        if (d.weaponClass != "sniper") normal += 1;
        if (d.hitGroup == HitGroup::Head) heads += 1;
    }

    FeatureBlock<8> b;
    const Moments t = moments(ttk);
    b.values[0] = t.mean;
    b.values[1] = t.var;
    b.missing[0] = b.missing[1] = t.missing;
    b.values[2] = ratio(first, rounds, b.missing[2]);
    b.values[3] = ratio(onetap, normal, b.missing[3]);
    const double weighted = cfg.opiWeights[0] * pen[0] + cfg.opiWeights[1] * pen[1] + cfg.opiWeights[2] * pen[2] +
                            cfg.opiWeights[3] * pen[3];
    b.values[4] = ratio(weighted, rounds, b.missing[4]);
    b.values[5] = ratio(blind, kills, b.missing[5]);
    b.values[6] = ratio(heads, damages, b.missing[6]);
    b.values[7] = ratio(kills, rounds, b.missing[7]);
    return b;
}

FeatureBlock<2> props_features(const MatchRecord& m, std::string_view id, const FeatureConfig& cfg) {
    if (!m.find_player(id)) throw UnknownPlayer(std::string(id));
    double opp = 0, ally = 0, total = 0;
    for (const auto& f : m.flashes) {
        if (f.attackerSteamID != id) continue;
        total += f.flashDuration;
        if (f.victimSide != f.attackerSide) opp += f.flashDuration;
        else ally += f.flashDuration;
    }
    double props = 0;
    for (const auto& g : m.grenades)
        if (g.throwerSteamID == id && g.grenadeType != GrenadeType::Decoy) props += 1;
    FeatureBlock<2> b;
    b.values[0] = ratio(opp - ally, total, b.missing[0]);
    const double cap = static_cast<double>(m.players.size()) * static_cast<double>(m.rounds.size()) *
                       static_cast<double>(cfg.propsPerPlayerRound);
    b.values[1] = ratio(props, cap, b.missing[1]);
    return b;
}

StructuredVector feature_vector(const MatchRecord& m, std::string_view id, const FeatureConfig& cfg) {
    const auto eng = segment_engagements(m, id, cfg);
    StructuredVector v;
    std::size_t at = 0;
    auto put = [&](const auto& block) {
        for (std::size_t i = 0; i < block.values.size(); ++i, ++at) {
            v.values[at] = block.values[i];
            v.missing[at] = block.missing[i];
        }
    };
    put(aiming_features(eng));
    put(firing_features(m, id, cfg));
    put(elimination_features(m, id, cfg));
    put(props_features(m, id, cfg));
    return v;
}

const SensePerfGrouping& default_grouping() {
    static const SensePerfGrouping g = [] {
        SensePerfGrouping s;
        s.temporalSense = {StreamKind::Movement, StreamKind::Economy, StreamKind::OffensiveProps,
                           StreamKind::AuxiliaryProps};
        s.temporalPerf = {StreamKind::WeaponFire, StreamKind::Elimination, StreamKind::Damage};
        for (auto name : {"fei", "opi", "isp", "bkp", "pui"}) s.structuredSense.push_back(feature_index(name));
        for (int i = 0; i < kFeatureCount; ++i)
            if (std::find(s.structuredSense.begin(), s.structuredSense.end(), i) == s.structuredSense.end())
                s.structuredPerf.push_back(i);
        return s;
    }();
    return g;
}

} // namespace hawk::features
