#pragma once

#include "hawk/features/streams.hpp"
#include "hawk/replay/match.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hawk::features {

using replay::MatchRecord;
using replay::Tick;
using replay::Vec3;
using replay::View;

struct FeatureConfig {
    double fovHalfAngle = 45;           // degrees, applied to yaw and pitch separately
    double engagementResetSeconds = 10; // idle time that closes an engagement
    double smokeRadius = 144;           // world units around an active smoke that block sight
    double inertialWindowSeconds = 0.15;
    double fireRoundGapSeconds = 5;
    double fhpToleranceSeconds = 1.0 / 128; // one tick at the reference rate
    double ttkCapSeconds = 10;
    double distanceScale = 1.0; // world units -> shr distance units
    double onetapDamage = 100;
    int propsPerPlayerRound = 5;
    std::array<double, 4> opiWeights{0.5, 1.0, 2.0, 0.5}; // p(1), p(2), p(>2), thru-smoke
};

struct Engagement {
    std::string opponentId;
    int roundNum = 0;
    Tick t0Tick = 0;
    std::optional<Tick> t1Tick, t2Tick;
    // Absolute match seconds (tick / tickRate).
    double t0 = 0;
    std::optional<double> t1, t2;
    std::optional<double> rat, ajt, drt; // seconds
    std::optional<double> raa, aja;      // degrees
    std::optional<double> velocity;      // distance at t2 / drt, units per second
    Vec3 attackerPosT0;
    std::optional<Vec3> attackerPosT1, attackerPosT2;
    Vec3 victimPosT0;
};

// Great-circle angle in degrees between two view directions.
double view_angle(const View& a, const View& b);

// Engagements of `steamId` against each opponent, ordered by (t0, opponent
// position in the player list). Throws UnknownPlayer.
std::vector<Engagement> segment_engagements(const MatchRecord& m, std::string_view steamId,
                                            const FeatureConfig& cfg = {});

inline constexpr int kFeatureCount = 28;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "rat-avg", "rat-var", "ajt-avg", "ajt-var", "drt-avg", "drt-var", "v-avg", "v-var", "raa-avg", "raa-var",
    "aja-avg", "aja-var", "isp",     "fhp",     "precis",  "shp",     "hgd",   "shr",   "ttk-avg", "ttk-var",
    "fkp",     "otp",     "opi",     "bkp",     "chp",     "akpr",    "fei",   "pui"};

// Index into kFeatureNames, or -1.
int feature_index(std::string_view name);

template <std::size_t N>
struct FeatureBlock {
    std::array<double, N> values{};
    std::array<bool, N> missing{};
};

struct StructuredVector {
    std::array<double, kFeatureCount> values{};
    std::array<bool, kFeatureCount> missing{};
    bool operator==(const StructuredVector&) const = default;
};

FeatureBlock<12> aiming_features(std::span<const Engagement> engagements);
FeatureBlock<6> firing_features(const MatchRecord& m, std::string_view steamId, const FeatureConfig& cfg = {});
FeatureBlock<8> elimination_features(const MatchRecord& m, std::string_view steamId, const FeatureConfig& cfg = {});
FeatureBlock<2> props_features(const MatchRecord& m, std::string_view steamId, const FeatureConfig& cfg = {});

StructuredVector feature_vector(const MatchRecord& m, std::string_view steamId, const FeatureConfig& cfg = {});

// Sense/performance partitions used by the consistency subsystem.
struct SensePerfGrouping {
    std::vector<StreamKind> temporalSense;
    std::vector<StreamKind> temporalPerf;
    std::vector<int> structuredSense; // indices into kFeatureNames
    std::vector<int> structuredPerf;
};
const SensePerfGrouping& default_grouping();

} // namespace hawk::features
