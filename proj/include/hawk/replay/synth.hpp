#pragma once

#include "hawk/replay/match.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace hawk::replay {

enum class ProfileKind { Honest, Aimbot, Wallhack, BoostingLike };

std::string_view to_string(ProfileKind k);
std::optional<ProfileKind> profile_kind_from_string(std::string_view s);

// Optional per-behavior overrides; unset fields use the profile's defaults.
struct BehaviorOverrides {
    std::optional<double> reactionMean;  // seconds
    std::optional<double> reactionSigma; // seconds
    std::optional<double> headshotBias;  // P(hit lands on head)
    std::optional<double> wallbangRate;  // P(kill penetrates an occluder)
    std::optional<double> propsRate;     // expected props thrown per round / 5
    std::optional<double> preAimRate;    // P(crosshair already on target when spotted)
};

struct CheatProfile {
    ProfileKind kind = ProfileKind::Honest;
    double sophistication = 0; // 0 = blatant, 1 = cautious
    BehaviorOverrides overrides;
};

struct SynthConfig {
    double tickRate = 128;
    int frameStride = 16;          // ticks between movement frames
    double freezeSeconds = 3;      // buy period
    double maxActiveSeconds = 30;  // round time limit after freeze time
    std::string matchId;           // default: "synth-<seed>"
    std::string mapName = "de_synth";
    std::string dateUtc = "2024-01-01T00:00:00Z";
};

// Deterministic for fixed (profiles, rounds, seed, config). Players are split
// into two teams (first half T, second half CT). Throws ConfigError on an
// empty or oversized player list, rounds < 1, or out-of-range profile values.
std::pair<MatchRecord, LabelSet> generate_synthetic_match(std::span<const CheatProfile> profiles, int rounds,
                                                          std::uint64_t seed, const SynthConfig& config = {});

struct CheaterQuota {
    ProfileKind kind = ProfileKind::Aimbot;
    int perMatch = 1;
};

struct DatasetSpec {
    int matches = 40;
    int playersPerMatch = 10;
    int rounds = 8;
    std::vector<CheaterQuota> cheaters{{ProfileKind::Aimbot, 1}};
    // Alternate cheat kinds across matches instead of placing every quota in
    // every match.
    bool alternateKinds = false;
    double sophistication = 0;
    BehaviorOverrides cheaterOverrides;
    std::uint64_t seed = 1;
    std::string startDateUtc = "2024-01-01T00:00:00Z";
    double hoursBetweenMatches = 6;
    SynthConfig match;
};

struct LabeledMatch {
    MatchRecord match;
    LabelSet labels;
};

// Matches carry ascending dates and distinct seeds derived from spec.seed.
std::vector<LabeledMatch> generate_synthetic_dataset(const DatasetSpec& spec);

} // namespace hawk::replay
