#pragma once

#include "hawk/features/streams.hpp"
#include "hawk/features/structured.hpp"
#include "hawk/replay/synth.hpp"

namespace hawk::features {

struct ExtractionConfig {
    StreamConfig streams;
    FeatureConfig features;
};

// Everything the detectors consume for one player in one match.
struct PlayerSample {
    std::string matchId, steamId, dateUtc;
    int label = 0;
    replay::CheatType cheatType = replay::CheatType::None;
    TemporalStreams streams;
    StructuredVector v28;
};

// `labels` may be null (unlabeled input); players missing from it are honest.
PlayerSample extract_player(const MatchRecord& m, std::string_view steamId, const replay::LabelSet* labels,
                            const ExtractionConfig& cfg = {});
std::vector<PlayerSample> extract_match(const MatchRecord& m, const replay::LabelSet* labels,
                                        const ExtractionConfig& cfg = {});
std::vector<PlayerSample> extract_samples(std::span<const replay::LabeledMatch> matches,
                                          const ExtractionConfig& cfg = {});

nlohmann::json to_json(const StructuredVector& v);
StructuredVector structured_from_json(const nlohmann::json& j);
nlohmann::json sample_to_json(const PlayerSample& s);
PlayerSample sample_from_json(const nlohmann::json& j);

} // namespace hawk::features
