#pragma once

#include "hawk/detect/common.hpp"
#include "hawk/eval/metrics.hpp"
#include "hawk/learn/encoder.hpp"
#include "hawk/learn/trees.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace hawk::detect {

using features::StreamKind;

// Embedding order: eco, mov, dmg, elm, aux, off, wf.
inline constexpr std::array<StreamKind, features::kStreamCount> kPovOrder{
    StreamKind::Economy,        StreamKind::Movement,       StreamKind::Damage,    StreamKind::Elimination,
    StreamKind::AuxiliaryProps, StreamKind::OffensiveProps, StreamKind::WeaponFire};
int pov_slot(StreamKind k);

struct RevPovConfig {
    learn::EncoderConfig encoder; // inputWidth is set per stream
    learn::TrainConfig encoderTrain;
    learn::ForestConfig forest;
    int maxSubsets = 15;
    std::uint64_t seed = 1;
};

void to_json(json& j, const RevPovConfig& c);
void from_json(const json& j, RevPovConfig& c);

struct PovEncoding {
    std::array<Matrix, features::kStreamCount> steps; // per kPovOrder slot, T x E (T = 0 for an empty stream)
    Vector vpov;                                       // 7E pooled values, then 7 empty-stream flags
};

class RevPovModel {
public:
    RevPovConfig config;
    std::array<learn::SequenceEncoder, features::kStreamCount> encoders; // kPovOrder
    std::vector<learn::RandomForest> forests;
    std::string encoderVersion;

    bool trained() const;
    int embedding_width() const;
    int step_width() const { return config.encoder.outputWidth; }

    PovEncoding encode(const features::TemporalStreams& s) const;
    Vector embed(const features::TemporalStreams& s) const { return encode(s).vpov; }
    std::vector<int> forest_votes(const Vector& vpov) const;
    // Majority over the forests; score = fraction of forests voting 1.
    Decision decide(const Vector& vpov) const;

    void refresh_version();
    void save(const std::filesystem::path& dir) const;
    static RevPovModel load(const std::filesystem::path& dir);
};

// Encodings keyed by (matchId, steamId, encoderVersion).
class EmbeddingCache {
public:
    std::shared_ptr<const PovEncoding> get(const RevPovModel& model, const features::PlayerSample& s);
    std::size_t size() const;
    void clear();

private:
    mutable std::mutex mu_;
    std::map<std::tuple<std::string, std::string, std::string>, std::shared_ptr<const PovEncoding>> entries_;
};

struct RevPovReport {
    std::array<std::vector<double>, features::kStreamCount> encoderLoss; // kPovOrder
    std::vector<SubsampleSet> subsets;
    eval::ConfusionCounts validation;
};

// Phase 1 trains the seven encoders with their BCE heads; phase 2 embeds the
// training players and fits one forest per balanced subset.
RevPovModel train_revpov(std::span<const features::PlayerSample> train,
                         std::span<const features::PlayerSample> validation, const RevPovConfig& cfg,
                         RevPovReport* report = nullptr, EmbeddingCache* cache = nullptr);

} // namespace hawk::detect
