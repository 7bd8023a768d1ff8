#pragma once

#include "hawk/detect/exspc.hpp"
#include "hawk/detect/revstats.hpp"
#include "hawk/eval/mvin.hpp"
#include "hawk/replay/dataset.hpp"

#include <optional>

namespace hawk::detect {

// What Mvin fuses: binary subsystem decisions (default) or their scores.
enum class FusionInput { Decisions, Scores };

struct SplitConfig {
    std::array<double, 3> ratios{0.6, 0.2, 0.2};
    bool byDate = false;
};

struct PipelineConfig {
    features::ExtractionConfig extraction;
    RevPovConfig revpov;
    RevStatsConfig revstats;
    ExSpcConfig exspc;
    eval::Objective objective;
    double lambdaStep = 0.05;
    FusionInput fusion = FusionInput::Decisions;
    SplitConfig split;
    std::uint64_t seed = 1;

    // Propagates `seed` into every subsystem.
    void set_seed(std::uint64_t s);
};

void to_json(json& j, const PipelineConfig& c);
void from_json(const json& j, PipelineConfig& c);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct PlayerDecision {
    std::string matchId, steamId;
    Decision pov, stats, spc;
    double w = 0;
    double epsilon = 0;
    int hawk = 0;
    int label = 0;
    Vector z28;
};

json to_json(const PlayerDecision& d);

struct SubsystemEvaluation {
    eval::ConfusionCounts counts;
    eval::Metrics metrics;
    std::optional<double> auc; // undefined with a single class
};

struct Evaluation {
    SubsystemEvaluation pov, stats, spc, hawk;
};

Evaluation evaluate(std::span<const PlayerDecision> decisions);
json to_json(const SubsystemEvaluation& e);
json to_json(const Evaluation& e);

struct TrainingReport {
    RevPovReport revpov;
    ExSpcReport exspc;
    std::size_t trainSamples = 0, validationSamples = 0;
    json to_json() const;
};

class HawkBundle {
public:
    PipelineConfig config;
    RevPovModel revpov;
    Committee revstats;
    ExSpcModel exspc;
    eval::MvinModel mvin;
    std::vector<eval::Triple> validationTriples;
    std::vector<eval::ScoreTriple> validationScores;
    std::string modelVersion;

    PlayerDecision detect(const features::PlayerSample& s, EmbeddingCache* cache = nullptr) const;
    std::vector<PlayerDecision> detect_all(std::span<const features::PlayerSample> samples,
                                           EmbeddingCache* cache = nullptr) const;
    // Runs the optimizer on the cached validation triples; the bundle is left unchanged.
    eval::MvinModel reoptimize(const eval::Objective& objective) const;
    double fuse(const PlayerDecision& d) const;

    void refresh_version();
    // Layout: bundle.json, mvin.json, validation.json, revpov/, revstats/, exspc/.
    void save(const std::filesystem::path& dir) const;
    static HawkBundle load(const std::filesystem::path& dir);
};

HawkBundle train_bundle(std::span<const features::PlayerSample> train,
                        std::span<const features::PlayerSample> validation, const PipelineConfig& cfg,
                        TrainingReport* report = nullptr);

struct SampleSplit {
    std::vector<features::PlayerSample> train, validation, test;
};
SampleSplit split_samples(std::span<const replay::LabeledMatch> matches, const PipelineConfig& cfg);

struct RobustnessRow {
    int prefix = 0;
    std::size_t trainMatches = 0;
    Evaluation validation, test;
};

// Sorts matches by date and cuts floor(n / partitionSize) partitions (the
// remainder joins the last one). Every partition is split by the configured
// ratios; validation and test are the union of the per-partition portions and
// stay fixed, while prefix i trains on the train portions of partitions 1..i.
// Throws InsufficientData with fewer than two partitions.
std::vector<RobustnessRow> robustness_sweep(std::span<const replay::LabeledMatch> matches, const PipelineConfig& cfg,
                                            int partitionSize = 40);
// prefix,train_matches,accuracy,recall,npv,auc,oei (HAWK on the test portion).
std::string robustness_csv(std::span<const RobustnessRow> rows);

} // namespace hawk::detect
