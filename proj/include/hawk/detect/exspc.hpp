#pragma once

#include "hawk/detect/revpov.hpp"
#include "hawk/learn/layers.hpp"

namespace hawk::detect {

// Masked: encode the real steps, then zero-pad the step outputs.
// Literal: zero-pad the raw sequence to the padding length, then encode it.
enum class PaddingMode { Masked, Literal };
std::string_view to_string(PaddingMode m);

struct ExSpcConfig {
    int shrinkWidth = 32;
    std::vector<int> reduction{64, 32};
    std::vector<int> deepening{32, 16};
    int headHidden = 16;
    PaddingMode padding = PaddingMode::Masked;
    learn::TrainConfig train = [] {
        learn::TrainConfig t;
        t.epochs = 30;
        t.batchSize = 32;
        t.optimizer.learningRate = 1e-3;
        t.positiveWeight = 9;
        t.negativeWeight = 1;
        return t;
    }();
    std::uint64_t seed = 1;
};

void to_json(json& j, const ExSpcConfig& c);
void from_json(const json& j, ExSpcConfig& c);

// One player's network input. `flat` is indexed by StreamKind: the T x E step
// outputs padded to P rows and flattened row by row. `z28` holds the 28
// z-scored structured values.
struct SpcInput {
    std::array<Vector, features::kStreamCount> flat;
    Vector z28;
};

// Largest stream length after encoder truncation.
int padding_length(std::span<const features::PlayerSample> samples, int maxLength);

// Throws MissingEmbedding when an encoder is untrained or produces the wrong width.
SpcInput assemble_inputs(const RevPovModel& revpov, const features::PlayerSample& s, const Vector& z28,
                         int paddingLength, PaddingMode mode, EmbeddingCache* cache = nullptr);
// Padding helper, exposed for tests.
Vector pad_flatten(const Matrix& steps, int paddingLength, int width);

class ExSpcModel {
public:
    struct Cache;

    ExSpcConfig config;
    features::SensePerfGrouping grouping;
    int paddingLength = 0;
    int stepWidth = 0;

    std::array<learn::Dense, features::kStreamCount> shrink; // by StreamKind
    std::vector<learn::Dense> povSense, povPerf, statSense, statPerf;
    std::vector<learn::Dense> deepSense, deepPerf;
    std::vector<learn::Dense> head;

    ExSpcModel() = default;
    ExSpcModel(const ExSpcConfig& cfg, const features::SensePerfGrouping& g, int paddingLength, int stepWidth);

    bool trained() const { return trained_; }
    void mark_trained() { trained_ = true; }

    double logit(const SpcInput& in) const;
    double score(const SpcInput& in) const;
    Decision decide(const SpcInput& in) const; // score >= 0.5

    // Loss of one sample; with `accumulate` adds the gradient into the params.
    double sample_loss(const SpcInput& in, int label, double positiveWeight, double negativeWeight, bool accumulate);
    std::vector<learn::Param*> params();

    json to_json() const;
    static ExSpcModel from_json(const json& j);
    std::string grouping_version() const;
    void save(const std::filesystem::path& dir) const;
    static ExSpcModel load(const std::filesystem::path& dir);

private:
    double forward(const SpcInput& in, Cache* cache) const;
    void backward(double dlogit, const Cache& cache);
    void check_input(const SpcInput& in) const;

    bool trained_ = false;
};

struct ExSpcReport {
    std::vector<double> trainLoss, validationLoss;
};

ExSpcModel train_exspc(std::span<const SpcInput> train, std::span<const int> trainLabels,
                       std::span<const SpcInput> validation, std::span<const int> validationLabels,
                       const ExSpcConfig& cfg, int paddingLength, int stepWidth,
                       const features::SensePerfGrouping& grouping = features::default_grouping(),
                       ExSpcReport* report = nullptr);

} // namespace hawk::detect
