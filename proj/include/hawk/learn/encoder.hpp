#pragma once

#include "hawk/learn/layers.hpp"

#include <optional>

namespace hawk::learn {

struct EncoderConfig {
    int inputWidth = 0;
    int layers = 2;
    int hidden = 32;
    double dropout = 0.2; // on the inputs of LSTM layers 2..L, training only
    int outputWidth = 16;
    int maxLength = 512; // longer sequences keep their first maxLength steps
};

void to_json(json& j, const EncoderConfig& c);
void from_json(const json& j, EncoderConfig& c);

struct EncoderOutput {
    Matrix steps;     // T x E, one row per step
    Vector pooled;    // mean of the step rows
    Matrix attention; // T x T, row i = weights of query step i
};

// Stacked LSTM -> attention -> [a || h] -> two ELU dense layers, plus a
// sigmoid head on the pooled output used only while training.
class SequenceEncoder {
public:
    SequenceEncoder() = default;
    SequenceEncoder(const EncoderConfig& cfg, std::uint64_t seed);

    const EncoderConfig& config() const { return cfg_; }
    bool trained() const { return trained_; }
    void mark_trained() { trained_ = true; }

    // Rows of `seq` are steps. Throws EmptySequence and ConfigError on a width mismatch.
    EncoderOutput encode(const Matrix& seq) const;
    double probability(const Matrix& seq) const;

    // Fits the input standardizer on every training step, then trains with
    // weighted BCE. Empty sequences are skipped. Returns the per-epoch loss.
    std::vector<double> fit(const std::vector<const Matrix*>& seqs, const std::vector<int>& labels,
                            const TrainConfig& train);

    // Loss of one sequence; with `accumulate` the gradient is added into the
    // params. Dropout masks are drawn from `dropoutRng` when given.
    double sample_loss(const Matrix& seq, int label, double positiveWeight, double negativeWeight,
                       std::mt19937_64* dropoutRng, bool accumulate);

    std::vector<Param*> params();
    Standardizer& input_scaler() { return scaler_; }

    json to_json() const;
    static SequenceEncoder from_json(const json& j);

private:
    Matrix prepare(const Matrix& seq) const;

    EncoderConfig cfg_;
    Standardizer scaler_;
    std::vector<LstmLayer> lstm_;
    Attention attention_;
    Dense d1_, d2_, head_;
    bool trained_ = false;
};

struct LayerSpec {
    int width = 0;
    Activation activation = Activation::Elu;
};

// Feed-forward net ending in a single sigmoid unit.
class BinaryNet {
public:
    BinaryNet() = default;
    BinaryNet(int inputWidth, const std::vector<LayerSpec>& hidden, std::uint64_t seed);

    int input_width() const { return layers_.empty() ? 0 : layers_.front().in(); }
    double logit(const Vector& x) const;
    double probability(const Vector& x) const { return sigmoid(logit(x)); }

    // Rows of X are samples.
    std::vector<double> fit(const Matrix& X, const std::vector<int>& y, const TrainConfig& train);
    double sample_loss(const Vector& x, int y, double positiveWeight, double negativeWeight, bool accumulate);

    std::vector<Param*> params();
    const std::vector<Dense>& layers() const { return layers_; }

    json to_json() const;
    static BinaryNet from_json(const json& j);

private:
    std::vector<Dense> layers_; // last layer is 1 unit, linear (the sigmoid is applied on the logit)
};

} // namespace hawk::learn
