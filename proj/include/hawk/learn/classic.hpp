#pragma once

#include "hawk/learn/encoder.hpp"
#include "hawk/learn/trees.hpp"

#include <memory>
#include <optional>

namespace hawk::learn {

enum class ClassifierKind { Mlp, LogReg, RandomForest, LinearSvm, GaussianNb, Qda, DecisionTree };

inline constexpr std::array<ClassifierKind, 7> kAllClassifierKinds{
    ClassifierKind::Mlp,        ClassifierKind::LogReg, ClassifierKind::RandomForest, ClassifierKind::LinearSvm,
    ClassifierKind::GaussianNb, ClassifierKind::Qda,    ClassifierKind::DecisionTree};

std::string_view to_string(ClassifierKind k);
std::optional<ClassifierKind> classifier_kind_from_string(std::string_view s);
// Trees split on raw values; every other kind expects standardized inputs.
bool is_tree_kind(ClassifierKind k);

struct ClassicConfig {
    ForestConfig forest;
    TreeConfig tree;
    std::vector<int> mlpHidden{32, 16};
    TrainConfig mlpTrain = [] {
        TrainConfig t;
        t.epochs = 150;
        t.batchSize = 16;
        t.optimizer.learningRate = 5e-3;
        t.positiveWeight = 1;
        return t;
    }();
    double logregL2 = 1e-3;
    int logregIterations = 50;
    double svmLambda = 1e-3;
    int svmEpochs = 100;
    double varianceFloor = 1e-9;
    double qdaRegularization = 1e-6;
    bool qdaRegularize = true;
};

void to_json(json& j, const ClassicConfig& c);
void from_json(const json& j, ClassicConfig& c);

class Classifier {
public:
    virtual ~Classifier() = default;
    virtual ClassifierKind kind() const = 0;
    // Rows of X are samples; labels in {0,1}. Deterministic in (X, y, seed).
    virtual void fit(const Matrix& X, const std::vector<int>& y, std::uint64_t seed) = 0;
    virtual bool trained() const = 0;
    // Class-1 score in [0,1].
    virtual double score(const Vector& x) const = 0;
    int decide(const Vector& x) const { return score(x) > 0.5 ? 1 : 0; }

    virtual json parameters() const = 0;
    virtual void load(const json& parameters) = 0;
};

std::unique_ptr<Classifier> make_classifier(ClassifierKind kind, const ClassicConfig& cfg = {});

} // namespace hawk::learn
