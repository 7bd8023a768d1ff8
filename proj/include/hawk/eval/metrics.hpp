#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hawk::eval {

struct ConfusionCounts {
    std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::int64_t n() const { return tp + tn + fp + fn; }
    void add(int predicted, int label);
    bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> labels);

// Undefined values (zero denominators) are empty rather than 0.
struct Metrics {
    std::optional<double> accuracy, recall, precision, npv, specificity, f1, oei;
};

// OEI = (N / (TP + FP)) * recall * NPV.
Metrics metrics(const ConfusionCounts& c);

// Rank-based (Mann-Whitney) area under the ROC curve; tied scores count 1/2.
// Throws DegenerateClass unless both labels occur.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

nlohmann::json to_json(const ConfusionCounts& c);
ConfusionCounts confusion_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Metrics& m);

} // namespace hawk::eval
