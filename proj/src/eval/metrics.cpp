#include "hawk/eval/metrics.hpp"

#include "hawk/error.hpp"

#include <algorithm>
#include <numeric>

namespace hawk::eval {

void ConfusionCounts::add(int predicted, int label) {
    if (label == 1)
        (predicted == 1 ? tp : fn) += 1;
    else
        (predicted == 1 ? fp : tn) += 1;
}

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> labels) {
    if (predicted.size() != labels.size()) throw ConfigError("prediction and label counts differ");
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) c.add(predicted[i], labels[i]);
    return c;
}

namespace {

std::optional<double> ratio(double num, double den) {
    if (den == 0) return std::nullopt;
    return num / den;
}

} // namespace

Metrics metrics(const ConfusionCounts& c) {
    const auto tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
    const auto fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
    Metrics m;
    m.accuracy = ratio(tp + tn, tp + tn + fp + fn);
    m.recall = ratio(tp, tp + fn);
    m.precision = ratio(tp, tp + fp);
    m.npv = ratio(tn, tn + fn);
    m.specificity = ratio(tn, tn + fp);
    m.f1 = ratio(2 * tp, 2 * tp + fp + fn);
    if (m.recall && m.npv && c.tp + c.fp > 0)
        m.oei = static_cast<double>(c.n()) / (tp + fp) * *m.recall * *m.npv;
    return m;
}

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ConfigError("score and label counts differ");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Twice the rank sum keeps average ranks of ties integral.
    std::int64_t twiceRankSum = 0, pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const auto twiceAvg = static_cast<std::int64_t>(i + 1 + j); // 2 * mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) twiceRankSum += twiceAvg;
        i = j;
    }
    for (int y : labels) pos += y == 1;
    const std::int64_t neg = static_cast<std::int64_t>(n) - pos;
    if (pos == 0 || neg == 0) throw DegenerateClass("AUC needs both classes");
    // 2U = 2R - pos(pos+1); AUC = U / (pos*neg)
    const std::int64_t twiceU = twiceRankSum - pos * (pos + 1);
    return static_cast<double>(twiceU) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

nlohmann::json to_json(const ConfusionCounts& c) {
    return {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}, {"n", c.n()}};
}

ConfusionCounts confusion_from_json(const nlohmann::json& j) {
    ConfusionCounts c;
    c.tp = j.at("tp").get<std::int64_t>();
    c.tn = j.at("tn").get<std::int64_t>();
    c.fp = j.at("fp").get<std::int64_t>();
    c.fn = j.at("fn").get<std::int64_t>();
    if (c.tp < 0 || c.tn < 0 || c.fp < 0 || c.fn < 0) throw SchemaError("confusion counts must be non-negative");
    return c;
}

nlohmann::json to_json(const Metrics& m) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"accuracy", opt(m.accuracy)}, {"recall", opt(m.recall)},           {"precision", opt(m.precision)},
            {"npv", opt(m.npv)},           {"specificity", opt(m.specificity)}, {"f1", opt(m.f1)},
            {"oei", opt(m.oei)}};
}

} // namespace hawk::eval
