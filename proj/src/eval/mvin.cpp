#include "hawk/eval/mvin.hpp"

#include "hawk/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hawk::eval {

void check_simplex(const Lambda& lambda) {
    double sum = 0;
    for (double l : lambda) {
        if (!(l >= -1e-12 && l <= 1 + 1e-12)) throw SimplexViolation("lambda weights must lie in [0,1]");
        sum += l;
    }
    if (std::abs(sum - 1) > 1e-9) throw SimplexViolation("lambda weights must sum to 1");
}

double fuse(const Lambda& lambda, int dPov, int dStats, int dSpc) {
    check_simplex(lambda);
    for (int d : {dPov, dStats, dSpc})
        if (d != 0 && d != 1) throw ConfigError("subsystem decisions must be 0 or 1");
    return lambda[0] * dPov + lambda[1] * dStats + lambda[2] * dSpc;
}

double fuse_scores(const Lambda& lambda, double sPov, double sStats, double sSpc) {
    check_simplex(lambda);
    for (double v : {sPov, sStats, sSpc})
        if (!(v >= 0 && v <= 1)) throw ConfigError("subsystem scores must lie in [0,1]");
    return lambda[0] * sPov + lambda[1] * sStats + lambda[2] * sSpc;
}

std::string Objective::to_string() const {
    switch (kind) {
    case ObjectiveKind::F1: return "f1";
    case ObjectiveKind::Accuracy: return "accuracy";
    case ObjectiveKind::Auc: return "auc";
    case ObjectiveKind::AccuracyAtRecall: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "accuracy-subject-to-recall(%g)", minRecall);
        return buf;
    }
    }
    return "accuracy";
}

Objective Objective::parse(std::string_view s) {
    Objective o;
    if (s == "f1") o.kind = ObjectiveKind::F1;
    else if (s == "accuracy") o.kind = ObjectiveKind::Accuracy;
    else if (s == "auc") o.kind = ObjectiveKind::Auc;
    else {
        constexpr std::string_view prefix = "accuracy-subject-to-recall(";
        if (!s.starts_with(prefix) || !s.ends_with(")"))
            throw ConfigError("unknown objective '" + std::string(s) + "'");
        const std::string num(s.substr(prefix.size(), s.size() - prefix.size() - 1));
        char* end = nullptr;
        const double r = std::strtod(num.c_str(), &end);
        if (num.empty() || end != num.c_str() + num.size() || !std::isfinite(r) || r < 0)
            throw ConfigError("objective recall bound must be a non-negative number");
        o.kind = ObjectiveKind::AccuracyAtRecall;
        o.minRecall = r;
    }
    return o;
}

Objective Objective::from_json(const nlohmann::json& j) {
    if (j.is_string()) return parse(j.get<std::string>());
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "accuracy-subject-to-recall") return parse(kind);
    Objective o;
    o.kind = ObjectiveKind::AccuracyAtRecall;
    o.minRecall = j.at("minRecall").get<double>();
    if (!std::isfinite(o.minRecall) || o.minRecall < 0) throw ConfigError("minRecall must be non-negative");
    return o;
}

nlohmann::json Objective::to_json() const { return to_string(); }

double objective_value(const Objective& o, const ConfusionCounts& c) {
    const Metrics m = metrics(c);
    switch (o.kind) {
    case ObjectiveKind::F1: return m.f1.value_or(0);
    case ObjectiveKind::Accuracy:
    case ObjectiveKind::AccuracyAtRecall: return m.accuracy.value_or(0);
    case ObjectiveKind::Auc: return (m.recall.value_or(0) + m.specificity.value_or(0)) / 2;
    }
    return 0;
}

namespace {

std::vector<double> distinct_sorted(std::vector<double> w) {
    std::sort(w.begin(), w.end());
    std::vector<double> distinct;
    for (double v : w)
        if (distinct.empty() || v - distinct.back() > 1e-12) distinct.push_back(v);
    return distinct;
}

std::vector<double> midpoints(const std::vector<double>& w) {
    std::vector<double> eps;
    if (w.empty()) return eps;
    eps.push_back(w.front());
    for (std::size_t i = 1; i < w.size(); ++i) eps.push_back((w[i - 1] + w[i]) / 2);
    return eps;
}

template <typename T, typename Fuse>
MvinModel search(std::span<const T> triples, const Objective& objective, double step, Fuse fuseOne) {
    bool pos = false, neg = false;
    for (const auto& t : triples) (t.label == 1 ? pos : neg) = true;
    if (!pos || !neg) throw DegenerateClass("optimizer needs both classes in the validation triples");

    bool found = false;
    MvinModel best;
    best.objective = objective;
    double bestRecall = 0;
    std::vector<double> w(triples.size());
    for (const auto& lambda : lambda_grid(step)) {
        for (std::size_t i = 0; i < triples.size(); ++i) w[i] = fuseOne(lambda, triples[i]);
        for (double eps : midpoints(distinct_sorted(w))) {
            ConfusionCounts c;
            for (std::size_t i = 0; i < triples.size(); ++i) c.add(decide_hawk(w[i], eps), triples[i].label);
            const double recall = metrics(c).recall.value_or(0);
            if (objective.kind == ObjectiveKind::AccuracyAtRecall && recall < objective.minRecall) continue;
            const double value = objective_value(objective, c);
            const bool better = !found || value > best.objectiveValue ||
                                (value == best.objectiveValue &&
                                 (recall > bestRecall || (recall == bestRecall && c.fp < best.validation.fp)));
            if (better) {
                found = true;
                best.lambda = lambda;
                best.epsilon = eps;
                best.objectiveValue = value;
                best.validation = c;
                bestRecall = recall;
            }
        }
    }
    if (!found)
        throw InfeasibleConstraint("no weights and threshold reach recall >= " + std::to_string(objective.minRecall));
    return best;
}

} // namespace

std::vector<double> attainable_w(const Lambda& lambda, std::span<const Triple> triples) {
    std::vector<double> w;
    for (const auto& t : triples) w.push_back(fuse(lambda, t.dPov, t.dStats, t.dSpc));
    return distinct_sorted(std::move(w));
}

std::vector<double> epsilon_candidates(const Lambda& lambda, std::span<const Triple> triples) {
    return midpoints(attainable_w(lambda, triples));
}

std::vector<Lambda> lambda_grid(double step) {
    if (!(step > 0) || step > 1) throw ConfigError("lambda grid step must be in (0,1]");
    const int k = static_cast<int>(std::lround(1 / step));
    if (std::abs(k * step - 1) > 1e-9) throw ConfigError("lambda grid step must divide 1");
    std::vector<Lambda> grid;
    for (int i = 0; i <= k; ++i)
        for (int j = 0; i + j <= k; ++j)
            grid.push_back({static_cast<double>(i) / k, static_cast<double>(j) / k, static_cast<double>(k - i - j) / k});
    return grid;
}

MvinModel optimize(std::span<const Triple> triples, const Objective& objective, double step) {
    return search(triples, objective, step,
                  [](const Lambda& l, const Triple& t) { return fuse(l, t.dPov, t.dStats, t.dSpc); });
}

MvinModel optimize_scores(std::span<const ScoreTriple> triples, const Objective& objective, double step) {
    auto m = search(triples, objective, step,
                    [](const Lambda& l, const ScoreTriple& t) { return fuse_scores(l, t.sPov, t.sStats, t.sSpc); });
    m.scoreMode = true;
    return m;
}

nlohmann::json MvinModel::to_json() const {
    return {{"lambda", lambda},
            {"epsilon", epsilon},
            {"objective", objective.to_json()},
            {"objectiveValue", objectiveValue},
            {"validation", eval::to_json(validation)},
            {"scoreMode", scoreMode}};
}

MvinModel MvinModel::from_json(const nlohmann::json& j) {
    MvinModel m;
    m.lambda = j.at("lambda").get<Lambda>();
    check_simplex(m.lambda);
    m.epsilon = j.at("epsilon").get<double>();
    if (!(m.epsilon >= 0 && m.epsilon <= 1)) throw ConfigError("epsilon must lie in [0,1]");
    if (j.contains("objective")) m.objective = Objective::from_json(j.at("objective"));
    m.objectiveValue = j.value("objectiveValue", 0.0);
    if (j.contains("validation")) m.validation = confusion_from_json(j.at("validation"));
    m.scoreMode = j.value("scoreMode", false);
    return m;
}

} // namespace hawk::eval
