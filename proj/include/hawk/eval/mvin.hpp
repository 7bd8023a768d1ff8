#pragma once

#include "hawk/eval/metrics.hpp"

#include <array>
#include <string>

namespace hawk::eval {

using Lambda = std::array<double, 3>; // (pov, stats, spc)

// Throws SimplexViolation unless every weight is in [0,1] and they sum to 1 within 1e-9.
void check_simplex(const Lambda& lambda);

// W = l1*D_pov + l2*D_stats + l3*D_spc.
double fuse(const Lambda& lambda, int dPov, int dStats, int dSpc);
inline int decide_hawk(double w, double epsilon) { return w >= epsilon ? 1 : 0; }
// Score mode: continuous subsystem scores in [0,1] take the place of the decisions.
double fuse_scores(const Lambda& lambda, double sPov, double sStats, double sSpc);

enum class ObjectiveKind { F1, Accuracy, Auc, AccuracyAtRecall };

struct Objective {
    ObjectiveKind kind = ObjectiveKind::AccuracyAtRecall;
    double minRecall = 0.75; // only for AccuracyAtRecall

    std::string to_string() const;
    // "f1", "accuracy", "auc" or "accuracy-subject-to-recall(r)". ConfigError otherwise.
    static Objective parse(std::string_view s);
    static Objective from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// Value maximized by the optimizer. With binary decisions the ROC curve has a
// single interior point, so "auc" is the balanced accuracy. Undefined values count as 0.
double objective_value(const Objective& o, const ConfusionCounts& c);

struct Triple {
    int dPov = 0, dStats = 0, dSpc = 0;
    int label = 0;
};

struct ScoreTriple {
    double sPov = 0, sStats = 0, sSpc = 0;
    int label = 0;
};

struct MvinModel {
    Lambda lambda{1.0 / 3, 1.0 / 3, 1.0 / 3};
    double epsilon = 0.5;
    Objective objective;
    double objectiveValue = 0;
    ConfusionCounts validation;
    bool scoreMode = false;

    int decide(int dPov, int dStats, int dSpc) const { return decide_hawk(fuse(lambda, dPov, dStats, dSpc), epsilon); }
    int decide_scores(double sPov, double sStats, double sSpc) const {
        return decide_hawk(fuse_scores(lambda, sPov, sStats, sSpc), epsilon);
    }
    nlohmann::json to_json() const;
    static MvinModel from_json(const nlohmann::json& j);
};

// Distinct W values attained on `triples` (values closer than 1e-12 merge).
std::vector<double> attainable_w(const Lambda& lambda, std::span<const Triple> triples);
// Threshold candidates for one lambda: the smallest attainable W and the midpoints between consecutive ones.
std::vector<double> epsilon_candidates(const Lambda& lambda, std::span<const Triple> triples);
// Simplex grid with the given step, first weight outermost.
std::vector<Lambda> lambda_grid(double step = 0.05);

// Exhaustive search over lambda_grid(step) x epsilon_candidates. Ties prefer
// higher recall, then fewer false positives, then scan order. Throws
// DegenerateClass without both labels and InfeasibleConstraint when no
// candidate meets the recall bound.
MvinModel optimize(std::span<const Triple> triples, const Objective& objective, double step = 0.05);
// Same search over fused scores; the result has scoreMode set.
MvinModel optimize_scores(std::span<const ScoreTriple> triples, const Objective& objective, double step = 0.05);

} // namespace hawk::eval
