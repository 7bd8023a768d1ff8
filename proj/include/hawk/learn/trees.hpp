#pragma once

#include "hawk/learn/nn.hpp"

#include <array>

namespace hawk::learn {

struct TreeConfig {
    int maxDepth = 12;
    int minSamplesSplit = 2;
    int minSamplesLeaf = 1;
    int maxFeatures = 0; // features tried per split; 0 = all
};

// CART with Gini impurity. Leaves store the class-1 fraction of their samples.
class DecisionTree {
public:
    // Rows of X are samples; `rows` selects (possibly repeated) training rows.
    void fit(const Matrix& X, const std::vector<int>& y, const TreeConfig& cfg, std::mt19937_64& rng,
             std::vector<std::size_t> rows = {});
    bool trained() const { return !nodes_.empty(); }
    double probability(const Eigen::Ref<const Vector>& x) const;
    int depth() const;
    std::size_t node_count() const { return nodes_.size(); }

    json to_json() const;
    static DecisionTree from_json(const json& j);

private:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0;
        int left = -1, right = -1;
        double p1 = 0;
    };
    int grow(const Matrix& X, const std::vector<int>& y, std::vector<std::size_t>& rows, int depth,
             const TreeConfig& cfg, std::mt19937_64& rng);

    std::vector<Node> nodes_;
};

struct ForestConfig {
    int trees = 100;
    int maxDepth = 12;
    double featureFraction = 0; // 0 = sqrt(d) features per split
    bool bootstrap = true;
    int minSamplesLeaf = 1;
};

void to_json(json& j, const ForestConfig& c);
void from_json(const json& j, ForestConfig& c);

// Argmax of a two-class distribution; an exact tie goes to class 0.
inline int decide_class(const std::array<double, 2>& p) { return p[1] > p[0] ? 1 : 0; }

class RandomForest {
public:
    void fit(const Matrix& X, const std::vector<int>& y, const ForestConfig& cfg, std::uint64_t seed);
    bool trained() const { return !trees_.empty(); }
    // Mean of the per-tree class distributions.
    std::array<double, 2> predict_proba(const Eigen::Ref<const Vector>& x) const;
    std::vector<double> tree_probabilities(const Eigen::Ref<const Vector>& x) const;
    int decide(const Eigen::Ref<const Vector>& x) const { return decide_class(predict_proba(x)); }
    std::size_t size() const { return trees_.size(); }

    json to_json() const;
    static RandomForest from_json(const json& j);

private:
    std::vector<DecisionTree> trees_;
};

} // namespace hawk::learn
