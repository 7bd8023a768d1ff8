#include "hawk/learn/trees.hpp"

#include "hawk/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hawk::learn {

namespace {

double gini(double n1, double n) {
    if (n <= 0) return 0;
    const double p = n1 / n;
    return 2 * p * (1 - p);
}

} // namespace

void DecisionTree::fit(const Matrix& X, const std::vector<int>& y, const TreeConfig& cfg, std::mt19937_64& rng,
                       std::vector<std::size_t> rows) {
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw ConfigError("sample and label counts differ");
    if (y.empty()) throw DegenerateClass("cannot fit a tree on zero samples");
    if (cfg.maxDepth < 0 || cfg.minSamplesLeaf < 1 || cfg.minSamplesSplit < 2)
        throw ConfigError("tree config out of range");
    if (rows.empty()) {
        rows.resize(y.size());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    nodes_.clear();
    grow(X, y, rows, 0, cfg, rng);
}

int DecisionTree::grow(const Matrix& X, const std::vector<int>& y, std::vector<std::size_t>& rows, int depth,
                       const TreeConfig& cfg, std::mt19937_64& rng) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double n1 = 0;
    for (std::size_t r : rows) n1 += y[r];
    const double n = static_cast<double>(rows.size());
    nodes_[static_cast<std::size_t>(id)].p1 = n1 / n;
    if (depth >= cfg.maxDepth || rows.size() < static_cast<std::size_t>(cfg.minSamplesSplit) || n1 == 0 || n1 == n)
        return id;

    const int d = static_cast<int>(X.cols());
    std::vector<int> features(static_cast<std::size_t>(d));
    std::iota(features.begin(), features.end(), 0);
    const int tries = cfg.maxFeatures > 0 ? std::min(cfg.maxFeatures, d) : d;
    if (tries < d) {
        // partial Fisher-Yates
        for (int i = 0; i < tries; ++i) {
            std::uniform_int_distribution<int> pick(i, d - 1);
            std::swap(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(pick(rng))]);
        }
        features.resize(static_cast<std::size_t>(tries));
    }

    double best = std::numeric_limits<double>::infinity();
    int bestFeature = -1;
    double bestThreshold = 0;
    const auto minLeaf = static_cast<std::size_t>(cfg.minSamplesLeaf);
    std::vector<std::size_t> order = rows;
    for (int f : features) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return X(static_cast<Eigen::Index>(a), f) < X(static_cast<Eigen::Index>(b), f);
        });
        double left1 = 0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            left1 += y[order[i]];
            const double a = X(static_cast<Eigen::Index>(order[i]), f);
            const double b = X(static_cast<Eigen::Index>(order[i + 1]), f);
            if (!(a < b)) continue;
            const std::size_t nl = i + 1, nr = order.size() - nl;
            if (nl < minLeaf || nr < minLeaf) continue;
            const double dl = static_cast<double>(nl), dr = static_cast<double>(nr);
            const double impurity = (dl * gini(left1, dl) + dr * gini(n1 - left1, dr)) / n;
            if (impurity < best) {
                best = impurity;
                bestFeature = f;
                double mid = a + (b - a) / 2;
                if (!(mid < b)) mid = a;
                bestThreshold = mid;
            }
        }
    }
    if (bestFeature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows)
        (X(static_cast<Eigen::Index>(r), bestFeature) <= bestThreshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(X, y, left, depth + 1, cfg, rng);
    const int r = grow(X, y, right, depth + 1, cfg, rng);
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = bestFeature;
    node.threshold = bestThreshold;
    node.left = l;
    node.right = r;
    return id;
}

double DecisionTree::probability(const Eigen::Ref<const Vector>& x) const {
    if (nodes_.empty()) throw UntrainedModel("decision tree is not trained");
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const Node& n = nodes_[i];
        if (n.feature >= x.size()) throw ConfigError("input narrower than the tree's features");
        i = static_cast<std::size_t>(x(n.feature) <= n.threshold ? n.left : n.right);
    }
    return nodes_[i].p1;
}

int DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<int> level(nodes_.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (nodes_[i].feature >= 0) {
            level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
            level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
        }
    }
    return deepest;
}

json DecisionTree::to_json() const {
    json f = json::array(), t = json::array(), l = json::array(), r = json::array(), p = json::array();
    for (const auto& n : nodes_) {
        f.push_back(n.feature);
        t.push_back(n.threshold);
        l.push_back(n.left);
        r.push_back(n.right);
        p.push_back(n.p1);
    }
    return {{"feature", f}, {"threshold", t}, {"left", l}, {"right", r}, {"p1", p}};
}

DecisionTree DecisionTree::from_json(const json& j) {
    DecisionTree tree;
    const auto& f = j.at("feature");
    const std::size_t n = f.size();
    for (const char* key : {"threshold", "left", "right", "p1"})
        if (j.at(key).size() != n) throw SchemaError("tree arrays differ in length");
    tree.nodes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Node& node = tree.nodes_[i];
        node.feature = f[i].get<int>();
        node.threshold = j["threshold"][i].get<double>();
        node.left = j["left"][i].get<int>();
        node.right = j["right"][i].get<int>();
        node.p1 = j["p1"][i].get<double>();
        if (node.feature >= 0 && (node.left <= static_cast<int>(i) || node.right <= static_cast<int>(i) ||
                                  node.left >= static_cast<int>(n) || node.right >= static_cast<int>(n)))
            throw SchemaError("tree child index out of range");
    }
    return tree;
}

void to_json(json& j, const ForestConfig& c) {
    j = {{"trees", c.trees},
         {"maxDepth", c.maxDepth},
         {"featureFraction", c.featureFraction},
         {"bootstrap", c.bootstrap},
         {"minSamplesLeaf", c.minSamplesLeaf}};
}

void from_json(const json& j, ForestConfig& c) {
    c.trees = j.value("trees", c.trees);
    c.maxDepth = j.value("maxDepth", c.maxDepth);
    c.featureFraction = j.value("featureFraction", c.featureFraction);
    c.bootstrap = j.value("bootstrap", c.bootstrap);
    c.minSamplesLeaf = j.value("minSamplesLeaf", c.minSamplesLeaf);
    if (c.trees < 1 || c.maxDepth < 0 || c.featureFraction < 0 || c.featureFraction > 1 || c.minSamplesLeaf < 1)
        throw ConfigError("forest config out of range");
}

void RandomForest::fit(const Matrix& X, const std::vector<int>& y, const ForestConfig& cfg, std::uint64_t seed) {
    if (cfg.trees < 1) throw ConfigError("forest needs at least one tree");
    const int d = static_cast<int>(X.cols());
    TreeConfig tc;
    tc.maxDepth = cfg.maxDepth;
    tc.minSamplesLeaf = cfg.minSamplesLeaf;
    tc.maxFeatures = cfg.featureFraction > 0
                         ? std::max(1, static_cast<int>(std::lround(cfg.featureFraction * d)))
                         : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(d)))));
    trees_.assign(static_cast<std::size_t>(cfg.trees), DecisionTree{});
    const std::size_t n = y.size();
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(t)};
        std::mt19937_64 rng(seq);
        std::vector<std::size_t> rows;
        if (cfg.bootstrap && n > 0) {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            rows.resize(n);
            for (auto& r : rows) r = pick(rng);
        }
        trees_[t].fit(X, y, tc, rng, std::move(rows));
    }
}

std::vector<double> RandomForest::tree_probabilities(const Eigen::Ref<const Vector>& x) const {
    if (trees_.empty()) throw UntrainedModel("random forest is not trained");
    std::vector<double> p;
    p.reserve(trees_.size());
    for (const auto& t : trees_) p.push_back(t.probability(x));
    return p;
}

std::array<double, 2> RandomForest::predict_proba(const Eigen::Ref<const Vector>& x) const {
    const auto p = tree_probabilities(x);
    const double p1 = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
    return {1 - p1, p1};
}

json RandomForest::to_json() const {
    json trees = json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json());
    return {{"trees", std::move(trees)}};
}

RandomForest RandomForest::from_json(const json& j) {
    RandomForest f;
    for (const auto& t : j.at("trees")) f.trees_.push_back(DecisionTree::from_json(t));
    return f;
}

} // namespace hawk::learn
