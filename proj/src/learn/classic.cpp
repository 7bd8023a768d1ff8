#include "hawk/learn/classic.hpp"

#include "hawk/error.hpp"

#include <cmath>
#include <numeric>

namespace hawk::learn {

namespace {

constexpr std::array<std::string_view, 7> kKindNames{"mlp",         "logreg", "random-forest", "linear-svm",
                                                      "gaussian-nb", "qda",    "decision-tree"};

void check_xy(const Matrix& X, const std::vector<int>& y) {
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw ConfigError("sample and label counts differ");
    for (int v : y)
        if (v != 0 && v != 1) throw ConfigError("labels must be 0 or 1");
    if (y.empty()) throw DegenerateClass("no training samples");
}

void require(bool trained, ClassifierKind k) {
    if (!trained) throw UntrainedModel(std::string(to_string(k)) + " classifier is not trained");
}

void check_width(const Vector& x, Eigen::Index d) {
    if (x.size() != d) throw ConfigError("input width does not match the trained model");
}

double log_sum_exp(double a, double b) {
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

class LogReg final : public Classifier {
public:
    explicit LogReg(const ClassicConfig& c) : cfg_(c) {}
    ClassifierKind kind() const override { return ClassifierKind::LogReg; }
    bool trained() const override { return w_.size() > 0; }

    // Newton iterations on the L2-penalized log-likelihood (bias unpenalized).
    void fit(const Matrix& X, const std::vector<int>& y, std::uint64_t) override {
        check_xy(X, y);
        const Eigen::Index n = X.rows(), d = X.cols();
        Matrix A(n, d + 1);
        A << X, Vector::Ones(n);
        Vector t(n);
        for (Eigen::Index i = 0; i < n; ++i) t(i) = y[static_cast<std::size_t>(i)];
        Vector w = Vector::Zero(d + 1);
        Vector penalty = Vector::Constant(d + 1, cfg_.logregL2 * static_cast<double>(n));
        penalty(d) = 1e-10;
        for (int it = 0; it < cfg_.logregIterations; ++it) {
            const Vector p = (A * w).unaryExpr([](double z) { return sigmoid(z); });
            const Vector g = A.transpose() * (p - t) + penalty.cwiseProduct(w);
            const Vector s = p.cwiseProduct((1.0 - p.array()).matrix());
            Matrix Hm = A.transpose() * s.asDiagonal() * A;
            Hm.diagonal() += penalty;
            const Vector step = Hm.ldlt().solve(g);
            if (!step.allFinite()) break;
            w -= step;
            if (step.norm() < 1e-10) break;
        }
        w_ = w;
    }

    double score(const Vector& x) const override {
        require(trained(), kind());
        check_width(x, w_.size() - 1);
        return sigmoid(w_.head(x.size()).dot(x) + w_(x.size()));
    }

    json parameters() const override { return {{"w", to_json(w_)}}; }
    void load(const json& j) override { w_ = matrix_from_json(j.at("w")); }

private:
    ClassicConfig cfg_;
    Vector w_;
};

class GaussianNb final : public Classifier {
public:
    explicit GaussianNb(const ClassicConfig& c) : cfg_(c) {}
    ClassifierKind kind() const override { return ClassifierKind::GaussianNb; }
    bool trained() const override { return mean_.size() > 0; }

    void fit(const Matrix& X, const std::vector<int>& y, std::uint64_t) override {
        check_xy(X, y);
        const Eigen::Index d = X.cols();
        mean_ = Matrix::Zero(2, d);
        var_ = Matrix::Zero(2, d);
        std::array<double, 2> count{0, 0};
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const int c = y[static_cast<std::size_t>(i)];
            mean_.row(c) += X.row(i);
            count[static_cast<std::size_t>(c)] += 1;
        }
        if (count[0] < 2 || count[1] < 2) throw DegenerateClass("gaussian-nb needs two samples per class");
        for (int c = 0; c < 2; ++c) mean_.row(c) /= count[static_cast<std::size_t>(c)];
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const int c = y[static_cast<std::size_t>(i)];
            var_.row(c) += (X.row(i) - mean_.row(c)).array().square().matrix();
        }
        for (int c = 0; c < 2; ++c) {
            var_.row(c) /= count[static_cast<std::size_t>(c)];
            var_.row(c) = var_.row(c).cwiseMax(cfg_.varianceFloor);
            logPrior_[static_cast<std::size_t>(c)] = std::log(count[static_cast<std::size_t>(c)] / (count[0] + count[1]));
        }
    }

    double score(const Vector& x) const override {
        require(trained(), kind());
        check_width(x, mean_.cols());
        std::array<double, 2> ll{};
        for (int c = 0; c < 2; ++c) {
            const auto m = mean_.row(c).transpose().array();
            const auto v = var_.row(c).transpose().array();
            ll[static_cast<std::size_t>(c)] =
                logPrior_[static_cast<std::size_t>(c)] -
                0.5 * ((2 * M_PI * v).log() + (x.array() - m).square() / v).sum();
        }
        return std::exp(ll[1] - log_sum_exp(ll[0], ll[1]));
    }

    json parameters() const override {
        return {{"mean", to_json(mean_)}, {"var", to_json(var_)}, {"logPrior", logPrior_}};
    }
    void load(const json& j) override {
        mean_ = matrix_from_json(j.at("mean"));
        var_ = matrix_from_json(j.at("var"));
        logPrior_ = j.at("logPrior").get<std::array<double, 2>>();
    }

private:
    ClassicConfig cfg_;
    Matrix mean_, var_;
    std::array<double, 2> logPrior_{};
};

class Qda final : public Classifier {
public:
    explicit Qda(const ClassicConfig& c) : cfg_(c) {}
    ClassifierKind kind() const override { return ClassifierKind::Qda; }
    bool trained() const override { return mean_[0].size() > 0; }

    void fit(const Matrix& X, const std::vector<int>& y, std::uint64_t) override {
        check_xy(X, y);
        const Eigen::Index d = X.cols();
        for (int c = 0; c < 2; ++c) {
            std::vector<Eigen::Index> rows;
            for (Eigen::Index i = 0; i < X.rows(); ++i)
                if (y[static_cast<std::size_t>(i)] == c) rows.push_back(i);
            if (rows.size() < 2) throw DegenerateClass("qda needs two samples per class");
            Matrix Xc(static_cast<Eigen::Index>(rows.size()), d);
            for (std::size_t r = 0; r < rows.size(); ++r) Xc.row(static_cast<Eigen::Index>(r)) = X.row(rows[r]);
            const Vector mu = Xc.colwise().mean().transpose();
            const Matrix centered = Xc.rowwise() - mu.transpose();
            Matrix cov = centered.transpose() * centered / static_cast<double>(rows.size() - 1);
            if (cfg_.qdaRegularize) cov.diagonal().array() += cfg_.qdaRegularization;
            Eigen::LLT<Matrix> llt(cov);
            if (llt.info() != Eigen::Success) throw SingularCovariance();
            const Matrix L = llt.matrixL();
            const double lo = L.diagonal().minCoeff(), hi = L.diagonal().maxCoeff();
            if (!cfg_.qdaRegularize && !(lo * lo > 1e-12 * hi * hi)) throw SingularCovariance();
            const auto k = static_cast<std::size_t>(c);
            mean_[k] = mu;
            cholL_[k] = L;
            logDet_[k] = 2 * L.diagonal().array().log().sum();
            logPrior_[k] = std::log(static_cast<double>(rows.size()) / static_cast<double>(X.rows()));
        }
    }

    double score(const Vector& x) const override {
        require(trained(), kind());
        check_width(x, mean_[0].size());
        std::array<double, 2> ll{};
        for (std::size_t c = 0; c < 2; ++c) {
            const Vector z = cholL_[c].triangularView<Eigen::Lower>().solve(x - mean_[c]);
            ll[c] = logPrior_[c] - 0.5 * logDet_[c] - 0.5 * z.squaredNorm();
        }
        return std::exp(ll[1] - log_sum_exp(ll[0], ll[1]));
    }

    json parameters() const override {
        json j;
        for (std::size_t c = 0; c < 2; ++c)
            j["class" + std::to_string(c)] = {{"mean", to_json(mean_[c])},
                                              {"cholL", to_json(cholL_[c])},
                                              {"logDet", logDet_[c]},
                                              {"logPrior", logPrior_[c]}};
        return j;
    }
    void load(const json& j) override {
        for (std::size_t c = 0; c < 2; ++c) {
            const auto& e = j.at("class" + std::to_string(c));
            mean_[c] = matrix_from_json(e.at("mean"));
            cholL_[c] = matrix_from_json(e.at("cholL"));
            logDet_[c] = e.at("logDet").get<double>();
            logPrior_[c] = e.at("logPrior").get<double>();
        }
    }

private:
    ClassicConfig cfg_;
    std::array<Vector, 2> mean_;
    std::array<Matrix, 2> cholL_;
    std::array<double, 2> logDet_{}, logPrior_{};
};

// Pegasos-style subgradient descent on the L2-regularized hinge loss.
class LinearSvm final : public Classifier {
public:
    explicit LinearSvm(const ClassicConfig& c) : cfg_(c) {}
    ClassifierKind kind() const override { return ClassifierKind::LinearSvm; }
    bool trained() const override { return w_.size() > 0; }

    void fit(const Matrix& X, const std::vector<int>& y, std::uint64_t seed) override {
        check_xy(X, y);
        const Eigen::Index d = X.cols();
        Vector w = Vector::Zero(d);
        double b = 0;
        std::mt19937_64 rng(seed);
        std::vector<std::size_t> order(y.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const double lambda = cfg_.svmLambda;
        long t = 0;
        for (int e = 0; e < cfg_.svmEpochs; ++e) {
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t i : order) {
                ++t;
                const double eta = 1.0 / (lambda * static_cast<double>(t + 100));
                const double s = y[i] == 1 ? 1.0 : -1.0;
                const auto xi = X.row(static_cast<Eigen::Index>(i)).transpose();
                const double margin = s * (w.dot(xi) + b);
                w *= 1 - eta * lambda;
                if (margin < 1) {
                    w += eta * s * xi;
                    b += eta * s;
                }
            }
        }
        w_ = w;
        b_ = b;
    }

    double margin(const Vector& x) const {
        require(trained(), kind());
        check_width(x, w_.size());
        return w_.dot(x) + b_;
    }
    double score(const Vector& x) const override { return sigmoid(margin(x)); }

    json parameters() const override { return {{"w", to_json(w_)}, {"b", b_}}; }
    void load(const json& j) override {
        w_ = matrix_from_json(j.at("w"));
        b_ = j.at("b").get<double>();
    }

private:
    ClassicConfig cfg_;
    Vector w_;
    double b_ = 0;
};

class Mlp final : public Classifier {
public:
    explicit Mlp(const ClassicConfig& c) : cfg_(c) {}
    ClassifierKind kind() const override { return ClassifierKind::Mlp; }
    bool trained() const override { return net_.input_width() > 0; }

    void fit(const Matrix& X, const std::vector<int>& y, std::uint64_t seed) override {
        check_xy(X, y);
        std::vector<LayerSpec> hidden;
        for (int w : cfg_.mlpHidden) hidden.push_back({w, Activation::Elu});
        net_ = BinaryNet(static_cast<int>(X.cols()), hidden, seed);
        TrainConfig t = cfg_.mlpTrain;
        t.seed = seed;
        net_.fit(X, y, t);
    }

    double score(const Vector& x) const override {
        require(trained(), kind());
        return net_.probability(x);
    }

    json parameters() const override { return net_.to_json(); }
    void load(const json& j) override { net_ = BinaryNet::from_json(j); }

private:
    ClassicConfig cfg_;
    BinaryNet net_;
};

class Forest final : public Classifier {
public:
    explicit Forest(const ClassicConfig& c) : cfg_(c) {}
    ClassifierKind kind() const override { return ClassifierKind::RandomForest; }
    bool trained() const override { return forest_.trained(); }
    void fit(const Matrix& X, const std::vector<int>& y, std::uint64_t seed) override {
        check_xy(X, y);
        forest_.fit(X, y, cfg_.forest, seed);
    }
    double score(const Vector& x) const override {
        require(trained(), kind());
        return forest_.predict_proba(x)[1];
    }
    json parameters() const override { return forest_.to_json(); }
    void load(const json& j) override { forest_ = RandomForest::from_json(j); }

private:
    ClassicConfig cfg_;
    RandomForest forest_;
};

class Tree final : public Classifier {
public:
    explicit Tree(const ClassicConfig& c) : cfg_(c) {}
    ClassifierKind kind() const override { return ClassifierKind::DecisionTree; }
    bool trained() const override { return tree_.trained(); }
    void fit(const Matrix& X, const std::vector<int>& y, std::uint64_t seed) override {
        check_xy(X, y);
        std::mt19937_64 rng(seed);
        tree_.fit(X, y, cfg_.tree, rng);
    }
    double score(const Vector& x) const override {
        require(trained(), kind());
        return tree_.probability(x);
    }
    json parameters() const override { return tree_.to_json(); }
    void load(const json& j) override { tree_ = DecisionTree::from_json(j); }

private:
    ClassicConfig cfg_;
    DecisionTree tree_;
};

} // namespace

std::string_view to_string(ClassifierKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<ClassifierKind> classifier_kind_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == s) return static_cast<ClassifierKind>(i);
    return std::nullopt;
}

bool is_tree_kind(ClassifierKind k) { return k == ClassifierKind::RandomForest || k == ClassifierKind::DecisionTree; }

std::unique_ptr<Classifier> make_classifier(ClassifierKind kind, const ClassicConfig& cfg) {
    switch (kind) {
    case ClassifierKind::Mlp: return std::make_unique<Mlp>(cfg);
    case ClassifierKind::LogReg: return std::make_unique<LogReg>(cfg);
    case ClassifierKind::RandomForest: return std::make_unique<Forest>(cfg);
    case ClassifierKind::LinearSvm: return std::make_unique<LinearSvm>(cfg);
    case ClassifierKind::GaussianNb: return std::make_unique<GaussianNb>(cfg);
    case ClassifierKind::Qda: return std::make_unique<Qda>(cfg);
    case ClassifierKind::DecisionTree: return std::make_unique<Tree>(cfg);
    }
    throw ConfigError("unknown classifier kind");
}

void to_json(json& j, const ClassicConfig& c) {
    j = {{"forest", c.forest},
         {"tree", {{"maxDepth", c.tree.maxDepth}, {"minSamplesSplit", c.tree.minSamplesSplit},
                   {"minSamplesLeaf", c.tree.minSamplesLeaf}, {"maxFeatures", c.tree.maxFeatures}}},
         {"mlpHidden", c.mlpHidden},
         {"mlpTrain", c.mlpTrain},
         {"logregL2", c.logregL2},
         {"logregIterations", c.logregIterations},
         {"svmLambda", c.svmLambda},
         {"svmEpochs", c.svmEpochs},
         {"varianceFloor", c.varianceFloor},
         {"qdaRegularization", c.qdaRegularization},
         {"qdaRegularize", c.qdaRegularize}};
}

void from_json(const json& j, ClassicConfig& c) {
    if (j.contains("forest")) c.forest = j.at("forest").get<ForestConfig>();
    if (j.contains("tree")) {
        const auto& t = j.at("tree");
        c.tree.maxDepth = t.value("maxDepth", c.tree.maxDepth);
        c.tree.minSamplesSplit = t.value("minSamplesSplit", c.tree.minSamplesSplit);
        c.tree.minSamplesLeaf = t.value("minSamplesLeaf", c.tree.minSamplesLeaf);
        c.tree.maxFeatures = t.value("maxFeatures", c.tree.maxFeatures);
    }
    c.mlpHidden = j.value("mlpHidden", c.mlpHidden);
    if (j.contains("mlpTrain")) c.mlpTrain = j.at("mlpTrain").get<TrainConfig>();
    c.logregL2 = j.value("logregL2", c.logregL2);
    c.logregIterations = j.value("logregIterations", c.logregIterations);
    c.svmLambda = j.value("svmLambda", c.svmLambda);
    c.svmEpochs = j.value("svmEpochs", c.svmEpochs);
    c.varianceFloor = j.value("varianceFloor", c.varianceFloor);
    c.qdaRegularization = j.value("qdaRegularization", c.qdaRegularization);
    c.qdaRegularize = j.value("qdaRegularize", c.qdaRegularize);
    if (c.svmLambda <= 0 || c.varianceFloor <= 0 || c.qdaRegularization < 0 || c.logregL2 < 0)
        throw ConfigError("classifier config out of range");
}

} // namespace hawk::learn
