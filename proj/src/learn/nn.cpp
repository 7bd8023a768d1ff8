#include "hawk/learn/nn.hpp"

#include "hawk/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hawk::learn {

void Param::resize(Eigen::Index rows, Eigen::Index cols) {
    value = Matrix::Zero(rows, cols);
    grad = Matrix::Zero(rows, cols);
    m = Matrix::Zero(rows, cols);
    v = Matrix::Zero(rows, cols);
}

std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Elu: return "elu";
    case Activation::Sigmoid: return "sigmoid";
    }
    return "linear";
}

Activation activation_from_string(std::string_view s) {
    if (s == "linear") return Activation::Linear;
    if (s == "elu") return Activation::Elu;
    if (s == "sigmoid") return Activation::Sigmoid;
    throw ConfigError("unknown activation '" + std::string(s) + "'");
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Matrix activate(Activation a, const Matrix& z) {
    switch (a) {
    case Activation::Linear: return z;
    case Activation::Elu: return z.unaryExpr([](double x) { return x > 0 ? x : std::expm1(x); });
    case Activation::Sigmoid: return z.unaryExpr([](double x) { return sigmoid(x); });
    }
    return z;
}

Matrix activation_backward(Activation a, const Matrix& z, const Matrix& y, const Matrix& dy) {
    switch (a) {
    case Activation::Linear: return dy;
    case Activation::Elu:
        return dy.binaryExpr(z, [](double d, double x) { return x > 0 ? d : d * std::exp(x); });
    case Activation::Sigmoid: return dy.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
    }
    return dy;
}

void Optimizer::step(const std::vector<Param*>& params) {
    if (cfg_.clipNorm > 0) {
        double sq = 0;
        for (const Param* p : params) sq += p->grad.squaredNorm();
        const double norm = std::sqrt(sq);
        if (norm > cfg_.clipNorm)
            for (Param* p : params) p->grad *= cfg_.clipNorm / norm;
    }
    ++t_;
    const double lr = cfg_.learningRate;
    if (cfg_.kind == OptimizerKind::Sgd) {
        for (Param* p : params) p->value -= lr * p->grad;
        return;
    }
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (Param* p : params) {
        p->m = cfg_.beta1 * p->m + (1 - cfg_.beta1) * p->grad;
        p->v = cfg_.beta2 * p->v + (1 - cfg_.beta2) * p->grad.cwiseProduct(p->grad);
        p->value.array() -= lr * (p->m.array() / c1) / ((p->v.array() / c2).sqrt() + cfg_.epsilon);
    }
}

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

} // namespace

LossTerm weighted_bce_logit(double logit, int y, double positiveWeight, double negativeWeight) {
    const double w = y == 1 ? positiveWeight : negativeWeight;
    // -log(sigmoid(z)) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z)
    const double loss = y == 1 ? softplus(-logit) : softplus(logit);
    return {w * loss, w * (sigmoid(logit) - y)};
}

double weighted_bce(double p, int y, double positiveWeight, double negativeWeight) {
    constexpr double kClamp = 1e-15;
    p = std::clamp(p, kClamp, 1 - kClamp);
    return y == 1 ? -positiveWeight * std::log(p) : -negativeWeight * std::log(1 - p);
}

std::vector<double> train_loop(std::size_t n, const TrainConfig& cfg, const std::vector<Param*>& params,
                               const SampleFn& sample, const std::function<void(int)>& epochEnd) {
    if (cfg.epochs < 0 || cfg.batchSize < 1) throw ConfigError("epochs must be >= 0 and batchSize >= 1");
    std::mt19937_64 rng(cfg.seed);
    Optimizer opt(cfg.optimizer);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> history;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batchSize)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batchSize));
            for (Param* p : params) p->zero_grad();
            for (std::size_t i = start; i < end; ++i) {
                const double l = sample(order[i], rng);
                if (!std::isfinite(l)) throw NonFiniteLoss(epoch);
                total += l;
            }
            const double scale = 1.0 / static_cast<double>(end - start);
            for (Param* p : params) {
                p->grad *= scale;
                if (!p->grad.allFinite()) throw NonFiniteLoss(epoch);
            }
            opt.step(params);
        }
        history.push_back(n ? total / static_cast<double>(n) : 0.0);
        if (epochEnd) epochEnd(epoch);
    }
    return history;
}

double grad_check(const std::vector<Param*>& params, const std::function<double()>& loss,
                  const std::function<void()>& backward, double eps) {
    for (Param* p : params) p->zero_grad();
    backward();
    double worst = 0;
    for (Param* p : params) {
        const Matrix analytic = p->grad;
        for (Eigen::Index i = 0; i < p->value.size(); ++i) {
            double& x = p->value.data()[i];
            const double saved = x;
            x = saved + eps;
            const double up = loss();
            x = saved - eps;
            const double down = loss();
            x = saved;
            const double numeric = (up - down) / (2 * eps);
            const double a = analytic.data()[i];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
    }
    return worst;
}

json to_json(const Matrix& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.size(); ++i) data.push_back(m.data()[i]);
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw SchemaError("matrix payload size does not match its shape");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = data[static_cast<std::size_t>(i)].get<double>();
    return m;
}

void to_json(json& j, const OptimizerConfig& c) {
    j = {{"kind", c.kind == OptimizerKind::Adam ? "adam" : "sgd"},
         {"learningRate", c.learningRate},
         {"beta1", c.beta1},
         {"beta2", c.beta2},
         {"epsilon", c.epsilon},
         {"clipNorm", c.clipNorm}};
}

void from_json(const json& j, OptimizerConfig& c) {
    const auto kind = j.value("kind", std::string("adam"));
    if (kind != "adam" && kind != "sgd") throw ConfigError("optimizer.kind must be adam or sgd");
    c.kind = kind == "adam" ? OptimizerKind::Adam : OptimizerKind::Sgd;
    c.learningRate = j.value("learningRate", c.learningRate);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.clipNorm = j.value("clipNorm", c.clipNorm);
}

void to_json(json& j, const TrainConfig& c) {
    j = {{"optimizer", c.optimizer},       {"epochs", c.epochs},
         {"batchSize", c.batchSize},       {"seed", c.seed},
         {"positiveWeight", c.positiveWeight}, {"negativeWeight", c.negativeWeight}};
}

void from_json(const json& j, TrainConfig& c) {
    if (j.contains("optimizer")) c.optimizer = j.at("optimizer").get<OptimizerConfig>();
    c.epochs = j.value("epochs", c.epochs);
    c.batchSize = j.value("batchSize", c.batchSize);
    c.seed = j.value("seed", c.seed);
    c.positiveWeight = j.value("positiveWeight", c.positiveWeight);
    c.negativeWeight = j.value("negativeWeight", c.negativeWeight);
    if (c.epochs < 0 || c.batchSize < 1) throw ConfigError("epochs must be >= 0 and batchSize >= 1");
}

} // namespace hawk::learn
