#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

namespace hawk::learn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using json = nlohmann::json;

// Trainable tensor plus its gradient accumulator and Adam moments.
struct Param {
    Matrix value, grad, m, v;

    void resize(Eigen::Index rows, Eigen::Index cols);
    void zero_grad() { grad.setZero(); }
};

enum class Activation { Linear, Elu, Sigmoid };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

double sigmoid(double z);
Matrix activate(Activation a, const Matrix& z);
// dL/dz from dL/dy, with z the pre-activation and y = activate(z).
Matrix activation_backward(Activation a, const Matrix& z, const Matrix& y, const Matrix& dy);

enum class OptimizerKind { Adam, Sgd };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double learningRate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double clipNorm = 5.0; // global gradient norm; 0 disables
};

class Optimizer {
public:
    explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}
    void step(const std::vector<Param*>& params);

private:
    OptimizerConfig cfg_;
    long t_ = 0;
};

struct LossTerm {
    double loss = 0;
    double dlogit = 0;
};

// Class-weighted binary cross-entropy computed from a logit (stable for large |z|).
LossTerm weighted_bce_logit(double logit, int y, double positiveWeight = 1, double negativeWeight = 1);
// Same loss from a probability, clamped away from 0 and 1.
double weighted_bce(double p, int y, double positiveWeight = 1, double negativeWeight = 1);

struct TrainConfig {
    OptimizerConfig optimizer;
    int epochs = 10;
    int batchSize = 32;
    std::uint64_t seed = 1;
    double positiveWeight = 9;
    double negativeWeight = 1;
};

// `sample(i, rng)` returns the loss of sample i and adds its gradient into the
// parameters. Gradients are averaged over each mini-batch before the update.
// Returns the mean sample loss of every epoch. Throws NonFiniteLoss (1-based epoch).
using SampleFn = std::function<double(std::size_t, std::mt19937_64&)>;
// `epochEnd(epoch)` runs after every epoch's updates when given.
std::vector<double> train_loop(std::size_t n, const TrainConfig& cfg, const std::vector<Param*>& params,
                               const SampleFn& sample, const std::function<void(int)>& epochEnd = {});

// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-6) over every
// parameter entry. `backward` must add the gradient of the loss computed by
// `loss` into the params' grad fields (they are zeroed first).
double grad_check(const std::vector<Param*>& params, const std::function<double()>& loss,
                  const std::function<void()>& backward, double eps = 1e-5);

json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

void to_json(json& j, const OptimizerConfig& c);
void from_json(const json& j, OptimizerConfig& c);
void to_json(json& j, const TrainConfig& c);
void from_json(const json& j, TrainConfig& c);

} // namespace hawk::learn
