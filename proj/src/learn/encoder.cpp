#include "hawk/learn/encoder.hpp"

#include "hawk/error.hpp"

namespace hawk::learn {

void to_json(json& j, const EncoderConfig& c) {
    j = {{"inputWidth", c.inputWidth}, {"layers", c.layers},           {"hidden", c.hidden},
         {"dropout", c.dropout},       {"outputWidth", c.outputWidth}, {"maxLength", c.maxLength}};
}

void from_json(const json& j, EncoderConfig& c) {
    c.inputWidth = j.value("inputWidth", c.inputWidth);
    c.layers = j.value("layers", c.layers);
    c.hidden = j.value("hidden", c.hidden);
    c.dropout = j.value("dropout", c.dropout);
    c.outputWidth = j.value("outputWidth", c.outputWidth);
    c.maxLength = j.value("maxLength", c.maxLength);
    if (c.layers < 1 || c.hidden < 1 || c.outputWidth < 1 || c.maxLength < 1 || c.dropout < 0 || c.dropout >= 1)
        throw ConfigError("encoder config out of range");
}

SequenceEncoder::SequenceEncoder(const EncoderConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    json probe;
    learn::to_json(probe, cfg);
    learn::from_json(probe, cfg_); // range checks
    if (cfg.inputWidth < 1) throw ConfigError("encoder inputWidth must be positive");
    std::mt19937_64 rng(seed);
    for (int l = 0; l < cfg.layers; ++l) lstm_.emplace_back(l == 0 ? cfg.inputWidth : cfg.hidden, cfg.hidden, rng);
    attention_ = Attention(cfg.hidden, rng);
    d1_ = Dense(2 * cfg.hidden, cfg.outputWidth, Activation::Elu, rng);
    d2_ = Dense(cfg.outputWidth, cfg.outputWidth, Activation::Elu, rng);
    head_ = Dense(cfg.outputWidth, 1, Activation::Linear, rng);
}

Matrix SequenceEncoder::prepare(const Matrix& seq) const {
    if (seq.rows() == 0) throw EmptySequence();
    if (seq.cols() != cfg_.inputWidth)
        throw ConfigError("sequence width " + std::to_string(seq.cols()) + " != encoder input width " +
                          std::to_string(cfg_.inputWidth));
    const Eigen::Index T = std::min<Eigen::Index>(seq.rows(), cfg_.maxLength);
    return scaler_.apply_rows(seq.topRows(T)).transpose();
}

EncoderOutput SequenceEncoder::encode(const Matrix& seq) const {
    Matrix x = prepare(seq);
    for (const auto& l : lstm_) x = l.forward(x);
    Attention::Cache ac;
    const Matrix a = attention_.forward(x, &ac);
    Matrix z(2 * x.rows(), x.cols());
    z << a, x;
    const Matrix w = d2_.forward(d1_.forward(z));
    EncoderOutput out;
    out.steps = w.transpose();
    out.pooled = w.rowwise().mean();
    out.attention = std::move(ac.p);
    return out;
}

double SequenceEncoder::probability(const Matrix& seq) const {
    const Vector pooled = encode(seq).pooled;
    return sigmoid(head_.forward(pooled)(0, 0));
}

double SequenceEncoder::sample_loss(const Matrix& seq, int label, double positiveWeight, double negativeWeight,
                                    std::mt19937_64* dropoutRng, bool accumulate) {
    const Matrix x0 = prepare(seq);
    const auto L = lstm_.size();
    std::vector<LstmLayer::Cache> lc(L);
    std::vector<Matrix> masks(L);
    Matrix x = x0;
    for (std::size_t l = 0; l < L; ++l) {
        if (l > 0 && dropoutRng && cfg_.dropout > 0) {
            std::bernoulli_distribution keep(1.0 - cfg_.dropout);
            masks[l].resize(x.rows(), x.cols());
            for (Eigen::Index i = 0; i < masks[l].size(); ++i)
                masks[l].data()[i] = keep(*dropoutRng) ? 1.0 / (1.0 - cfg_.dropout) : 0.0;
            x = x.cwiseProduct(masks[l]);
        }
        x = lstm_[l].forward(x, &lc[l]);
    }
    Attention::Cache ac;
    const Matrix a = attention_.forward(x, &ac);
    Matrix z(2 * x.rows(), x.cols());
    z << a, x;
    Dense::Cache c1, c2, ch;
    const Matrix w = d2_.forward(d1_.forward(z, &c1), &c2);
    const Matrix pooled = w.rowwise().mean();
    const double logit = head_.forward(pooled, &ch)(0, 0);
    const LossTerm lt = weighted_bce_logit(logit, label, positiveWeight, negativeWeight);
    if (!accumulate) return lt.loss;

    const Matrix dpooled = head_.backward(Matrix::Constant(1, 1, lt.dlogit), ch);
    const Matrix dw = dpooled.replicate(1, w.cols()) / static_cast<double>(w.cols());
    const Matrix dz = d1_.backward(d2_.backward(dw, c2), c1);
    const Eigen::Index H = x.rows();
    Matrix dh = dz.bottomRows(H) + attention_.backward(dz.topRows(H), ac);
    for (std::size_t l = L; l-- > 0;) {
        dh = lstm_[l].backward(dh, lc[l]);
        if (masks[l].size()) dh = dh.cwiseProduct(masks[l]);
    }
    return lt.loss;
}

std::vector<double> SequenceEncoder::fit(const std::vector<const Matrix*>& seqs, const std::vector<int>& labels,
                                         const TrainConfig& train) {
    if (seqs.size() != labels.size()) throw ConfigError("sequence and label counts differ");
    std::vector<std::size_t> usable;
    Eigen::Index rows = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i)
        if (seqs[i]->rows() > 0) {
            usable.push_back(i);
            rows += std::min<Eigen::Index>(seqs[i]->rows(), cfg_.maxLength);
        }
    Matrix all(rows, cfg_.inputWidth);
    Eigen::Index r = 0;
    for (std::size_t i : usable) {
        const Matrix& s = *seqs[i];
        if (s.cols() != cfg_.inputWidth) throw ConfigError("sequence width does not match the encoder");
        const Eigen::Index T = std::min<Eigen::Index>(s.rows(), cfg_.maxLength);
        all.middleRows(r, T) = s.topRows(T);
        r += T;
    }
    scaler_.fit(all);
    auto ps = params();
    auto history = train_loop(usable.size(), train, ps, [&](std::size_t k, std::mt19937_64& rng) {
        const std::size_t i = usable[k];
        return sample_loss(*seqs[i], labels[i], train.positiveWeight, train.negativeWeight, &rng, true);
    });
    trained_ = true;
    return history;
}

std::vector<Param*> SequenceEncoder::params() {
    std::vector<Param*> ps;
    for (auto& l : lstm_)
        for (Param* p : l.params()) ps.push_back(p);
    for (Param* p : attention_.params()) ps.push_back(p);
    for (Dense* d : {&d1_, &d2_, &head_})
        for (Param* p : d->params()) ps.push_back(p);
    return ps;
}

json SequenceEncoder::to_json() const {
    json lstm = json::array();
    for (const auto& l : lstm_) lstm.push_back(l.to_json());
    json cfg;
    learn::to_json(cfg, cfg_);
    return {{"config", cfg},
            {"scaler", scaler_.to_json()},
            {"lstm", std::move(lstm)},
            {"attention", attention_.to_json()},
            {"dense1", d1_.to_json()},
            {"dense2", d2_.to_json()},
            {"head", head_.to_json()},
            {"trained", trained_}};
}

SequenceEncoder SequenceEncoder::from_json(const json& j) {
    SequenceEncoder e;
    e.cfg_ = j.at("config").get<EncoderConfig>();
    e.scaler_ = Standardizer::from_json(j.at("scaler"));
    for (const auto& l : j.at("lstm")) e.lstm_.push_back(LstmLayer::from_json(l));
    e.attention_ = Attention::from_json(j.at("attention"));
    e.d1_ = Dense::from_json(j.at("dense1"));
    e.d2_ = Dense::from_json(j.at("dense2"));
    e.head_ = Dense::from_json(j.at("head"));
    e.trained_ = j.value("trained", true);
    if (static_cast<int>(e.lstm_.size()) != e.cfg_.layers || e.lstm_.front().in() != e.cfg_.inputWidth)
        throw SchemaError("encoder checkpoint does not match its config");
    return e;
}

BinaryNet::BinaryNet(int inputWidth, const std::vector<LayerSpec>& hidden, std::uint64_t seed) {
    if (inputWidth < 1) throw ConfigError("BinaryNet input width must be positive");
    std::mt19937_64 rng(seed);
    int in = inputWidth;
    for (const auto& h : hidden) {
        if (h.width < 1) throw ConfigError("BinaryNet layer width must be positive");
        layers_.emplace_back(in, h.width, h.activation, rng);
        in = h.width;
    }
    layers_.emplace_back(in, 1, Activation::Linear, rng);
}

double BinaryNet::logit(const Vector& x) const {
    if (layers_.empty()) throw UntrainedModel("BinaryNet has no layers");
    if (x.size() != input_width()) throw ConfigError("BinaryNet input width mismatch");
    Matrix h = x;
    for (const auto& l : layers_) h = l.forward(h);
    return h(0, 0);
}

double BinaryNet::sample_loss(const Vector& x, int y, double positiveWeight, double negativeWeight,
                              bool accumulate) {
    std::vector<Dense::Cache> caches(layers_.size());
    Matrix h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) h = layers_[i].forward(h, &caches[i]);
    const LossTerm lt = weighted_bce_logit(h(0, 0), y, positiveWeight, negativeWeight);
    if (accumulate) {
        Matrix d = Matrix::Constant(1, 1, lt.dlogit);
        for (std::size_t i = layers_.size(); i-- > 0;) d = layers_[i].backward(d, caches[i]);
    }
    return lt.loss;
}

std::vector<double> BinaryNet::fit(const Matrix& X, const std::vector<int>& y, const TrainConfig& train) {
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw ConfigError("sample and label counts differ");
    if (X.cols() != input_width()) throw ConfigError("BinaryNet input width mismatch");
    auto ps = params();
    return train_loop(y.size(), train, ps, [&](std::size_t i, std::mt19937_64&) {
        return sample_loss(X.row(static_cast<Eigen::Index>(i)).transpose(), y[i], train.positiveWeight,
                           train.negativeWeight, true);
    });
}

std::vector<Param*> BinaryNet::params() {
    std::vector<Param*> ps;
    for (auto& l : layers_)
        for (Param* p : l.params()) ps.push_back(p);
    return ps;
}

json BinaryNet::to_json() const {
    json layers = json::array();
    for (const auto& l : layers_) layers.push_back(l.to_json());
    return {{"layers", std::move(layers)}};
}

BinaryNet BinaryNet::from_json(const json& j) {
    BinaryNet n;
    for (const auto& l : j.at("layers")) n.layers_.push_back(Dense::from_json(l));
    if (n.layers_.empty() || n.layers_.back().out() != 1) throw SchemaError("BinaryNet must end in one unit");
    return n;
}

} // namespace hawk::learn
