#include "hawk/detect/exspc.hpp"

#include "hawk/error.hpp"

#include <cmath>

namespace hawk::detect {

using features::kFeatureCount;
using features::kStreamCount;
using learn::Activation;
using learn::Dense;

namespace {

std::size_t sidx(StreamKind k) { return static_cast<std::size_t>(k); }

using Stack = std::vector<Dense>;
using StackCache = std::vector<Dense::Cache>;

Stack make_stack(int in, const std::vector<int>& widths, std::mt19937_64& rng) {
    Stack s;
    for (int w : widths) {
        s.emplace_back(in, w, Activation::Elu, rng);
        in = w;
    }
    return s;
}

Matrix run(const Stack& s, Matrix x, StackCache* cache) {
    if (cache) cache->resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) x = s[i].forward(x, cache ? &(*cache)[i] : nullptr);
    return x;
}

Matrix back(Stack& s, Matrix dy, const StackCache& cache) {
    for (std::size_t i = s.size(); i-- > 0;) dy = s[i].backward(dy, cache[i]);
    return dy;
}

int out_width(const Stack& s, int in) { return s.empty() ? in : s.back().out(); }

json stack_json(const Stack& s) {
    json a = json::array();
    for (const auto& d : s) a.push_back(d.to_json());
    return a;
}

Stack stack_from_json(const json& j) {
    Stack s;
    for (const auto& d : j) s.push_back(Dense::from_json(d));
    return s;
}

void add_params(std::vector<learn::Param*>& out, Stack& s) {
    for (auto& d : s)
        for (auto* p : d.params()) out.push_back(p);
}

json grouping_json(const features::SensePerfGrouping& g) {
    auto streams = [](const std::vector<StreamKind>& v) {
        json a = json::array();
        for (auto k : v) a.push_back(features::to_string(k));
        return a;
    };
    auto names = [](const std::vector<int>& v) {
        json a = json::array();
        for (int i : v) a.push_back(features::kFeatureNames[static_cast<std::size_t>(i)]);
        return a;
    };
    return {{"temporalSense", streams(g.temporalSense)},
            {"temporalPerf", streams(g.temporalPerf)},
            {"structuredSense", names(g.structuredSense)},
            {"structuredPerf", names(g.structuredPerf)}};
}

features::SensePerfGrouping grouping_from_json(const json& j) {
    features::SensePerfGrouping g;
    for (const auto& s : j.at("temporalSense")) g.temporalSense.push_back(*features::stream_from_string(s.get<std::string>()));
    for (const auto& s : j.at("temporalPerf")) g.temporalPerf.push_back(*features::stream_from_string(s.get<std::string>()));
    for (const auto& s : j.at("structuredSense")) g.structuredSense.push_back(features::feature_index(s.get<std::string>()));
    for (const auto& s : j.at("structuredPerf")) g.structuredPerf.push_back(features::feature_index(s.get<std::string>()));
    return g;
}

Vector gather(const Vector& z, const std::vector<int>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = z(idx[i]);
    return out;
}

Vector concat(const std::array<Vector, kStreamCount>& parts, const std::vector<StreamKind>& order) {
    Eigen::Index n = 0;
    for (auto k : order) n += parts[sidx(k)].size();
    Vector out(n);
    Eigen::Index at = 0;
    for (auto k : order) {
        out.segment(at, parts[sidx(k)].size()) = parts[sidx(k)];
        at += parts[sidx(k)].size();
    }
    return out;
}

} // namespace

std::string_view to_string(PaddingMode m) { return m == PaddingMode::Masked ? "masked" : "literal"; }

void to_json(json& j, const ExSpcConfig& c) {
    json train;
    learn::to_json(train, c.train);
    j = {{"shrinkWidth", c.shrinkWidth}, {"reduction", c.reduction}, {"deepening", c.deepening},
         {"headHidden", c.headHidden},   {"padding", to_string(c.padding)}, {"train", train},
         {"seed", c.seed}};
}

void from_json(const json& j, ExSpcConfig& c) {
    c.shrinkWidth = j.value("shrinkWidth", c.shrinkWidth);
    c.reduction = j.value("reduction", c.reduction);
    c.deepening = j.value("deepening", c.deepening);
    c.headHidden = j.value("headHidden", c.headHidden);
    if (j.contains("padding")) {
        const auto p = j.at("padding").get<std::string>();
        if (p == "masked") c.padding = PaddingMode::Masked;
        else if (p == "literal") c.padding = PaddingMode::Literal;
        else throw ConfigError("exspc.padding must be 'masked' or 'literal'");
    }
    if (j.contains("train")) learn::from_json(j.at("train"), c.train);
    c.seed = j.value("seed", c.seed);
    if (c.shrinkWidth < 1 || c.headHidden < 0) throw ConfigError("exspc widths must be positive");
    for (int w : c.reduction)
        if (w < 1) throw ConfigError("exspc.reduction widths must be positive");
    for (int w : c.deepening)
        if (w < 1) throw ConfigError("exspc.deepening widths must be positive");
}

int padding_length(std::span<const features::PlayerSample> samples, int maxLength) {
    int p = 1;
    for (const auto& s : samples)
        for (const auto& seq : s.streams.seq) p = std::max(p, std::min(static_cast<int>(seq.rows()), maxLength));
    return p;
}

Vector pad_flatten(const Matrix& steps, int paddingLength, int width) {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(paddingLength) * width);
    const Eigen::Index t = std::min<Eigen::Index>(steps.rows(), paddingLength);
    for (Eigen::Index i = 0; i < t; ++i) out.segment(i * width, width) = steps.row(i).transpose();
    return out;
}

SpcInput assemble_inputs(const RevPovModel& revpov, const features::PlayerSample& s, const Vector& z28,
                         int paddingLength, PaddingMode mode, EmbeddingCache* cache) {
    if (z28.size() != kFeatureCount) throw ConfigError("z28 must hold 28 values");
    const int e = revpov.step_width();
    for (std::size_t k = 0; k < kStreamCount; ++k)
        if (!revpov.encoders[k].trained())
            throw MissingEmbedding(std::string("no trained encoder for stream ") +
                                   std::string(features::to_string(kPovOrder[k])));
    SpcInput in;
    in.z28 = z28;
    if (mode == PaddingMode::Masked) {
        std::shared_ptr<const PovEncoding> enc =
            cache ? cache->get(revpov, s) : std::make_shared<const PovEncoding>(revpov.encode(s.streams));
        for (std::size_t slot = 0; slot < kStreamCount; ++slot) {
            const Matrix& steps = enc->steps[slot];
            if (steps.rows() > 0 && steps.cols() != e) throw MissingEmbedding("step output width mismatch");
            in.flat[sidx(kPovOrder[slot])] = pad_flatten(steps, paddingLength, e);
        }
    } else {
        for (std::size_t slot = 0; slot < kStreamCount; ++slot) {
            const StreamKind kind = kPovOrder[slot];
            const Matrix& raw = s.streams[kind];
            Matrix padded = Matrix::Zero(paddingLength, features::stream_width(kind));
            const Eigen::Index t = std::min<Eigen::Index>(raw.rows(), paddingLength);
            if (t > 0) padded.topRows(t) = raw.topRows(t);
            const Matrix steps = revpov.encoders[slot].encode(padded).steps;
            if (steps.cols() != e) throw MissingEmbedding("step output width mismatch");
            in.flat[sidx(kind)] = pad_flatten(steps, paddingLength, e);
        }
    }
    return in;
}

struct ExSpcModel::Cache {
    std::array<Dense::Cache, kStreamCount> shrink;
    StackCache povSense, povPerf, statSense, statPerf, deepSense, deepPerf, head;
    int povSenseWidth = 0;
};

ExSpcModel::ExSpcModel(const ExSpcConfig& cfg, const features::SensePerfGrouping& g, int padding, int width)
    : config(cfg), grouping(g), paddingLength(padding), stepWidth(width) {
    if (padding < 1 || width < 1) throw ConfigError("exspc padding length and step width must be positive");
    std::mt19937_64 rng(cfg.seed);
    for (auto k : features::kAllStreams)
        shrink[sidx(k)] = Dense(padding * width, cfg.shrinkWidth, Activation::Elu, rng);
    const int s = cfg.shrinkWidth;
    povSense = make_stack(s * static_cast<int>(g.temporalSense.size()), cfg.reduction, rng);
    povPerf = make_stack(s * static_cast<int>(g.temporalPerf.size()), cfg.reduction, rng);
    statSense = make_stack(static_cast<int>(g.structuredSense.size()), cfg.reduction, rng);
    statPerf = make_stack(static_cast<int>(g.structuredPerf.size()), cfg.reduction, rng);
    deepSense = make_stack(out_width(statSense, static_cast<int>(g.structuredSense.size())) +
                               out_width(povSense, s * static_cast<int>(g.temporalSense.size())),
                           cfg.deepening, rng);
    deepPerf = make_stack(out_width(statPerf, static_cast<int>(g.structuredPerf.size())) +
                              out_width(povPerf, s * static_cast<int>(g.temporalPerf.size())),
                          cfg.deepening, rng);
    int in = out_width(deepSense, 0) + out_width(deepPerf, 0);
    if (cfg.headHidden > 0) {
        head.emplace_back(in, cfg.headHidden, Activation::Elu, rng);
        in = cfg.headHidden;
    }
    head.emplace_back(in, 1, Activation::Linear, rng);
}

void ExSpcModel::check_input(const SpcInput& in) const {
    if (head.empty()) throw UntrainedModel("ExSPC model is not built");
    for (auto k : features::kAllStreams)
        if (in.flat[sidx(k)].size() != static_cast<Eigen::Index>(paddingLength) * stepWidth)
            throw MissingEmbedding("ExSPC input for stream " + std::string(features::to_string(k)) +
                                   " has the wrong length");
    if (in.z28.size() != kFeatureCount) throw ConfigError("z28 must hold 28 values");
}

double ExSpcModel::forward(const SpcInput& in, Cache* c) const {
    check_input(in);
    std::array<Vector, kStreamCount> phi;
    for (auto k : features::kAllStreams)
        phi[sidx(k)] = shrink[sidx(k)].forward(in.flat[sidx(k)], c ? &c->shrink[sidx(k)] : nullptr);
    const Vector vPovS = concat(phi, grouping.temporalSense);
    const Vector vPovP = concat(phi, grouping.temporalPerf);
    const Matrix xiPovS = run(povSense, vPovS, c ? &c->povSense : nullptr);
    const Matrix xiPovP = run(povPerf, vPovP, c ? &c->povPerf : nullptr);
    const Matrix xiStatS = run(statSense, gather(in.z28, grouping.structuredSense), c ? &c->statSense : nullptr);
    const Matrix xiStatP = run(statPerf, gather(in.z28, grouping.structuredPerf), c ? &c->statPerf : nullptr);

    Vector vSense(xiStatS.rows() + xiPovS.rows());
    vSense << xiStatS.col(0), xiPovS.col(0);
    Vector vPerf(xiStatP.rows() + xiPovP.rows());
    vPerf << xiStatP.col(0), xiPovP.col(0);
    const Matrix dS = run(deepSense, vSense, c ? &c->deepSense : nullptr);
    const Matrix dP = run(deepPerf, vPerf, c ? &c->deepPerf : nullptr);
    Vector joint(dS.rows() + dP.rows());
    joint << dS.col(0), dP.col(0);
    return run(head, joint, c ? &c->head : nullptr)(0, 0);
}

void ExSpcModel::backward(double dlogit, const Cache& c) {
    const Matrix dJoint = back(head, Matrix::Constant(1, 1, dlogit), c.head);
    const int senseW = out_width(deepSense, 0);
    const Matrix dSense = back(deepSense, dJoint.topRows(senseW), c.deepSense);
    const Matrix dPerf = back(deepPerf, dJoint.bottomRows(dJoint.rows() - senseW), c.deepPerf);

    const auto nStatS = static_cast<Eigen::Index>(out_width(statSense, static_cast<int>(grouping.structuredSense.size())));
    const auto nStatP = static_cast<Eigen::Index>(out_width(statPerf, static_cast<int>(grouping.structuredPerf.size())));
    back(statSense, dSense.topRows(nStatS), c.statSense);
    back(statPerf, dPerf.topRows(nStatP), c.statPerf);
    const Matrix dPovS = back(povSense, dSense.bottomRows(dSense.rows() - nStatS), c.povSense);
    const Matrix dPovP = back(povPerf, dPerf.bottomRows(dPerf.rows() - nStatP), c.povPerf);

    const Eigen::Index s = config.shrinkWidth;
    std::array<Matrix, kStreamCount> dPhi;
    for (auto& d : dPhi) d = Matrix::Zero(s, 1);
    for (std::size_t i = 0; i < grouping.temporalSense.size(); ++i)
        dPhi[sidx(grouping.temporalSense[i])] += dPovS.middleRows(static_cast<Eigen::Index>(i) * s, s);
    for (std::size_t i = 0; i < grouping.temporalPerf.size(); ++i)
        dPhi[sidx(grouping.temporalPerf[i])] += dPovP.middleRows(static_cast<Eigen::Index>(i) * s, s);
    for (auto k : features::kAllStreams) shrink[sidx(k)].backward(dPhi[sidx(k)], c.shrink[sidx(k)]);
}

double ExSpcModel::logit(const SpcInput& in) const { return forward(in, nullptr); }

double ExSpcModel::score(const SpcInput& in) const {
    if (!trained_) throw UntrainedModel("ExSPC model is not trained");
    return learn::sigmoid(logit(in));
}

Decision ExSpcModel::decide(const SpcInput& in) const {
    const double p = score(in);
    return {p >= 0.5 ? 1 : 0, p};
}

double ExSpcModel::sample_loss(const SpcInput& in, int label, double wPos, double wNeg, bool accumulate) {
    Cache c;
    const double z = forward(in, accumulate ? &c : nullptr);
    const auto term = learn::weighted_bce_logit(z, label, wPos, wNeg);
    if (accumulate) backward(term.dlogit, c);
    return term.loss;
}

std::vector<learn::Param*> ExSpcModel::params() {
    std::vector<learn::Param*> out;
    for (auto& d : shrink)
        for (auto* p : d.params()) out.push_back(p);
    for (Stack* s : {&povSense, &povPerf, &statSense, &statPerf, &deepSense, &deepPerf, &head}) add_params(out, *s);
    return out;
}

json ExSpcModel::to_json() const {
    json cfg;
    detect::to_json(cfg, config);
    json sh = json::array();
    for (const auto& d : shrink) sh.push_back(d.to_json());
    return {{"config", cfg},
            {"grouping", grouping_json(grouping)},
            {"paddingLength", paddingLength},
            {"stepWidth", stepWidth},
            {"trained", trained_},
            {"shrink", sh},
            {"povSense", stack_json(povSense)},
            {"povPerf", stack_json(povPerf)},
            {"statSense", stack_json(statSense)},
            {"statPerf", stack_json(statPerf)},
            {"deepSense", stack_json(deepSense)},
            {"deepPerf", stack_json(deepPerf)},
            {"head", stack_json(head)}};
}

ExSpcModel ExSpcModel::from_json(const json& j) {
    try {
        ExSpcModel m;
        m.config = j.at("config").get<ExSpcConfig>();
        m.grouping = grouping_from_json(j.at("grouping"));
        m.paddingLength = j.at("paddingLength").get<int>();
        m.stepWidth = j.at("stepWidth").get<int>();
        m.trained_ = j.at("trained").get<bool>();
        const auto& sh = j.at("shrink");
        if (sh.size() != kStreamCount) throw SchemaError("exspc.shrink must hold 7 layers");
        for (std::size_t k = 0; k < kStreamCount; ++k) m.shrink[k] = Dense::from_json(sh[k]);
        m.povSense = stack_from_json(j.at("povSense"));
        m.povPerf = stack_from_json(j.at("povPerf"));
        m.statSense = stack_from_json(j.at("statSense"));
        m.statPerf = stack_from_json(j.at("statPerf"));
        m.deepSense = stack_from_json(j.at("deepSense"));
        m.deepPerf = stack_from_json(j.at("deepPerf"));
        m.head = stack_from_json(j.at("head"));
        return m;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed ExSPC parameters: ") + e.what());
    }
}

std::string ExSpcModel::grouping_version() const {
    const auto bytes = json::to_cbor(grouping_json(grouping));
    return fnv1a_hex(bytes);
}

void ExSpcModel::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    json cfg;
    detect::to_json(cfg, config);
    learn::save_checkpoint(dir / "model.bin", {learn::kCheckpointSchemaVersion, "exspc", cfg, to_json()});
    write_json_file(dir / "manifest.json", {{"schemaVersion", learn::kCheckpointSchemaVersion},
                                            {"kind", "exspc"},
                                            {"paddingLength", paddingLength},
                                            {"stepWidth", stepWidth},
                                            {"padding", to_string(config.padding)},
                                            {"groupingVersion", grouping_version()},
                                            {"grouping", grouping_json(grouping)}});
}

ExSpcModel ExSpcModel::load(const std::filesystem::path& dir) {
    const json manifest = read_json_file(dir / "manifest.json");
    ExSpcModel m = from_json(learn::load_checkpoint(dir / "model.bin", "exspc").parameters);
    if (manifest.value("paddingLength", -1) != m.paddingLength ||
        manifest.value("groupingVersion", "") != m.grouping_version())
        throw SchemaError("exspc manifest does not match model.bin");
    return m;
}

ExSpcModel train_exspc(std::span<const SpcInput> train, std::span<const int> y, std::span<const SpcInput> validation,
                       std::span<const int> validationLabels, const ExSpcConfig& cfg, int paddingLength,
                       int stepWidth, const features::SensePerfGrouping& grouping, ExSpcReport* report) {
    if (train.size() != y.size() || validation.size() != validationLabels.size())
        throw ConfigError("sample and label counts differ");
    require_both_classes(y, "ExSPC training");
    ExSpcModel m(cfg, grouping, paddingLength, stepWidth);
    ExSpcReport local;
    ExSpcReport& rep = report ? *report : local;
    const auto& tc = cfg.train;
    auto validationLoss = [&](int) {
        if (validation.empty()) return;
        double sum = 0;
        for (std::size_t i = 0; i < validation.size(); ++i)
            sum += m.sample_loss(validation[i], validationLabels[i], tc.positiveWeight, tc.negativeWeight, false);
        rep.validationLoss.push_back(sum / static_cast<double>(validation.size()));
    };
    rep.trainLoss = learn::train_loop(
        train.size(), tc, m.params(),
        [&](std::size_t i, std::mt19937_64&) {
            return m.sample_loss(train[i], y[i], tc.positiveWeight, tc.negativeWeight, true);
        },
        validationLoss);
    m.mark_trained();
    return m;
}

} // namespace hawk::detect
