#include "hawk/detect/revpov.hpp"

#include "hawk/error.hpp"

namespace hawk::detect {

using features::kStreamCount;

int pov_slot(StreamKind k) {
    for (int i = 0; i < kStreamCount; ++i)
        if (kPovOrder[static_cast<std::size_t>(i)] == k) return i;
    return -1;
}

void to_json(json& j, const RevPovConfig& c) {
    json enc;
    learn::to_json(enc, c.encoder);
    j = {{"encoder", enc},
         {"encoderTrain", c.encoderTrain},
         {"forest", c.forest},
         {"maxSubsets", c.maxSubsets},
         {"seed", c.seed}};
}

void from_json(const json& j, RevPovConfig& c) {
    if (j.contains("encoder")) learn::from_json(j.at("encoder"), c.encoder);
    if (j.contains("encoderTrain")) c.encoderTrain = j.at("encoderTrain").get<learn::TrainConfig>();
    if (j.contains("forest")) c.forest = j.at("forest").get<learn::ForestConfig>();
    c.maxSubsets = j.value("maxSubsets", c.maxSubsets);
    c.seed = j.value("seed", c.seed);
    if (c.maxSubsets < 1) throw ConfigError("revpov.maxSubsets must be at least 1");
}

bool RevPovModel::trained() const {
    if (forests.empty()) return false;
    for (const auto& e : encoders)
        if (!e.trained()) return false;
    return true;
}

int RevPovModel::embedding_width() const { return kStreamCount * (config.encoder.outputWidth + 1); }

PovEncoding RevPovModel::encode(const features::TemporalStreams& s) const {
    for (const auto& e : encoders)
        if (!e.trained()) throw UntrainedModel("RevPov encoders are not trained");
    const int E = config.encoder.outputWidth;
    PovEncoding out;
    out.vpov = Vector::Zero(kStreamCount * (E + 1));
    for (int slot = 0; slot < kStreamCount; ++slot) {
        const auto k = static_cast<std::size_t>(slot);
        const auto& seq = s[kPovOrder[k]];
        if (seq.rows() == 0) {
            out.steps[k] = Matrix::Zero(0, E);
            out.vpov(kStreamCount * E + slot) = 1.0;
            continue;
        }
        auto enc = encoders[k].encode(seq);
        out.vpov.segment(slot * E, E) = enc.pooled;
        out.steps[k] = std::move(enc.steps);
    }
    return out;
}

std::vector<int> RevPovModel::forest_votes(const Vector& vpov) const {
    if (forests.empty()) throw UntrainedModel("RevPov forests are not trained");
    if (vpov.size() != embedding_width()) throw ConfigError("V_pov width does not match the model");
    std::vector<int> votes;
    for (const auto& f : forests) votes.push_back(f.decide(vpov));
    return votes;
}

Decision RevPovModel::decide(const Vector& vpov) const {
    const auto votes = forest_votes(vpov);
    return majority(votes);
}

void RevPovModel::refresh_version() {
    json all = json::array();
    for (const auto& e : encoders) all.push_back(e.to_json());
    encoderVersion = fnv1a_hex(json::to_cbor(all));
}

void RevPovModel::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    json cfg;
    to_json(cfg, config);
    for (int slot = 0; slot < kStreamCount; ++slot) {
        const auto name = std::string(features::to_string(kPovOrder[static_cast<std::size_t>(slot)]));
        learn::save_checkpoint(dir / ("encoder-" + name + ".bin"),
                               {learn::kCheckpointSchemaVersion, "sequence-encoder", cfg["encoder"],
                                encoders[static_cast<std::size_t>(slot)].to_json()});
    }
    for (std::size_t k = 0; k < forests.size(); ++k)
        learn::save_checkpoint(dir / ("forest-" + std::to_string(k + 1) + ".bin"),
                               {learn::kCheckpointSchemaVersion, "random-forest", cfg["forest"], forests[k].to_json()});
    json order = json::array();
    for (auto k : kPovOrder) order.push_back(features::to_string(k));
    write_json_file(dir / "manifest.json", {{"schemaVersion", learn::kCheckpointSchemaVersion},
                                            {"kind", "revpov"},
                                            {"config", cfg},
                                            {"streams", order},
                                            {"forests", forests.size()},
                                            {"embeddingWidth", embedding_width()},
                                            {"encoderVersion", encoderVersion}});
}

RevPovModel RevPovModel::load(const std::filesystem::path& dir) {
    const json manifest = read_json_file(dir / "manifest.json");
    if (manifest.value("kind", "") != "revpov") throw SchemaError("not a revpov checkpoint directory");
    RevPovModel m;
    m.config = manifest.at("config").get<RevPovConfig>();
    for (int slot = 0; slot < kStreamCount; ++slot) {
        const auto name = std::string(features::to_string(kPovOrder[static_cast<std::size_t>(slot)]));
        const auto cp = learn::load_checkpoint(dir / ("encoder-" + name + ".bin"), "sequence-encoder");
        m.encoders[static_cast<std::size_t>(slot)] = learn::SequenceEncoder::from_json(cp.parameters);
    }
    const auto count = manifest.at("forests").get<std::size_t>();
    for (std::size_t k = 0; k < count; ++k) {
        const auto cp = learn::load_checkpoint(dir / ("forest-" + std::to_string(k + 1) + ".bin"), "random-forest");
        m.forests.push_back(learn::RandomForest::from_json(cp.parameters));
    }
    m.refresh_version();
    if (m.encoderVersion != manifest.value("encoderVersion", m.encoderVersion))
        throw SchemaError("revpov encoder files do not match the manifest version");
    return m;
}

std::shared_ptr<const PovEncoding> EmbeddingCache::get(const RevPovModel& model, const features::PlayerSample& s) {
    auto key = std::make_tuple(s.matchId, s.steamId, model.encoderVersion);
    {
        std::lock_guard lock(mu_);
        if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    auto enc = std::make_shared<const PovEncoding>(model.encode(s.streams));
    std::lock_guard lock(mu_);
    return entries_.emplace(std::move(key), std::move(enc)).first->second;
}

std::size_t EmbeddingCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

void EmbeddingCache::clear() {
    std::lock_guard lock(mu_);
    entries_.clear();
}

RevPovModel train_revpov(std::span<const features::PlayerSample> train,
                         std::span<const features::PlayerSample> validation, const RevPovConfig& cfg,
                         RevPovReport* report, EmbeddingCache* cache) {
    const auto y = labels_of(train);
    require_both_classes(y, "RevPov training");
    RevPovModel model;
    model.config = cfg;
    RevPovReport local;
    RevPovReport& rep = report ? *report : local;

    for (int slot = 0; slot < kStreamCount; ++slot) {
        const auto k = static_cast<std::size_t>(slot);
        const StreamKind kind = kPovOrder[k];
        learn::EncoderConfig ec = cfg.encoder;
        ec.inputWidth = features::stream_width(kind);
        model.encoders[k] = learn::SequenceEncoder(ec, cfg.seed * 7919 + k + 1);
        std::vector<const Matrix*> seqs;
        for (const auto& s : train) seqs.push_back(&s.streams[kind]);
        learn::TrainConfig tc = cfg.encoderTrain;
        tc.seed = cfg.encoderTrain.seed + cfg.seed * 104729 + k;
        rep.encoderLoss[k] = model.encoders[k].fit(seqs, y, tc);
    }
    model.refresh_version();

    EmbeddingCache localCache;
    EmbeddingCache& c = cache ? *cache : localCache;
    Matrix X(static_cast<Eigen::Index>(train.size()), model.embedding_width());
    for (std::size_t i = 0; i < train.size(); ++i)
        X.row(static_cast<Eigen::Index>(i)) = c.get(model, train[i])->vpov.transpose();

    rep.subsets = multi_subsample(y, cfg.seed + 17, cfg.maxSubsets);
    for (const auto& set : rep.subsets) {
        Matrix Xs(static_cast<Eigen::Index>(set.members.size()), X.cols());
        std::vector<int> ys;
        for (std::size_t r = 0; r < set.members.size(); ++r) {
            Xs.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(set.members[r]));
            ys.push_back(y[set.members[r]]);
        }
        learn::RandomForest f;
        f.fit(Xs, ys, cfg.forest, cfg.seed * 31 + static_cast<std::uint64_t>(set.index));
        model.forests.push_back(std::move(f));
    }

    rep.validation = {};
    for (const auto& s : validation) rep.validation.add(model.decide(c.get(model, s)->vpov).decision, s.label);
    return model;
}

} // namespace hawk::detect
