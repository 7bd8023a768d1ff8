#include "hawk/detect/pipeline.hpp"

#include "hawk/error.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace hawk::detect {

namespace {

json extraction_json(const features::ExtractionConfig& c) {
    const auto& f = c.features;
    return {{"movementStride", c.streams.movementStride},
            {"fovHalfAngle", f.fovHalfAngle},
            {"engagementResetSeconds", f.engagementResetSeconds},
            {"smokeRadius", f.smokeRadius},
            {"inertialWindowSeconds", f.inertialWindowSeconds},
            {"fireRoundGapSeconds", f.fireRoundGapSeconds},
            {"fhpToleranceSeconds", f.fhpToleranceSeconds},
            {"ttkCapSeconds", f.ttkCapSeconds},
            {"distanceScale", f.distanceScale},
            {"onetapDamage", f.onetapDamage},
            {"propsPerPlayerRound", f.propsPerPlayerRound},
            {"opiWeights", f.opiWeights}};
}

features::ExtractionConfig extraction_from_json(const json& j) {
    features::ExtractionConfig c;
    auto& f = c.features;
    c.streams.movementStride = j.value("movementStride", c.streams.movementStride);
    f.fovHalfAngle = j.value("fovHalfAngle", f.fovHalfAngle);
    f.engagementResetSeconds = j.value("engagementResetSeconds", f.engagementResetSeconds);
    f.smokeRadius = j.value("smokeRadius", f.smokeRadius);
    f.inertialWindowSeconds = j.value("inertialWindowSeconds", f.inertialWindowSeconds);
    f.fireRoundGapSeconds = j.value("fireRoundGapSeconds", f.fireRoundGapSeconds);
    f.fhpToleranceSeconds = j.value("fhpToleranceSeconds", f.fhpToleranceSeconds);
    f.ttkCapSeconds = j.value("ttkCapSeconds", f.ttkCapSeconds);
    f.distanceScale = j.value("distanceScale", f.distanceScale);
    f.onetapDamage = j.value("onetapDamage", f.onetapDamage);
    f.propsPerPlayerRound = j.value("propsPerPlayerRound", f.propsPerPlayerRound);
    f.opiWeights = j.value("opiWeights", f.opiWeights);
    if (c.streams.movementStride < 1) throw ConfigError("extraction.movementStride must be at least 1");
    if (!(f.fovHalfAngle > 0 && f.fovHalfAngle <= 180)) throw ConfigError("extraction.fovHalfAngle must be in (0,180]");
    if (f.propsPerPlayerRound < 1) throw ConfigError("extraction.propsPerPlayerRound must be at least 1");
    return c;
}

std::optional<double> safe_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    try {
        return eval::auc_roc(scores, labels);
    } catch (const DegenerateClass&) {
        return std::nullopt;
    }
}

SubsystemEvaluation evaluate_one(std::span<const PlayerDecision> ds, int (*dec)(const PlayerDecision&),
                                 double (*score)(const PlayerDecision&)) {
    SubsystemEvaluation e;
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& d : ds) {
        e.counts.add(dec(d), d.label);
        scores.push_back(score(d));
        labels.push_back(d.label);
    }
    e.metrics = eval::metrics(e.counts);
    e.auc = safe_auc(scores, labels);
    return e;
}

std::string fmt(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return buf;
}

} // namespace

void PipelineConfig::set_seed(std::uint64_t s) {
    seed = s;
    revpov.seed = s;
    revpov.encoderTrain.seed = s;
    revstats.seed = s + 1;
    exspc.seed = s + 2;
    exspc.train.seed = s + 2;
}

void to_json(json& j, const PipelineConfig& c) {
    json revpov, revstats, exspc;
    to_json(revpov, c.revpov);
    to_json(revstats, c.revstats);
    to_json(exspc, c.exspc);
    j = {{"extraction", extraction_json(c.extraction)},
         {"revpov", revpov},
         {"revstats", revstats},
         {"exspc", exspc},
         {"objective", c.objective.to_json()},
         {"lambdaStep", c.lambdaStep},
         {"fusion", c.fusion == FusionInput::Decisions ? "decisions" : "scores"},
         {"split", {{"ratios", c.split.ratios}, {"byDate", c.split.byDate}}},
         {"seed", c.seed}};
}

void from_json(const json& j, PipelineConfig& c) {
    if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
    try {
        if (j.contains("extraction")) c.extraction = extraction_from_json(j.at("extraction"));
        // An explicit top-level seed applies first so subsystem blocks can still override it.
        if (j.contains("seed")) c.set_seed(j.at("seed").get<std::uint64_t>());
        if (j.contains("revpov")) from_json(j.at("revpov"), c.revpov);
        if (j.contains("revstats")) from_json(j.at("revstats"), c.revstats);
        if (j.contains("exspc")) from_json(j.at("exspc"), c.exspc);
        if (j.contains("objective")) c.objective = eval::Objective::from_json(j.at("objective"));
        c.lambdaStep = j.value("lambdaStep", c.lambdaStep);
        if (j.contains("fusion")) {
            const auto f = j.at("fusion").get<std::string>();
            if (f == "decisions") c.fusion = FusionInput::Decisions;
            else if (f == "scores") c.fusion = FusionInput::Scores;
            else throw ConfigError("fusion must be 'decisions' or 'scores'");
        }
        if (j.contains("split")) {
            const auto& s = j.at("split");
            c.split.ratios = s.value("ratios", c.split.ratios);
            c.split.byDate = s.value("byDate", c.split.byDate);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed pipeline config: ") + e.what());
    }
    eval::lambda_grid(c.lambdaStep);
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    json j;
    try {
        j = read_json_file(path);
    } catch (const SchemaError& e) {
        throw ConfigError(e.what());
    }
    return j.get<PipelineConfig>();
}

json to_json(const PlayerDecision& d) {
    std::vector<double> z(d.z28.data(), d.z28.data() + d.z28.size());
    return {{"matchId", d.matchId},
            {"steamId", d.steamId},
            {"pov", {{"decision", d.pov.decision}, {"score", d.pov.score}}},
            {"stats", {{"decision", d.stats.decision}, {"score", d.stats.score}}},
            {"spc", {{"decision", d.spc.decision}, {"score", d.spc.score}}},
            {"w", d.w},
            {"epsilon", d.epsilon},
            {"hawk", d.hawk},
            {"label", d.label},
            {"z28", z}};
}

Evaluation evaluate(std::span<const PlayerDecision> ds) {
    Evaluation e;
    e.pov = evaluate_one(
        ds, [](const PlayerDecision& d) { return d.pov.decision; }, [](const PlayerDecision& d) { return d.pov.score; });
    e.stats = evaluate_one(
        ds, [](const PlayerDecision& d) { return d.stats.decision; },
        [](const PlayerDecision& d) { return d.stats.score; });
    e.spc = evaluate_one(
        ds, [](const PlayerDecision& d) { return d.spc.decision; }, [](const PlayerDecision& d) { return d.spc.score; });
    e.hawk = evaluate_one(
        ds, [](const PlayerDecision& d) { return d.hawk; }, [](const PlayerDecision& d) { return d.w; });
    return e;
}

json to_json(const SubsystemEvaluation& e) {
    return {{"confusion", eval::to_json(e.counts)},
            {"metrics", eval::to_json(e.metrics)},
            {"auc", e.auc ? json(*e.auc) : json(nullptr)}};
}

json to_json(const Evaluation& e) {
    return {{"revpov", to_json(e.pov)}, {"revstats", to_json(e.stats)}, {"exspc", to_json(e.spc)}, {"hawk", to_json(e.hawk)}};
}

json TrainingReport::to_json() const {
    json enc = json::object();
    for (std::size_t k = 0; k < revpov.encoderLoss.size(); ++k)
        enc[std::string(features::to_string(kPovOrder[k]))] = revpov.encoderLoss[k];
    return {{"trainSamples", trainSamples},
            {"validationSamples", validationSamples},
            {"revpov", {{"encoderLoss", enc}, {"subsets", revpov.subsets.size()}, {"validation", eval::to_json(revpov.validation)}}},
            {"exspc", {{"trainLoss", exspc.trainLoss}, {"validationLoss", exspc.validationLoss}}}};
}

double HawkBundle::fuse(const PlayerDecision& d) const {
    if (mvin.scoreMode) return eval::fuse_scores(mvin.lambda, d.pov.score, d.stats.score, d.spc.score);
    return eval::fuse(mvin.lambda, d.pov.decision, d.stats.decision, d.spc.decision);
}

PlayerDecision HawkBundle::detect(const features::PlayerSample& s, EmbeddingCache* cache) const {
    if (!revpov.trained() || !revstats.trained() || !exspc.trained()) throw UntrainedModel("model bundle is not trained");
    PlayerDecision d;
    d.matchId = s.matchId;
    d.steamId = s.steamId;
    d.label = s.label;
    std::shared_ptr<const PovEncoding> enc =
        cache ? cache->get(revpov, s) : std::make_shared<const PovEncoding>(revpov.encode(s.streams));
    d.pov = revpov.decide(enc->vpov);
    d.stats = revstats.decide(s.v28);
    d.z28 = revstats.zscores(s.v28);
    SpcInput in;
    if (config.exspc.padding == PaddingMode::Masked) {
        in.z28 = d.z28;
        for (std::size_t slot = 0; slot < kPovOrder.size(); ++slot)
            in.flat[static_cast<std::size_t>(kPovOrder[slot])] =
                pad_flatten(enc->steps[slot], exspc.paddingLength, exspc.stepWidth);
    } else {
        in = assemble_inputs(revpov, s, d.z28, exspc.paddingLength, PaddingMode::Literal);
    }
    d.spc = exspc.decide(in);
    d.w = fuse(d);
    d.epsilon = mvin.epsilon;
    d.hawk = eval::decide_hawk(d.w, mvin.epsilon);
    return d;
}

std::vector<PlayerDecision> HawkBundle::detect_all(std::span<const features::PlayerSample> samples,
                                                   EmbeddingCache* cache) const {
    std::vector<PlayerDecision> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(detect(s, cache));
    return out;
}

eval::MvinModel HawkBundle::reoptimize(const eval::Objective& objective) const {
    if (config.fusion == FusionInput::Scores) return eval::optimize_scores(validationScores, objective, config.lambdaStep);
    return eval::optimize(validationTriples, objective, config.lambdaStep);
}

void HawkBundle::refresh_version() {
    json cfg;
    to_json(cfg, config);
    const json state = {{"config", cfg},
                        {"encoderVersion", revpov.encoderVersion},
                        {"forests", revpov.forests.size()},
                        {"norm", revstats.norm.to_json()},
                        {"exspc", exspc.to_json()}};
    modelVersion = fnv1a_hex(json::to_cbor(state));
}

void HawkBundle::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    revpov.save(dir / "revpov");
    revstats.save(dir / "revstats");
    exspc.save(dir / "exspc");
    write_json_file(dir / "mvin.json", mvin.to_json());
    json triples = json::array();
    for (const auto& t : validationTriples) triples.push_back({t.dPov, t.dStats, t.dSpc, t.label});
    json scores = json::array();
    for (const auto& t : validationScores) scores.push_back({t.sPov, t.sStats, t.sSpc, t.label});
    write_json_file(dir / "validation.json", {{"triples", triples}, {"scores", scores}});
    json cfg;
    to_json(cfg, config);
    write_json_file(dir / "bundle.json", {{"schemaVersion", learn::kCheckpointSchemaVersion},
                                          {"modelVersion", modelVersion},
                                          {"config", cfg}});
}

HawkBundle HawkBundle::load(const std::filesystem::path& dir) {
    HawkBundle b;
    const json manifest = read_json_file(dir / "bundle.json");
    try {
        b.config = manifest.at("config").get<PipelineConfig>();
        b.modelVersion = manifest.at("modelVersion").get<std::string>();
        b.revpov = RevPovModel::load(dir / "revpov");
        b.revstats = Committee::load(dir / "revstats");
        b.exspc = ExSpcModel::load(dir / "exspc");
        b.mvin = eval::MvinModel::from_json(read_json_file(dir / "mvin.json"));
        const json v = read_json_file(dir / "validation.json");
        for (const auto& t : v.at("triples"))
            b.validationTriples.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>(), t.at(3).get<int>()});
        for (const auto& t : v.at("scores"))
            b.validationScores.push_back(
                {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>(), t.at(3).get<int>()});
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed model bundle: ") + e.what());
    }
    const std::string stored = b.modelVersion;
    b.refresh_version();
    if (b.modelVersion != stored) throw SchemaError("model bundle checkpoints do not match bundle.json");
    return b;
}

HawkBundle train_bundle(std::span<const features::PlayerSample> train, std::span<const features::PlayerSample> validation,
                        const PipelineConfig& cfg, TrainingReport* report) {
    if (validation.empty()) throw InsufficientData("training needs a non-empty validation split");
    TrainingReport local;
    TrainingReport& rep = report ? *report : local;
    rep.trainSamples = train.size();
    rep.validationSamples = validation.size();

    HawkBundle b;
    b.config = cfg;
    EmbeddingCache cache;
    b.revpov = train_revpov(train, validation, cfg.revpov, &rep.revpov, &cache);
    b.revstats = train_revstats(train, cfg.revstats);

    const int p = padding_length(train, cfg.revpov.encoder.maxLength);
    auto inputs = [&](std::span<const features::PlayerSample> samples) {
        std::vector<SpcInput> out;
        out.reserve(samples.size());
        for (const auto& s : samples)
            out.push_back(assemble_inputs(b.revpov, s, b.revstats.zscores(s.v28), p, cfg.exspc.padding, &cache));
        return out;
    };
    const auto trainIn = inputs(train);
    const auto valIn = inputs(validation);
    const auto trainY = labels_of(train);
    const auto valY = labels_of(validation);
    b.exspc = train_exspc(trainIn, trainY, valIn, valY, cfg.exspc, p, b.revpov.step_width(),
                          features::default_grouping(), &rep.exspc);

    // Any valid mvin is enough to run detect on the validation split.
    b.mvin.scoreMode = cfg.fusion == FusionInput::Scores;
    for (const auto& s : validation) {
        const auto d = b.detect(s, &cache);
        b.validationTriples.push_back({d.pov.decision, d.stats.decision, d.spc.decision, d.label});
        b.validationScores.push_back({d.pov.score, d.stats.score, d.spc.score, d.label});
    }
    b.mvin = b.reoptimize(cfg.objective);
    b.refresh_version();
    return b;
}

SampleSplit split_samples(std::span<const replay::LabeledMatch> matches, const PipelineConfig& cfg) {
    const auto idx = replay::split_dataset(matches, cfg.split.ratios, cfg.split.byDate, cfg.seed);
    auto pick = [&](const std::vector<std::size_t>& ids) {
        std::vector<replay::LabeledMatch> sel;
        for (auto i : ids) sel.push_back(matches[i]);
        return features::extract_samples(sel, cfg.extraction);
    };
    return {pick(idx.train), pick(idx.validation), pick(idx.test)};
}

std::vector<RobustnessRow> robustness_sweep(std::span<const replay::LabeledMatch> matches, const PipelineConfig& cfg,
                                            int partitionSize) {
    if (partitionSize < 1) throw ConfigError("partition size must be at least 1");
    const std::size_t parts = matches.size() / static_cast<std::size_t>(partitionSize);
    if (parts < 2)
        throw InsufficientData("robustness sweep needs at least two partitions of " + std::to_string(partitionSize) +
                               " matches");
    std::vector<std::size_t> order(matches.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::int64_t> dates;
    for (const auto& m : matches) dates.push_back(replay::parse_utc(m.match.dateUtc));
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dates[a] < dates[b]; });

    std::vector<std::vector<features::PlayerSample>> trainParts(parts);
    std::vector<std::size_t> trainMatchCounts(parts);
    std::vector<features::PlayerSample> validation, test;
    for (std::size_t p = 0; p < parts; ++p) {
        const std::size_t begin = p * static_cast<std::size_t>(partitionSize);
        const std::size_t end = p + 1 == parts ? matches.size() : begin + static_cast<std::size_t>(partitionSize);
        std::vector<replay::LabeledMatch> part;
        for (std::size_t i = begin; i < end; ++i) part.push_back(matches[order[i]]);
        auto c = cfg;
        c.seed = cfg.seed + p;
        c.split.byDate = false;
        const auto s = split_samples(part, c);
        trainParts[p] = s.train;
        trainMatchCounts[p] = replay::split_dataset(part, cfg.split.ratios, false, c.seed).train.size();
        validation.insert(validation.end(), s.validation.begin(), s.validation.end());
        test.insert(test.end(), s.test.begin(), s.test.end());
    }

    std::vector<RobustnessRow> rows;
    std::vector<features::PlayerSample> train;
    std::size_t trainMatches = 0;
    for (std::size_t p = 0; p < parts; ++p) {
        train.insert(train.end(), trainParts[p].begin(), trainParts[p].end());
        trainMatches += trainMatchCounts[p];
        const auto bundle = train_bundle(train, validation, cfg);
        EmbeddingCache cache;
        RobustnessRow row;
        row.prefix = static_cast<int>(p + 1);
        row.trainMatches = trainMatches;
        const auto vd = bundle.detect_all(validation, &cache);
        const auto td = bundle.detect_all(test, &cache);
        row.validation = evaluate(vd);
        row.test = evaluate(td);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string robustness_csv(std::span<const RobustnessRow> rows) {
    std::ostringstream out;
    out << "prefix,train_matches,accuracy,recall,npv,auc,oei\n";
    for (const auto& r : rows) {
        const auto& m = r.test.hawk.metrics;
        out << r.prefix << ',' << r.trainMatches << ',' << fmt(m.accuracy) << ',' << fmt(m.recall) << ','
            << fmt(m.npv) << ',' << fmt(r.test.hawk.auc) << ',' << fmt(m.oei) << '\n';
    }
    return out.str();
}

} // namespace hawk::detect
