#include "hawk/detect/revstats.hpp"

#include "hawk/error.hpp"

#include <set>

namespace hawk::detect {

using features::kFeatureCount;

namespace {

void validate(const RevStatsConfig& c) {
    if (c.kinds.empty() || c.kinds.size() % 2 == 0)
        throw ConfigError("revstats.kinds must list an odd number of classifier kinds");
    if (c.maxSubsets < 1) throw ConfigError("revstats.maxSubsets must be at least 1");
    if (!(c.stdFloor > 0)) throw ConfigError("revstats.stdFloor must be positive");
}

} // namespace

void to_json(json& j, const RevStatsConfig& c) {
    json kinds = json::array();
    for (auto k : c.kinds) kinds.push_back(learn::to_string(k));
    json classic;
    learn::to_json(classic, c.classic);
    j = {{"kinds", kinds}, {"classic", classic}, {"maxSubsets", c.maxSubsets}, {"stdFloor", c.stdFloor},
         {"seed", c.seed}};
}

void from_json(const json& j, RevStatsConfig& c) {
    if (j.contains("kinds")) {
        c.kinds.clear();
        for (const auto& k : j.at("kinds")) {
            const auto kind = learn::classifier_kind_from_string(k.get<std::string>());
            if (!kind) throw ConfigError("unknown classifier kind '" + k.get<std::string>() + "'");
            c.kinds.push_back(*kind);
        }
    }
    if (j.contains("classic")) learn::from_json(j.at("classic"), c.classic);
    c.maxSubsets = j.value("maxSubsets", c.maxSubsets);
    c.stdFloor = j.value("stdFloor", c.stdFloor);
    c.seed = j.value("seed", c.seed);
    validate(c);
}

Decision nested_majority(const std::vector<std::vector<int>>& votes) {
    std::vector<int> kindVotes;
    for (const auto& v : votes) kindVotes.push_back(majority(v).decision);
    return majority(kindVotes);
}

Committee::Committee(const Committee& other) : config(other.config), norm(other.norm) {
    for (const auto& row : other.instances) {
        std::vector<std::unique_ptr<learn::Classifier>> copy;
        for (const auto& c : row) {
            auto clf = learn::make_classifier(c->kind(), config.classic);
            if (c->trained()) clf->load(c->parameters());
            copy.push_back(std::move(clf));
        }
        instances.push_back(std::move(copy));
    }
}

Committee& Committee::operator=(const Committee& other) {
    if (this != &other) *this = Committee(other);
    return *this;
}

bool Committee::trained() const {
    if (instances.empty() || !norm.fitted()) return false;
    for (const auto& kind : instances)
        for (const auto& c : kind)
            if (!c || !c->trained()) return false;
    return true;
}

Vector Committee::raw_input(const features::StructuredVector& v) {
    Vector x(2 * kFeatureCount);
    for (int i = 0; i < kFeatureCount; ++i) {
        x(i) = v.values[static_cast<std::size_t>(i)];
        x(kFeatureCount + i) = v.missing[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    }
    return x;
}

Vector Committee::zscores(const features::StructuredVector& v) const {
    if (!norm.fitted()) throw UntrainedModel("RevStats normalization is not fitted");
    return norm.apply(raw_input(v)).head(kFeatureCount);
}

std::vector<std::vector<int>> Committee::votes(const features::StructuredVector& v) const {
    if (!trained()) throw UntrainedModel("RevStats committee is not trained");
    const Vector raw = raw_input(v);
    const Vector z = norm.apply(raw);
    std::vector<std::vector<int>> out;
    for (const auto& kind : instances) {
        std::vector<int> row;
        for (const auto& c : kind) row.push_back(c->decide(learn::is_tree_kind(c->kind()) ? raw : z));
        out.push_back(std::move(row));
    }
    return out;
}

Decision Committee::decide(const features::StructuredVector& v) const { return nested_majority(votes(v)); }

void Committee::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    json cfg;
    to_json(cfg, config);
    write_json_file(dir / "norm.json", norm.to_json());
    json files = json::array();
    for (const auto& kind : instances)
        for (std::size_t k = 0; k < kind.size(); ++k) {
            const std::string name = std::string(learn::to_string(kind[k]->kind())) + "-" + std::to_string(k + 1) + ".bin";
            learn::save_checkpoint(dir / name, {learn::kCheckpointSchemaVersion, std::string(learn::to_string(kind[k]->kind())),
                                                cfg["classic"], kind[k]->parameters()});
            files.push_back(name);
        }
    write_json_file(dir / "manifest.json", {{"schemaVersion", learn::kCheckpointSchemaVersion},
                                            {"kind", "revstats"},
                                            {"config", cfg},
                                            {"subsets", instances.empty() ? 0 : instances.front().size()},
                                            {"files", files}});
}

Committee Committee::load(const std::filesystem::path& dir) {
    const json manifest = read_json_file(dir / "manifest.json");
    if (manifest.value("kind", "") != "revstats") throw SchemaError("not a revstats checkpoint directory");
    Committee c;
    c.config = manifest.at("config").get<RevStatsConfig>();
    c.norm = learn::Standardizer::from_json(read_json_file(dir / "norm.json"));
    const auto subsets = manifest.at("subsets").get<std::size_t>();
    for (auto kind : c.config.kinds) {
        std::vector<std::unique_ptr<learn::Classifier>> row;
        for (std::size_t k = 0; k < subsets; ++k) {
            const std::string name = std::string(learn::to_string(kind)) + "-" + std::to_string(k + 1) + ".bin";
            const auto cp = learn::load_checkpoint(dir / name, std::string(learn::to_string(kind)));
            auto clf = learn::make_classifier(kind, c.config.classic);
            clf->load(cp.parameters);
            row.push_back(std::move(clf));
        }
        c.instances.push_back(std::move(row));
    }
    return c;
}

Committee train_revstats(std::span<const features::StructuredVector> x, std::span<const int> y,
                         const RevStatsConfig& cfg) {
    validate(cfg);
    if (x.size() != y.size()) throw ConfigError("sample and label counts differ");
    require_both_classes(y, "RevStats training");
    Committee c;
    c.config = cfg;
    Matrix raw(static_cast<Eigen::Index>(x.size()), 2 * kFeatureCount);
    for (std::size_t i = 0; i < x.size(); ++i) raw.row(static_cast<Eigen::Index>(i)) = Committee::raw_input(x[i]).transpose();
    c.norm.fit(raw, cfg.stdFloor);
    const Matrix z = c.norm.apply_rows(raw);

    const auto subsets = multi_subsample(y, cfg.seed + 23, cfg.maxSubsets);
    for (std::size_t ki = 0; ki < cfg.kinds.size(); ++ki) {
        const auto kind = cfg.kinds[ki];
        const Matrix& source = learn::is_tree_kind(kind) ? raw : z;
        std::vector<std::unique_ptr<learn::Classifier>> row;
        for (const auto& set : subsets) {
            Matrix Xs(static_cast<Eigen::Index>(set.members.size()), source.cols());
            std::vector<int> ys;
            for (std::size_t r = 0; r < set.members.size(); ++r) {
                Xs.row(static_cast<Eigen::Index>(r)) = source.row(static_cast<Eigen::Index>(set.members[r]));
                ys.push_back(y[set.members[r]]);
            }
            auto clf = learn::make_classifier(kind, cfg.classic);
            clf->fit(Xs, ys, cfg.seed * 1009 + ki * 101 + static_cast<std::uint64_t>(set.index));
            row.push_back(std::move(clf));
        }
        c.instances.push_back(std::move(row));
    }
    return c;
}

Committee train_revstats(std::span<const features::PlayerSample> train, const RevStatsConfig& cfg) {
    std::vector<features::StructuredVector> x;
    for (const auto& s : train) x.push_back(s.v28);
    const auto y = labels_of(train);
    return train_revstats(x, y, cfg);
}

} // namespace hawk::detect
