#include "hawk/detect/exspc.hpp"
#include "hawk/detect/revstats.hpp"
#include "hawk/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>

using namespace hawk;
using namespace hawk::detect;
using features::StreamKind;

namespace {

std::vector<int> imbalanced(int honest, int cheaters, std::uint64_t seed) {
    std::vector<int> y(static_cast<std::size_t>(honest), 0);
    y.insert(y.end(), static_cast<std::size_t>(cheaters), 1);
    std::mt19937_64 rng(seed);
    std::shuffle(y.begin(), y.end(), rng);
    return y;
}

int brute_majority(const std::vector<int>& v) {
    int ones = 0;
    for (int x : v) ones += x;
    return ones * 2 > static_cast<int>(v.size()) ? 1 : 0;
}

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("hawk-test-detect-" + name);
    std::filesystem::remove_all(p);
    return p;
}

// Cheaters are shifted by `shift` in the first ten features; feature 7 is constant.
struct StatSet {
    std::vector<features::StructuredVector> x;
    std::vector<int> y;
};

StatSet stat_blobs(int honest, int cheaters, double shift, std::uint64_t seed) {
    StatSet s;
    s.y = imbalanced(honest, cheaters, seed);
    std::mt19937_64 rng(seed + 1);
    std::normal_distribution<double> nd(0, 1);
    for (int label : s.y) {
        features::StructuredVector v;
        for (int i = 0; i < features::kFeatureCount; ++i) {
            v.values[static_cast<std::size_t>(i)] = nd(rng) + (label && i < 10 ? shift : 0);
        }
        v.values[7] = 3.5;
        v.missing[20] = nd(rng) > 1.5;
        s.x.push_back(v);
    }
    return s;
}

SpcInput random_input(int padding, int width, std::mt19937_64& rng, int realSteps = -1) {
    std::normal_distribution<double> nd(0, 1);
    SpcInput in;
    for (auto k : features::kAllStreams) {
        const int t = realSteps < 0 ? padding : realSteps;
        Matrix steps(t, width);
        for (Eigen::Index i = 0; i < steps.size(); ++i) steps.data()[i] = nd(rng);
        in.flat[static_cast<std::size_t>(k)] = pad_flatten(steps, padding, width);
    }
    in.z28 = Vector(features::kFeatureCount);
    for (Eigen::Index i = 0; i < in.z28.size(); ++i) in.z28(i) = nd(rng);
    return in;
}

ExSpcConfig small_spc() {
    ExSpcConfig c;
    c.shrinkWidth = 4;
    c.reduction = {6, 4};
    c.deepening = {5, 3};
    c.headHidden = 3;
    return c;
}

} // namespace

TEST_CASE("multi-subsampling 900 honest / 100 cheaters") {
    const auto y = imbalanced(900, 100, 5);
    const auto sets = multi_subsample(y, 11);
    REQUIRE(sets.size() == 9);
    std::set<std::size_t> honestSeen;
    for (const auto& s : sets) {
        int pos = 0, neg = 0;
        for (auto i : s.members) {
            if (y[i]) ++pos;
            else {
                ++neg;
                CHECK(honestSeen.insert(i).second);
            }
        }
        CHECK(pos == 100);
        CHECK(neg == 100);
    }
    CHECK(honestSeen.size() == 900);

    const auto again = multi_subsample(y, 11);
    for (std::size_t k = 0; k < sets.size(); ++k) CHECK(sets[k].members == again[k].members);
}

TEST_CASE("multi-subsampling edge cases") {
    SUBCASE("balanced gives one set of everything") {
        const auto y = imbalanced(50, 50, 1);
        const auto sets = multi_subsample(y, 3);
        REQUIRE(sets.size() == 1);
        CHECK(sets[0].members.size() == 100);
    }
    SUBCASE("more cheaters than honest downsamples the cheaters") {
        const auto y = imbalanced(20, 30, 1);
        const auto sets = multi_subsample(y, 3);
        REQUIRE(sets.size() == 1);
        CHECK(sets[0].members.size() == 40);
    }
    SUBCASE("the set count is capped and honest samples are reused after the pool runs out") {
        const auto y = imbalanced(1000, 10, 2);
        const auto sets = multi_subsample(y, 3, 15);
        CHECK(sets.size() == 15);
        for (const auto& s : sets) CHECK(s.members.size() == 20);
        const auto y2 = imbalanced(250, 100, 2); // ratio 2.5 rounds to 3 sets; 300 honest draws from 250
        const auto sets2 = multi_subsample(y2, 3);
        CHECK(sets2.size() == 3);
        for (const auto& s : sets2) {
            CHECK(std::set<std::size_t>(s.members.begin(), s.members.end()).size() == 200);
        }
    }
    SUBCASE("a single class is rejected") {
        const std::vector<int> y(10, 0);
        CHECK_THROWS_AS(multi_subsample(y, 1), DegenerateClass);
    }
}

TEST_CASE("majority and nested majority agree with brute force on random vote tensors") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 15);
        std::vector<int> v(static_cast<std::size_t>(n));
        for (auto& x : v) x = static_cast<int>(rng() % 2);
        const auto d = majority(v);
        CHECK(d.decision == brute_majority(v));

        const int kinds = 1 + 2 * static_cast<int>(rng() % 4);
        const int per = 1 + static_cast<int>(rng() % 9);
        std::vector<std::vector<int>> votes(static_cast<std::size_t>(kinds), std::vector<int>(static_cast<std::size_t>(per)));
        for (auto& row : votes)
            for (auto& x : row) x = static_cast<int>(rng() % 2);
        std::vector<int> kindVotes;
        for (const auto& row : votes) kindVotes.push_back(brute_majority(row));
        CHECK(nested_majority(votes).decision == brute_majority(kindVotes));
    }
    CHECK(majority(std::vector<int>{1, 0}).decision == 0);
    CHECK(majority(std::vector<int>{1, 1, 0}).score == doctest::Approx(2.0 / 3));
    CHECK_THROWS_AS(majority(std::vector<int>{}), UntrainedModel);
}

TEST_CASE("RevStats committee trains one instance per kind and subset") {
    const auto data = stat_blobs(180, 60, 2.5, 4);
    RevStatsConfig cfg;
    cfg.classic.forest.trees = 15;
    cfg.classic.mlpTrain.epochs = 40;
    const auto c = train_revstats(data.x, data.y, cfg);
    REQUIRE(c.instances.size() == 7);
    for (const auto& row : c.instances) CHECK(row.size() == 3);
    CHECK(c.trained());

    SUBCASE("constant columns standardize to zero") { CHECK(c.zscores(data.x[0])(7) == 0.0); }

    SUBCASE("decisions follow the nested vote and separate the blobs") {
        int correct = 0;
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            const auto votes = c.votes(data.x[i]);
            const auto d = c.decide(data.x[i]);
            CHECK(d.decision == nested_majority(votes).decision);
            correct += d.decision == data.y[i];
        }
        CHECK(correct >= 0.95 * static_cast<double>(data.x.size()));
    }

    SUBCASE("training is deterministic and checkpoints round trip") {
        const auto again = train_revstats(data.x, data.y, cfg);
        const auto dir = temp_dir("revstats");
        c.save(dir);
        const auto loaded = Committee::load(dir);
        for (std::size_t i = 0; i < 30; ++i) {
            CHECK(again.votes(data.x[i]) == c.votes(data.x[i]));
            CHECK(loaded.votes(data.x[i]) == c.votes(data.x[i]));
            CHECK((loaded.zscores(data.x[i]) - c.zscores(data.x[i])).norm() == 0.0);
        }
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("RevStats configuration checks") {
    RevStatsConfig cfg;
    cfg.kinds = {learn::ClassifierKind::LogReg, learn::ClassifierKind::GaussianNb};
    const auto data = stat_blobs(30, 10, 2, 1);
    CHECK_THROWS_AS(train_revstats(data.x, data.y, cfg), ConfigError);
    json j;
    to_json(j, RevStatsConfig{});
    j["kinds"] = json::array({"logreg", "qda"});
    RevStatsConfig parsed;
    CHECK_THROWS_AS(from_json(j, parsed), ConfigError);
    j["kinds"] = json::array({"logreg"});
    from_json(j, parsed);
    CHECK(parsed.kinds.size() == 1);
    Committee untrained;
    CHECK_THROWS_AS(untrained.votes(data.x[0]), UntrainedModel);
}

TEST_CASE("padding places real steps first and zeros after") {
    const int e = 4;
    Matrix steps = Matrix::Constant(3, e, 1.5);
    const Vector flat = pad_flatten(steps, 10, e);
    REQUIRE(flat.size() == 10 * e);
    CHECK(flat.head(3 * e).isConstant(1.5));
    CHECK(flat.tail(7 * e).isZero(0));
    CHECK(pad_flatten(Matrix::Constant(12, e, 1), 10, e).isConstant(1));
}

TEST_CASE("ExSPC structured sense slice and wiring") {
    const auto& g = features::default_grouping();
    std::vector<std::string> names;
    for (int i : g.structuredSense) names.emplace_back(features::kFeatureNames[static_cast<std::size_t>(i)]);
    CHECK(names == std::vector<std::string>{"fei", "opi", "isp", "bkp", "pui"});
    CHECK(g.temporalSense ==
          std::vector<StreamKind>{StreamKind::Movement, StreamKind::Economy, StreamKind::OffensiveProps,
                                  StreamKind::AuxiliaryProps});
    CHECK(g.temporalPerf == std::vector<StreamKind>{StreamKind::WeaponFire, StreamKind::Elimination, StreamKind::Damage});

    const auto cfg = small_spc();
    ExSpcModel m(cfg, g, 5, 3);
    CHECK(m.povSense.front().in() == 4 * cfg.shrinkWidth);
    CHECK(m.povPerf.front().in() == 3 * cfg.shrinkWidth);
    CHECK(m.statSense.front().in() == 5);
    CHECK(m.statPerf.front().in() == 23);
    CHECK(m.shrink[0].in() == 15);

    // Moving a stream between groups rewires the stacks, the API stays the same.
    auto moved = g;
    moved.temporalPerf.push_back(moved.temporalSense.back());
    moved.temporalSense.pop_back();
    ExSpcModel rewired(cfg, moved, 5, 3);
    CHECK(rewired.povSense.front().in() == 3 * cfg.shrinkWidth);
    CHECK(rewired.povPerf.front().in() == 4 * cfg.shrinkWidth);
    std::mt19937_64 rng(1);
    const auto in = random_input(5, 3, rng);
    CHECK(std::isfinite(rewired.logit(in)));
}

TEST_CASE("ExSPC gradient check on a two-sample batch") {
    ExSpcModel m(small_spc(), features::default_grouping(), 4, 3);
    std::mt19937_64 rng(8);
    const std::vector<SpcInput> batch{random_input(4, 3, rng), random_input(4, 3, rng, 2)};
    const std::vector<int> labels{1, 0};
    auto params = m.params();
    const double err = learn::grad_check(
        params,
        [&] {
            double s = 0;
            for (std::size_t i = 0; i < batch.size(); ++i) s += m.sample_loss(batch[i], labels[i], 9, 1, false);
            return s;
        },
        [&] {
            for (std::size_t i = 0; i < batch.size(); ++i) m.sample_loss(batch[i], labels[i], 9, 1, true);
        });
    CHECK(err < 1e-4);
}

TEST_CASE("ExSPC masked padding gives zero gradient on absent steps") {
    const int p = 6, e = 3;
    ExSpcModel m(small_spc(), features::default_grouping(), p, e);
    std::mt19937_64 rng(3);
    const auto in = random_input(p, e, rng, 2);
    for (auto* q : m.params()) q->zero_grad();
    m.sample_loss(in, 1, 9, 1, true);
    for (const auto& d : m.shrink) {
        CHECK(d.w.grad.leftCols(2 * e).norm() > 0);
        CHECK(d.w.grad.rightCols((p - 2) * e).isZero(0));
    }
}

TEST_CASE("ExSPC decision rule, learning rate zero and checkpoints") {
    const auto cfg = small_spc();
    std::mt19937_64 rng(21);
    std::vector<SpcInput> train;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        auto in = random_input(4, 3, rng);
        const int label = i % 4 == 0;
        if (label) in.z28.array() += 2.0;
        train.push_back(in);
        y.push_back(label);
    }

    SUBCASE("learning rate zero leaves parameters unchanged") {
        auto c = cfg;
        c.train.optimizer.learningRate = 0;
        c.train.epochs = 2;
        const ExSpcModel fresh(c, features::default_grouping(), 4, 3);
        ExSpcReport rep;
        const auto trained = train_exspc(train, y, train, y, c, 4, 3, features::default_grouping(), &rep);
        CHECK(trained.to_json()["head"] == fresh.to_json()["head"]);
        CHECK(trained.to_json()["shrink"] == fresh.to_json()["shrink"]);
        CHECK(rep.trainLoss.size() == 2);
        CHECK(rep.validationLoss.size() == 2);
    }

    SUBCASE("training separates the classes and is deterministic") {
        auto c = cfg;
        c.train.epochs = 40;
        c.train.batchSize = 8;
        c.train.optimizer.learningRate = 1e-2;
        ExSpcReport rep;
        const auto m = train_exspc(train, y, {}, {}, c, 4, 3, features::default_grouping(), &rep);
        const auto again = train_exspc(train, y, {}, {}, c, 4, 3);
        CHECK(rep.trainLoss.back() < rep.trainLoss.front());
        int correct = 0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            const auto d = m.decide(train[i]);
            CHECK(d.score > 0.0);
            CHECK(d.score < 1.0);
            CHECK(d.score == again.score(train[i]));
            correct += d.decision == y[i];
        }
        CHECK(correct >= 36);

        const auto dir = temp_dir("exspc");
        m.save(dir);
        const auto loaded = ExSpcModel::load(dir);
        CHECK(loaded.paddingLength == 4);
        for (const auto& in : train) CHECK(loaded.score(in) == m.score(in));
        std::filesystem::remove_all(dir);
    }

    SUBCASE("a score of exactly one half is a positive decision") {
        ExSpcModel m(cfg, features::default_grouping(), 4, 3);
        m.head.back().w.value.setZero();
        m.head.back().b.value.setZero();
        m.mark_trained();
        const auto d = m.decide(train[0]);
        CHECK(d.score == 0.5);
        CHECK(d.decision == 1);
    }

    SUBCASE("untrained models and malformed inputs are rejected") {
        ExSpcModel m(cfg, features::default_grouping(), 4, 3);
        CHECK_THROWS_AS(m.score(train[0]), UntrainedModel);
        m.mark_trained();
        auto bad = train[0];
        bad.flat[0] = Vector::Zero(5);
        CHECK_THROWS_AS(m.score(bad), MissingEmbedding);
    }
}

TEST_CASE("RevPov end to end on a small synthetic corpus") {
    replay::DatasetSpec spec;
    spec.matches = 8;
    spec.rounds = 5;
    spec.seed = 77;
    spec.match.frameStride = 64;
    const auto matches = replay::generate_synthetic_dataset(spec);
    const auto samples = features::extract_samples(matches);
    REQUIRE(samples.size() == 80);
    const std::span<const features::PlayerSample> train(samples.data(), 60);
    const std::span<const features::PlayerSample> val(samples.data() + 60, 20);

    RevPovConfig cfg;
    cfg.encoder.hidden = 6;
    cfg.encoder.layers = 1;
    cfg.encoder.outputWidth = 4;
    cfg.encoder.maxLength = 24;
    cfg.encoderTrain.epochs = 2;
    cfg.forest.trees = 9;
    cfg.seed = 5;

    RevPovReport rep;
    EmbeddingCache cache;
    const auto model = train_revpov(train, val, cfg, &rep, &cache);
    CHECK(model.trained());
    CHECK(model.embedding_width() == 7 * 5);
    CHECK(model.forests.size() == rep.subsets.size());
    CHECK(rep.subsets.size() == 9);
    CHECK(rep.validation.n() == 20);
    for (const auto& loss : rep.encoderLoss) CHECK(loss.size() == 2);
    CHECK(cache.size() == 80);

    SUBCASE("empty streams embed as zeros plus a flag") {
        features::TemporalStreams empty;
        for (auto k : features::kAllStreams) empty[k] = Matrix(0, features::stream_width(k));
        const auto enc = model.encode(empty);
        CHECK(enc.vpov.head(28).isZero(0));
        CHECK(enc.vpov.tail(7).isConstant(1));
        CHECK(enc.steps[0].rows() == 0);
    }

    SUBCASE("embeddings are deterministic and the cache returns the same values") {
        const auto a = model.embed(samples[3].streams);
        CHECK((a - cache.get(model, samples[3])->vpov).norm() == 0.0);
        CHECK((a - model.embed(samples[3].streams)).norm() == 0.0);
    }

    SUBCASE("checkpoint round trip") {
        const auto dir = temp_dir("revpov");
        model.save(dir);
        const auto loaded = RevPovModel::load(dir);
        CHECK(loaded.encoderVersion == model.encoderVersion);
        for (std::size_t i = 0; i < 10; ++i) {
            const auto v = model.embed(samples[i].streams);
            CHECK((loaded.embed(samples[i].streams) - v).norm() == 0.0);
            CHECK(loaded.forest_votes(v) == model.forest_votes(v));
        }
        std::filesystem::remove_all(dir);
    }

    SUBCASE("ExSPC inputs from RevPov step outputs") {
        const int p = padding_length(samples, cfg.encoder.maxLength);
        CHECK(p <= cfg.encoder.maxLength);
        const Vector z = Vector::Zero(28);
        const auto a = assemble_inputs(model, samples[0], z, p, PaddingMode::Masked, &cache);
        const auto b = assemble_inputs(model, samples[0], z, p, PaddingMode::Masked);
        for (std::size_t k = 0; k < 7; ++k) {
            CHECK(a.flat[k].size() == p * 4);
            CHECK((a.flat[k] - b.flat[k]).norm() == 0.0);
        }
        const auto lit = assemble_inputs(model, samples[0], z, p, PaddingMode::Literal);
        CHECK(lit.flat[0].size() == p * 4);
        RevPovModel blank;
        CHECK_THROWS_AS(assemble_inputs(blank, samples[0], z, p, PaddingMode::Masked), MissingEmbedding);
    }
}

TEST_CASE("RevStats committees copy deeply") {
    const auto data = stat_blobs(60, 20, 2.5, 12);
    RevStatsConfig cfg;
    cfg.classic.forest.trees = 5;
    cfg.classic.mlpTrain.epochs = 10;
    const auto c = train_revstats(data.x, data.y, cfg);
    const Committee copy = c;
    Committee assigned;
    assigned = copy;
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(copy.votes(data.x[i]) == c.votes(data.x[i]));
        CHECK(assigned.votes(data.x[i]) == c.votes(data.x[i]));
    }
}
