#include "hawk/error.hpp"
#include "hawk/learn/checkpoint.hpp"
#include "hawk/learn/classic.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace hawk;
using namespace hawk::learn;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double scale = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0, scale);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
    return m;
}

struct Blobs {
    Matrix X;
    std::vector<int> y;
};

// Class 1 sits `shift` standard deviations away in every coordinate.
Blobs blobs(int n, int d, double shift, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Blobs b{Matrix(n, d), std::vector<int>(static_cast<std::size_t>(n))};
    for (int i = 0; i < n; ++i) {
        const int c = i % 2;
        b.y[static_cast<std::size_t>(i)] = c;
        for (int j = 0; j < d; ++j) b.X(i, j) = nd(rng) + c * shift;
    }
    return b;
}

double accuracy(const Classifier& c, const Blobs& b) {
    int ok = 0;
    for (Eigen::Index i = 0; i < b.X.rows(); ++i)
        ok += c.decide(b.X.row(i).transpose()) == b.y[static_cast<std::size_t>(i)];
    return static_cast<double>(ok) / static_cast<double>(b.X.rows());
}

EncoderConfig small_encoder(int width) {
    EncoderConfig c;
    c.inputWidth = width;
    c.layers = 2;
    c.hidden = 5;
    c.outputWidth = 4;
    c.dropout = 0.3;
    return c;
}

std::vector<Matrix> snapshot(const std::vector<Param*>& ps) {
    std::vector<Matrix> out;
    for (const Param* p : ps) out.push_back(p->value);
    return out;
}

} // namespace

TEST_CASE("identical hidden states give uniform attention") {
    std::mt19937_64 rng(3);
    Attention att(4, rng);
    const Vector h = random_matrix(4, 1, 9);
    const Matrix H = h.replicate(1, 6);
    const Matrix p = att.weights(H);
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p.data()[i] == doctest::Approx(1.0 / 6));
}

TEST_CASE("encoder outputs: attention rows sum to one, single step pooling") {
    SequenceEncoder enc(small_encoder(3), 7);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto out = enc.encode(random_matrix(8, 3, s, 3.0));
        REQUIRE(out.attention.rows() == 8);
        for (Eigen::Index i = 0; i < 8; ++i) CHECK(std::abs(out.attention.row(i).sum() - 1) < 1e-6);
        CHECK(out.steps.rows() == 8);
        CHECK(out.steps.cols() == 4);
    }
    const auto one = enc.encode(random_matrix(1, 3, 5));
    for (Eigen::Index k = 0; k < 4; ++k) CHECK(one.pooled(k) == one.steps(0, k));
    CHECK_THROWS_AS(enc.encode(Matrix(0, 3)), EmptySequence);
    CHECK_THROWS_AS(enc.encode(Matrix::Zero(2, 4)), ConfigError);

    EncoderConfig cfg = small_encoder(3);
    cfg.maxLength = 5;
    SequenceEncoder capped(cfg, 7);
    const Matrix longSeq = random_matrix(9, 3, 1);
    CHECK(capped.encode(longSeq).steps.rows() == 5);
    CHECK(capped.encode(longSeq).pooled == capped.encode(longSeq.topRows(5)).pooled);
}

TEST_CASE("gradient check: dense + sigmoid + BCE") {
    BinaryNet net(6, {}, 4);
    const Vector x = random_matrix(6, 1, 2);
    auto ps = net.params();
    for (int y : {0, 1}) {
        const double err = grad_check(
            ps, [&] { return net.sample_loss(x, y, 9, 1, false); }, [&] { net.sample_loss(x, y, 9, 1, true); });
        CHECK(err < 1e-6);
    }
    BinaryNet deep(5, {{7, Activation::Sigmoid}, {4, Activation::Elu}, {3, Activation::Linear}}, 5);
    auto dps = deep.params();
    const Vector x2 = random_matrix(5, 1, 3);
    CHECK(grad_check(dps, [&] { return deep.sample_loss(x2, 1, 9, 1, false); },
                     [&] { deep.sample_loss(x2, 1, 9, 1, true); }) < 1e-4);
}

TEST_CASE("gradient check: LSTM cell over three steps") {
    std::mt19937_64 rng(11);
    LstmLayer lstm(4, 3, rng);
    const Matrix x = random_matrix(4, 3, 12);
    const Matrix r = random_matrix(3, 3, 13);
    auto ps = lstm.params();
    const double err = grad_check(
        ps, [&] { return lstm.forward(x).cwiseProduct(r).sum(); },
        [&] {
            LstmLayer::Cache c;
            lstm.forward(x, &c);
            lstm.backward(r, c);
        });
    CHECK(err < 1e-4);
}

TEST_CASE("gradient check: attention") {
    std::mt19937_64 rng(21);
    Attention att(4, rng);
    const Matrix h = random_matrix(4, 5, 22);
    const Matrix r = random_matrix(4, 5, 23);
    auto ps = att.params();
    CHECK(grad_check(ps, [&] { return att.forward(h).cwiseProduct(r).sum(); },
                     [&] {
                         Attention::Cache c;
                         att.forward(h, &c);
                         att.backward(r, c);
                     }) < 1e-4);
    // input gradient
    Matrix hv = h;
    Attention::Cache c;
    att.forward(hv, &c);
    const Matrix dh = att.backward(r, c);
    double worst = 0;
    for (Eigen::Index i = 0; i < hv.size(); ++i) {
        const double saved = hv.data()[i];
        hv.data()[i] = saved + 1e-5;
        const double up = att.forward(hv).cwiseProduct(r).sum();
        hv.data()[i] = saved - 1e-5;
        const double down = att.forward(hv).cwiseProduct(r).sum();
        hv.data()[i] = saved;
        const double num = (up - down) / 2e-5;
        worst = std::max(worst, std::abs(num - dh.data()[i]) / std::max({std::abs(num), std::abs(dh.data()[i]), 1e-6}));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("gradient check: full encoder with dropout and the training head") {
    SequenceEncoder enc(small_encoder(3), 31);
    const Matrix seq = random_matrix(6, 3, 32);
    auto ps = enc.params();
    for (int y : {0, 1}) {
        const double err = grad_check(
            ps,
            [&] {
                std::mt19937_64 rng(99);
                return enc.sample_loss(seq, y, 9, 1, &rng, false);
            },
            [&] {
                std::mt19937_64 rng(99);
                enc.sample_loss(seq, y, 9, 1, &rng, true);
            });
        CHECK(err < 1e-4);
    }
}

TEST_CASE("gradient check of an empty parameter list is zero") {
    CHECK(grad_check({}, [] { return 1.0; }, [] {}) == 0.0);
}

TEST_CASE("weighted BCE") {
    const auto pos = weighted_bce_logit(0.3, 1, 9, 1);
    const auto neg = weighted_bce_logit(0.3, 0, 9, 1);
    CHECK(pos.loss == doctest::Approx(9 * -std::log(sigmoid(0.3))));
    CHECK(neg.loss == doctest::Approx(-std::log(1 - sigmoid(0.3))));
    CHECK(weighted_bce(0.4, 1, 9) == doctest::Approx(9 * weighted_bce(0.4, 1, 1)));
    for (double p : {1e-9, 0.1, 0.5, 0.9, 1 - 1e-9})
        for (int y : {0, 1}) CHECK(weighted_bce(p, y) >= 0);
    CHECK(weighted_bce(1 - 1e-12, 1) < 1e-11);
    CHECK(weighted_bce(1e-12, 0) < 1e-11);
    CHECK(weighted_bce_logit(40, 1).loss < 1e-15);
    CHECK(std::isfinite(weighted_bce_logit(-800, 1).loss));
}

TEST_CASE("MLP learns XOR") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    Matrix X(200, 2);
    std::vector<int> y(200);
    for (int i = 0; i < 200; ++i) {
        double a = u(rng), b = u(rng);
        a += a > 0 ? 0.1 : -0.1;
        b += b > 0 ? 0.1 : -0.1;
        X(i, 0) = a;
        X(i, 1) = b;
        y[static_cast<std::size_t>(i)] = (a > 0) != (b > 0);
    }
    BinaryNet net(2, {{8, Activation::Elu}, {8, Activation::Elu}}, 1);
    TrainConfig t;
    t.epochs = 500;
    t.positiveWeight = 1;
    t.optimizer.learningRate = 1e-2;
    const auto history = net.fit(X, y, t);
    CHECK(history.back() < history.front());
    int ok = 0;
    for (int i = 0; i < 200; ++i) ok += (net.probability(X.row(i).transpose()) > 0.5) == y[static_cast<std::size_t>(i)];
    CHECK(ok / 200.0 >= 0.95);
}

TEST_CASE("learning rate 0 leaves parameters untouched; training is seeded") {
    const auto data = blobs(40, 3, 2, 1);
    BinaryNet net(3, {{4, Activation::Elu}}, 2);
    auto before = snapshot(net.params());
    TrainConfig t;
    t.epochs = 3;
    t.optimizer.learningRate = 0;
    net.fit(data.X, data.y, t);
    auto after = snapshot(net.params());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);

    std::vector<Matrix> seqs;
    std::vector<const Matrix*> ptrs;
    std::vector<int> labels;
    for (int i = 0; i < 12; ++i) seqs.push_back(random_matrix(4 + i % 3, 3, 100 + static_cast<std::uint64_t>(i)));
    for (int i = 0; i < 12; ++i) {
        ptrs.push_back(&seqs[static_cast<std::size_t>(i)]);
        labels.push_back(i % 4 == 0);
    }
    SequenceEncoder enc(small_encoder(3), 3);
    before = snapshot(enc.params());
    t.epochs = 2;
    enc.fit(ptrs, labels, t);
    after = snapshot(enc.params());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);

    t.optimizer.learningRate = 1e-2;
    SequenceEncoder a(small_encoder(3), 3), b(small_encoder(3), 3);
    CHECK(a.fit(ptrs, labels, t) == b.fit(ptrs, labels, t));
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("encoder loss drops during the first epoch on a separable set") {
    std::vector<Matrix> seqs;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        const int y = i % 5 == 0;
        Matrix s = random_matrix(6, 2, 500 + static_cast<std::uint64_t>(i), 0.3);
        s.col(0).array() += y ? 2.0 : -0.5;
        seqs.push_back(s);
        labels.push_back(y);
    }
    std::vector<const Matrix*> ptrs;
    for (auto& s : seqs) ptrs.push_back(&s);
    SequenceEncoder enc(small_encoder(2), 1);
    Matrix rows(6 * 60, 2);
    for (std::size_t i = 0; i < seqs.size(); ++i) rows.middleRows(static_cast<Eigen::Index>(6 * i), 6) = seqs[i];
    enc.input_scaler().fit(rows); // the same scaling fit() derives
    double initial = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) initial += enc.sample_loss(seqs[i], labels[i], 9, 1, nullptr, false);
    initial /= static_cast<double>(seqs.size());
    TrainConfig t;
    t.epochs = 1;
    t.batchSize = 4;
    t.optimizer.learningRate = 1e-2;
    enc.fit(ptrs, labels, t);
    double after = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) after += enc.sample_loss(seqs[i], labels[i], 9, 1, nullptr, false);
    after /= static_cast<double>(seqs.size());
    CHECK(after < initial);
    t.epochs = 20;
    enc.fit(ptrs, labels, t);
    CHECK(enc.probability(seqs[0]) > enc.probability(seqs[1]));
}

TEST_CASE("non-finite loss aborts with the epoch") {
    Matrix X = Matrix::Ones(4, 2);
    X(2, 0) = std::numeric_limits<double>::infinity();
    BinaryNet net(2, {}, 1);
    TrainConfig t;
    t.epochs = 3;
    try {
        net.fit(X, {0, 1, 0, 1}, t);
        FAIL("expected NonFiniteLoss");
    } catch (const NonFiniteLoss& e) {
        CHECK(e.epoch() == 1);
        CHECK(e.code() == "NonFiniteLoss");
    }
}

TEST_CASE("forest averaging, ties and single-class data") {
    auto leaf = [](double p1) {
        return json{{"feature", {-1}}, {"threshold", {0.0}}, {"left", {-1}}, {"right", {-1}}, {"p1", {p1}}};
    };
    const auto forest = RandomForest::from_json({{"trees", {leaf(1.0), leaf(1.0), leaf(0.0)}}});
    const Vector x = Vector::Zero(2);
    CHECK(forest.predict_proba(x)[1] == doctest::Approx(2.0 / 3));
    CHECK(forest.decide(x) == 1);
    const auto tie = RandomForest::from_json({{"trees", {leaf(1.0), leaf(0.0)}}});
    CHECK(tie.decide(x) == 0);
    CHECK(decide_class({0.5, 0.5}) == 0);
    CHECK_THROWS_AS(RandomForest().predict_proba(x), UntrainedModel);

    const auto data = blobs(60, 4, 1.5, 3);
    const std::vector<int> ones(60, 1);
    RandomForest single;
    single.fit(data.X, ones, {}, 4);
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) CHECK(single.decide(data.X.row(i).transpose()) == 1);

    for (int trees = 1; trees <= 9; ++trees) {
        ForestConfig cfg;
        cfg.trees = trees;
        RandomForest f;
        f.fit(data.X, data.y, cfg, 10 + static_cast<std::uint64_t>(trees));
        for (Eigen::Index i = 0; i < 10; ++i) {
            const Vector xi = data.X.row(i).transpose();
            double sum = 0;
            for (double p : f.tree_probabilities(xi)) sum += p;
            const auto p = f.predict_proba(xi);
            CHECK(p[1] == doctest::Approx(sum / trees));
            CHECK(p[0] + p[1] == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("trees respect depth, are deterministic and round-trip") {
    const auto data = blobs(200, 5, 0.8, 8);
    ForestConfig cfg;
    cfg.trees = 10;
    cfg.maxDepth = 3;
    RandomForest a, b;
    a.fit(data.X, data.y, cfg, 5);
    b.fit(data.X, data.y, cfg, 5);
    CHECK(a.to_json() == b.to_json());
    const auto c = RandomForest::from_json(a.to_json());
    for (Eigen::Index i = 0; i < 20; ++i)
        CHECK(c.predict_proba(data.X.row(i).transpose()) == a.predict_proba(data.X.row(i).transpose()));
    std::mt19937_64 rng(1);
    DecisionTree t;
    t.fit(data.X, data.y, {4, 2, 1, 0}, rng);
    CHECK(t.depth() <= 4);
}

TEST_CASE("every classifier kind separates 3-sigma blobs") {
    const auto train = blobs(200, 5, 3, 1);
    const auto test = blobs(200, 5, 3, 2);
    for (auto kind : kAllClassifierKinds) {
        auto c = make_classifier(kind);
        CHECK_THROWS_AS(c->score(Vector::Zero(5)), UntrainedModel);
        c->fit(train.X, train.y, 7);
        const double acc = accuracy(*c, test);
        CHECK_MESSAGE(acc >= 0.95, to_string(kind), " accuracy ", acc);
        for (Eigen::Index i = 0; i < 20; ++i) {
            const double s = c->score(test.X.row(i).transpose());
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
        // parameters round-trip through a checkpoint
        auto d = make_classifier(kind);
        json cfg;
        to_json(cfg, ClassicConfig{});
        const auto cp = decode_checkpoint(
            encode_checkpoint({kCheckpointSchemaVersion, std::string(to_string(kind)), cfg, c->parameters()}));
        d->load(cp.parameters);
        for (Eigen::Index i = 0; i < 20; ++i)
            CHECK(d->score(test.X.row(i).transpose()) == c->score(test.X.row(i).transpose()));
        auto e = make_classifier(kind);
        e->fit(train.X, train.y, 7);
        CHECK(e->parameters() == c->parameters());
    }
}

TEST_CASE("logistic regression on separable data is exact") {
    Matrix X(40, 2);
    std::vector<int> y(40);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.2, 2);
    for (int i = 0; i < 40; ++i) {
        const int c = i % 2;
        X(i, 0) = c ? u(rng) : -u(rng);
        X(i, 1) = u(rng) - 1;
        y[static_cast<std::size_t>(i)] = c;
    }
    auto lr = make_classifier(ClassifierKind::LogReg);
    lr->fit(X, y, 1);
    CHECK(accuracy(*lr, {X, y}) == 1.0);
}

TEST_CASE("gaussian NB on identical class data scores one half") {
    const Matrix base = random_matrix(50, 3, 4);
    Matrix X(100, 3);
    X << base, base;
    std::vector<int> y(100, 0);
    std::fill(y.begin() + 50, y.end(), 1);
    auto nb = make_classifier(ClassifierKind::GaussianNb);
    nb->fit(X, y, 1);
    for (Eigen::Index i = 0; i < 10; ++i) CHECK(nb->score(random_matrix(3, 1, 100 + static_cast<std::uint64_t>(i))) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("QDA regularizes rank-deficient covariances") {
    auto data = blobs(60, 4, 3, 6);
    data.X.col(3) = data.X.col(0) * 2; // collinear column
    data.X.col(2).setConstant(1.0);
    auto q = make_classifier(ClassifierKind::Qda);
    CHECK_NOTHROW(q->fit(data.X, data.y, 1));
    CHECK(std::isfinite(q->score(data.X.row(0).transpose())));
    ClassicConfig strict;
    strict.qdaRegularize = false;
    auto s = make_classifier(ClassifierKind::Qda, strict);
    CHECK_THROWS_AS(s->fit(data.X, data.y, 1), SingularCovariance);
    CHECK_THROWS_AS(q->fit(data.X.topRows(3), {0, 1, 1}, 1), DegenerateClass);
}

TEST_CASE("standardizer keeps constant columns at zero") {
    Matrix X(4, 2);
    X << 1, 5, 2, 5, 3, 5, 4, 5;
    Standardizer s;
    s.fit(X);
    const Matrix z = s.apply_rows(X);
    CHECK(z.col(1).isZero());
    CHECK(z.col(0).mean() == doctest::Approx(0).epsilon(1e-12));
    CHECK((z.col(0).array().square().mean()) == doctest::Approx(1.0));
}

TEST_CASE("checkpoint files round-trip and reject foreign content") {
    const auto dir = std::filesystem::temp_directory_path() / "hawk_test_learn";
    std::filesystem::remove_all(dir);
    SequenceEncoder enc(small_encoder(3), 9);
    json cfg;
    to_json(cfg, enc.config());
    save_checkpoint(dir / "enc.bin", {kCheckpointSchemaVersion, "sequence-encoder", cfg, enc.to_json()});
    const auto cp = load_checkpoint(dir / "enc.bin", "sequence-encoder");
    const auto back = SequenceEncoder::from_json(cp.parameters);
    const Matrix seq = random_matrix(5, 3, 1);
    CHECK(back.encode(seq).pooled == enc.encode(seq).pooled);
    CHECK_THROWS_AS(load_checkpoint(dir / "enc.bin", "random-forest"), SchemaError);
    auto bytes = encode_checkpoint({2, "x", json::object(), json::object()});
    CHECK_THROWS_AS(decode_checkpoint(bytes), SchemaError);
    bytes = {0xff, 0x00, 0x12};
    CHECK_THROWS_AS(decode_checkpoint(bytes), SchemaError);
    std::filesystem::remove_all(dir);
}
