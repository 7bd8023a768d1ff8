#include "hawk/learn/layers.hpp"

#include "hawk/error.hpp"

#include <cmath>

namespace hawk::learn {

namespace {

Matrix glorot(int rows, int cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

Param make(const Matrix& value) {
    Param p;
    p.resize(value.rows(), value.cols());
    p.value = value;
    return p;
}

Param param_from_json(const json& j) { return make(matrix_from_json(j)); }

} // namespace

Dense::Dense(int in, int out, Activation a, std::mt19937_64& rng)
    : w(make(glorot(out, in, rng))), b(make(Matrix::Zero(out, 1))), act(a) {}

Matrix Dense::forward(const Matrix& x, Cache* cache) const {
    Matrix z = w.value * x;
    z.colwise() += b.value.col(0);
    Matrix y = activate(act, z);
    if (cache) {
        cache->x = x;
        cache->z = z;
        cache->y = y;
    }
    return y;
}

Matrix Dense::backward(const Matrix& dy, const Cache& c) {
    const Matrix dz = activation_backward(act, c.z, c.y, dy);
    w.grad.noalias() += dz * c.x.transpose();
    b.grad += dz.rowwise().sum();
    return w.value.transpose() * dz;
}

json Dense::to_json() const {
    return {{"w", learn::to_json(w.value)}, {"b", learn::to_json(b.value)}, {"activation", to_string(act)}};
}

Dense Dense::from_json(const json& j) {
    Dense d;
    d.w = param_from_json(j.at("w"));
    d.b = param_from_json(j.at("b"));
    d.act = activation_from_string(j.at("activation").get<std::string>());
    if (d.b.value.rows() != d.w.value.rows() || d.b.value.cols() != 1) throw SchemaError("dense bias shape");
    return d;
}

LstmLayer::LstmLayer(int in, int hidden, std::mt19937_64& rng)
    : wx(make(glorot(4 * hidden, in, rng))), wh(make(glorot(4 * hidden, hidden, rng))),
      b(make(Matrix::Zero(4 * hidden, 1))) {
    b.value.block(hidden, 0, hidden, 1).setOnes(); // forget-gate bias
}

Matrix LstmLayer::forward(const Matrix& x, Cache* cache) const {
    const Eigen::Index H = hidden(), T = x.cols();
    Matrix zx = wx.value * x;
    zx.colwise() += b.value.col(0);
    Matrix gates(4 * H, T), c(H, T), h(H, T);
    Vector hPrev = Vector::Zero(H), cPrev = Vector::Zero(H);
    for (Eigen::Index t = 0; t < T; ++t) {
        Vector z = zx.col(t) + wh.value * hPrev;
        for (Eigen::Index k = 0; k < H; ++k) {
            z(k) = sigmoid(z(k));
            z(H + k) = sigmoid(z(H + k));
            z(2 * H + k) = std::tanh(z(2 * H + k));
            z(3 * H + k) = sigmoid(z(3 * H + k));
        }
        gates.col(t) = z;
        c.col(t) = z.segment(H, H).cwiseProduct(cPrev) + z.segment(0, H).cwiseProduct(z.segment(2 * H, H));
        h.col(t) = z.segment(3 * H, H).cwiseProduct(c.col(t).unaryExpr([](double v) { return std::tanh(v); }));
        hPrev = h.col(t);
        cPrev = c.col(t);
    }
    if (cache) {
        cache->x = x;
        cache->gates = gates;
        cache->c = c;
        cache->h = h;
    }
    return h;
}

Matrix LstmLayer::backward(const Matrix& dh, const Cache& s) {
    const Eigen::Index H = hidden(), T = s.x.cols();
    Matrix dz(4 * H, T);
    Vector dhNext = Vector::Zero(H), dcNext = Vector::Zero(H);
    for (Eigen::Index t = T - 1; t >= 0; --t) {
        const auto g = s.gates.col(t);
        const Vector i = g.segment(0, H), f = g.segment(H, H), gg = g.segment(2 * H, H), o = g.segment(3 * H, H);
        const Vector tc = s.c.col(t).unaryExpr([](double v) { return std::tanh(v); });
        const Vector cPrev = t > 0 ? Vector(s.c.col(t - 1)) : Vector::Zero(H);
        const Vector dht = dh.col(t) + dhNext;
        const Vector dc = dht.cwiseProduct(o).cwiseProduct((1.0 - tc.array().square()).matrix()) + dcNext;
        auto col = dz.col(t);
        col.segment(0, H) = dc.cwiseProduct(gg).cwiseProduct(i.cwiseProduct((1.0 - i.array()).matrix()));
        col.segment(H, H) = dc.cwiseProduct(cPrev).cwiseProduct(f.cwiseProduct((1.0 - f.array()).matrix()));
        col.segment(2 * H, H) = dc.cwiseProduct(i).cwiseProduct((1.0 - gg.array().square()).matrix());
        col.segment(3 * H, H) = dht.cwiseProduct(tc).cwiseProduct(o.cwiseProduct((1.0 - o.array()).matrix()));
        dcNext = dc.cwiseProduct(f);
        dhNext = wh.value.transpose() * col;
        if (t > 0) wh.grad.noalias() += col * s.h.col(t - 1).transpose();
    }
    wx.grad.noalias() += dz * s.x.transpose();
    b.grad += dz.rowwise().sum();
    return wx.value.transpose() * dz;
}

json LstmLayer::to_json() const {
    return {{"wx", learn::to_json(wx.value)}, {"wh", learn::to_json(wh.value)}, {"b", learn::to_json(b.value)}};
}

LstmLayer LstmLayer::from_json(const json& j) {
    LstmLayer l;
    l.wx = param_from_json(j.at("wx"));
    l.wh = param_from_json(j.at("wh"));
    l.b = param_from_json(j.at("b"));
    const auto H = l.wh.value.cols();
    if (l.wh.value.rows() != 4 * H || l.wx.value.rows() != 4 * H || l.b.value.rows() != 4 * H)
        throw SchemaError("lstm parameter shapes disagree");
    return l;
}

Attention::Attention(int hidden, std::mt19937_64& rng)
    : wq(make(glorot(hidden, hidden, rng))), wk(make(glorot(hidden, hidden, rng))) {}

Matrix Attention::weights(const Matrix& h) const {
    const Matrix q = wq.value * h, k = wk.value * h;
    Matrix p = q.transpose() * k;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const double mx = p.row(i).maxCoeff();
        p.row(i) = (p.row(i).array() - mx).exp();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

Matrix Attention::forward(const Matrix& h, Cache* cache) const {
    Matrix p = weights(h);
    Matrix a = h * p.transpose();
    if (cache) {
        cache->h = h;
        cache->q = wq.value * h;
        cache->k = wk.value * h;
        cache->p = std::move(p);
    }
    return a;
}

Matrix Attention::backward(const Matrix& da, const Cache& s) {
    // a = h p^T
    Matrix dh = da * s.p;
    const Matrix dp = da.transpose() * s.h;
    Matrix ds = s.p.cwiseProduct(dp);
    const Vector rowDot = ds.rowwise().sum();
    ds -= (s.p.array().colwise() * rowDot.array()).matrix();
    // s = q^T k
    const Matrix dq = s.k * ds.transpose();
    const Matrix dk = s.q * ds;
    wq.grad.noalias() += dq * s.h.transpose();
    wk.grad.noalias() += dk * s.h.transpose();
    dh.noalias() += wq.value.transpose() * dq + wk.value.transpose() * dk;
    return dh;
}

json Attention::to_json() const { return {{"wq", learn::to_json(wq.value)}, {"wk", learn::to_json(wk.value)}}; }

Attention Attention::from_json(const json& j) {
    Attention a;
    a.wq = param_from_json(j.at("wq"));
    a.wk = param_from_json(j.at("wk"));
    return a;
}

void Standardizer::fit(const Matrix& rows, double floor) {
    const auto d = rows.cols();
    mean = Vector::Zero(d);
    scale = Vector::Ones(d);
    if (rows.rows() == 0) return;
    mean = rows.colwise().mean().transpose();
    for (Eigen::Index c = 0; c < d; ++c) {
        const double var = (rows.col(c).array() - mean(c)).square().mean();
        const double sd = std::sqrt(var);
        scale(c) = sd < floor ? 1.0 : sd;
    }
}

Matrix Standardizer::apply_rows(const Matrix& rows) const {
    if (!fitted()) return rows;
    if (rows.cols() != mean.size()) throw ConfigError("standardizer width mismatch");
    return ((rows.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

Vector Standardizer::apply(const Vector& x) const {
    if (!fitted()) return x;
    if (x.size() != mean.size()) throw ConfigError("standardizer width mismatch");
    return ((x - mean).array() / scale.array()).matrix();
}

json Standardizer::to_json() const { return {{"mean", learn::to_json(mean)}, {"scale", learn::to_json(scale)}}; }

Standardizer Standardizer::from_json(const json& j) {
    Standardizer s;
    s.mean = matrix_from_json(j.at("mean"));
    s.scale = matrix_from_json(j.at("scale"));
    return s;
}

} // namespace hawk::learn
