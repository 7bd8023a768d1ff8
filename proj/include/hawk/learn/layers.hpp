#pragma once

#include "hawk/learn/nn.hpp"

namespace hawk::learn {

// Columns are samples (or time steps) throughout.
struct Dense {
    Param w, b;
    Activation act = Activation::Linear;

    struct Cache {
        Matrix x, z, y;
    };

    Dense() = default;
    Dense(int in, int out, Activation a, std::mt19937_64& rng);

    int in() const { return static_cast<int>(w.value.cols()); }
    int out() const { return static_cast<int>(w.value.rows()); }

    Matrix forward(const Matrix& x, Cache* cache = nullptr) const;
    // Adds parameter gradients and returns dL/dx.
    Matrix backward(const Matrix& dy, const Cache& cache);
    std::vector<Param*> params() { return {&w, &b}; }

    json to_json() const;
    static Dense from_json(const json& j);
};

// One LSTM layer, gate order (input, forget, cell, output), zero initial state.
struct LstmLayer {
    Param wx, wh, b;

    struct Cache {
        Matrix x, gates, c, h;
    };

    LstmLayer() = default;
    LstmLayer(int in, int hidden, std::mt19937_64& rng);

    int in() const { return static_cast<int>(wx.value.cols()); }
    int hidden() const { return static_cast<int>(wh.value.cols()); }

    Matrix forward(const Matrix& x, Cache* cache = nullptr) const;
    Matrix backward(const Matrix& dh, const Cache& cache);
    std::vector<Param*> params() { return {&wx, &wh, &b}; }

    json to_json() const;
    static LstmLayer from_json(const json& j);
};

// Luong dot-product attention over the full sequence of hidden states:
// a_i = sum_j softmax_j((Wq h_i) . (Wk h_j)) h_j.
struct Attention {
    Param wq, wk;

    struct Cache {
        Matrix h, q, k, p; // p(i, j) = weight of step j for query step i
    };

    Attention() = default;
    Attention(int hidden, std::mt19937_64& rng);

    Matrix forward(const Matrix& h, Cache* cache = nullptr) const;
    Matrix weights(const Matrix& h) const;
    Matrix backward(const Matrix& da, const Cache& cache);
    std::vector<Param*> params() { return {&wq, &wk}; }

    json to_json() const;
    static Attention from_json(const json& j);
};

// Per-column z-scoring. Columns whose std falls below `floor` keep scale 1,
// so a constant column maps to 0.
struct Standardizer {
    Vector mean, scale;

    bool fitted() const { return mean.size() > 0; }
    // Rows are samples.
    void fit(const Matrix& rows, double floor = 1e-9);
    Matrix apply_rows(const Matrix& rows) const;
    Vector apply(const Vector& x) const;

    json to_json() const;
    static Standardizer from_json(const json& j);
};

} // namespace hawk::learn
