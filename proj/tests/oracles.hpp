#pragma once

// Independent reference implementations used only by tests. Everything
// here is written as plain nested loops straight from the defining
// formulas, deliberately sharing no code with src/.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "stef/common.hpp"
#include "stef/tensor.hpp"

namespace oracle {

// 3x3 same-padding cross-correlation, the six-nested-loop definition.
inline std::vector<double> conv2d_same(const std::vector<double>& in, int64_t B, int64_t W,
                                       int64_t H, int64_t cin, const std::vector<double>& krn,
                                       int64_t cout, const std::vector<double>& bias) {
    std::vector<double> out(static_cast<size_t>(B * W * H * cout), 0.0);
    for (int64_t b = 0; b < B; ++b)
        for (int64_t w = 0; w < W; ++w)
            for (int64_t h = 0; h < H; ++h)
                for (int64_t co = 0; co < cout; ++co) {
                    double acc = bias[static_cast<size_t>(co)];
                    for (int64_t kw = 0; kw < 3; ++kw)
                        for (int64_t kh = 0; kh < 3; ++kh)
                            for (int64_t ci = 0; ci < cin; ++ci) {
                                const int64_t iw = w + kw - 1;
                                const int64_t ih = h + kh - 1;
                                if (iw < 0 || iw >= W || ih < 0 || ih >= H) continue;
                                acc += in[static_cast<size_t>(((b * W + iw) * H + ih) * cin + ci)] *
                                       krn[static_cast<size_t>(((kw * 3 + kh) * cin + ci) * cout + co)];
                            }
                    out[static_cast<size_t>(((b * W + w) * H + h) * cout + co)] = acc;
                }
    return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmOut {
    std::vector<double> h;
    std::vector<double> c;
};

// One LSTM cell update from the gate equations, packed order [i, f, g, o].
inline LstmOut lstm_step(const std::vector<double>& x, const std::vector<double>& h_prev,
                         const std::vector<double>& c_prev, const std::vector<double>& w_ih,
                         const std::vector<double>& w_hh, const std::vector<double>& bias,
                         int64_t d, int64_t u) {
    std::vector<double> gates(static_cast<size_t>(4 * u), 0.0);
    for (int64_t j = 0; j < 4 * u; ++j) {
        double acc = bias[static_cast<size_t>(j)];
        for (int64_t i = 0; i < d; ++i) acc += x[static_cast<size_t>(i)] * w_ih[static_cast<size_t>(i * 4 * u + j)];
        for (int64_t i = 0; i < u; ++i)
            acc += h_prev[static_cast<size_t>(i)] * w_hh[static_cast<size_t>(i * 4 * u + j)];
        gates[static_cast<size_t>(j)] = acc;
    }
    LstmOut out;
    out.h.resize(static_cast<size_t>(u));
    out.c.resize(static_cast<size_t>(u));
    for (int64_t j = 0; j < u; ++j) {
        const double gi = sigmoid(gates[static_cast<size_t>(j)]);
        const double gf = sigmoid(gates[static_cast<size_t>(u + j)]);
        const double gg = std::tanh(gates[static_cast<size_t>(2 * u + j)]);
        const double go = sigmoid(gates[static_cast<size_t>(3 * u + j)]);
        const double c = gf * c_prev[static_cast<size_t>(j)] + gi * gg;
        out.c[static_cast<size_t>(j)] = c;
        out.h[static_cast<size_t>(j)] = go * std::tanh(c);
    }
    return out;
}

struct Metrics {
    double mae = 0;
    double rmse = 0;
    std::optional<double> mape;
    int64_t excluded = 0;
};

// Scalar-loop MAE / RMSE / MAPE with the zero-demand exclusion rule.
inline Metrics metrics(const std::vector<double>& pred, const std::vector<double>& target) {
    Metrics m;
    double abs_sum = 0, sq_sum = 0, pct = 0;
    int64_t inc = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double e = std::fabs(target[i] - pred[i]);
        abs_sum += e;
        sq_sum += e * e;
        if (target[i] > 0) {
            pct += e / target[i];
            ++inc;
        } else {
            ++m.excluded;
        }
    }
    m.mae = abs_sum / static_cast<double>(pred.size());
    m.rmse = std::sqrt(sq_sum / static_cast<double>(pred.size()));
    if (inc > 0) m.mape = 100.0 * pct / static_cast<double>(inc);
    return m;
}

struct GradCheck {
    double max_abs_diff = 0;
    double worst_analytic = 0;
    double worst_numeric = 0;
    int64_t failures = 0;
};

// Central finite differences of `loss_fn` wrt every element of `param`,
// compared against `analytic`. An element passes when
// |fd - g| <= max(abs_floor, rel_tol * max(|fd|, |g|)).
inline GradCheck finite_diff_check(stef::Tensor& param, std::span<const double> analytic,
                                   const std::function<double()>& loss_fn, double step = 1e-5,
                                   double rel_tol = 1e-4, double abs_floor = 1e-8) {
    GradCheck res;
    double* pv = param.data();
    for (int64_t i = 0; i < param.size(); ++i) {
        const double saved = pv[i];
        pv[i] = saved + step;
        const double up = loss_fn();
        pv[i] = saved - step;
        const double down = loss_fn();
        pv[i] = saved;
        const double fd = (up - down) / (2.0 * step);
        const double g = analytic[static_cast<size_t>(i)];
        const double diff = std::fabs(fd - g);
        const double tol = std::max(abs_floor, rel_tol * std::max(std::fabs(fd), std::fabs(g)));
        if (diff > tol) {
            res.failures++;
            if (diff > res.max_abs_diff) {
                res.max_abs_diff = diff;
                res.worst_analytic = g;
                res.worst_numeric = fd;
            }
        }
    }
    return res;
}

inline stef::Tensor random_tensor(stef::Rng& rng, stef::Shape shape, double lo = -1.0,
                                  double hi = 1.0) {
    stef::Tensor t = stef::Tensor::zeros(std::move(shape));
    for (double& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

}  // namespace oracle
