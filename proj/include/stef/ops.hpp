#pragma once

#include <utility>

#include "stef/tensor.hpp"

namespace stef {

enum class Mode { train, infer };

/// Learnable batch-norm affine plus running statistics. The running
/// arrays are state, not parameters: train-mode forward updates them and
/// no gradient flows into them.
struct BatchNormParams {
    Tensor gamma;
    Tensor beta;
    Tensor running_mean;
    Tensor running_var;
    int64_t batches_seen = 0;

    static BatchNormParams make(int64_t channels);
    BatchNormParams clone() const;
};

/// Gate parameters for one LSTM layer. Packed gate order along the last
/// axis is [input, forget, candidate, output].
struct LstmParams {
    Tensor w_ih;  // [input_dim, 4*units]
    Tensor w_hh;  // [units, 4*units]
    Tensor bias;  // [4*units]

    int64_t units() const { return w_hh.dim(0); }
    int64_t input_dim() const { return w_ih.dim(0); }
};

namespace ops {

// Elementwise, same-shape.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);

Tensor relu(Tape& tape, const Tensor& x);
Tensor sigmoid(Tape& tape, const Tensor& x);
Tensor tanh(Tape& tape, const Tensor& x);
/// |x|; the subgradient at 0 is defined as 0.
Tensor abs(Tape& tape, const Tensor& x);

// Reductions to a scalar tensor of shape [1].
Tensor sum_all(Tape& tape, const Tensor& x);
Tensor mean_all(Tape& tape, const Tensor& x);

/// x[..., in] * w[in, out] + b[out], applied along the last axis.
Tensor dense_affine(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b);
/// x[..., in] * w[in, out], no bias.
Tensor matmul(Tape& tape, const Tensor& x, const Tensor& w);

/// 3x3 same-padding cross-correlation over [B, W, H, C_in] with kernels
/// [3, 3, C_in, C_out] and bias [C_out]; zero padding of width 1.
Tensor conv2d_same(Tape& tape, const Tensor& input, const Tensor& kernels, const Tensor& bias);

/// Normalizes over every non-channel axis (channels last). Train mode
/// uses batch statistics and folds them into the running averages; infer
/// mode uses the stored running statistics.
Tensor batch_norm(Tape& tape, const Tensor& x, BatchNormParams& bn, Mode mode,
                  double eps = 1e-5, double momentum = 0.9);

/// Concatenates along the last axis; all leading axes must agree.
Tensor concat_last_axis(Tape& tape, const Tensor& a, const Tensor& b);

/// out[..., j] = x[..., start + j] for j in [0, len).
Tensor slice_last_axis(Tape& tape, const Tensor& x, int64_t start, int64_t len);

/// Same elements under a new shape (storage is shared).
Tensor reshape(Tape& tape, const Tensor& x, Shape shape);

/// Picks index `at` from axis 1: [d0, d1, rest...] -> [d0, rest...].
Tensor select_axis1(Tape& tape, const Tensor& x, int64_t at);

/// One LSTM cell update; returns (h_t, c_t). Accepts [d] / [u] vectors or
/// [B, d] / [B, u] batches.
std::pair<Tensor, Tensor> lstm_step(Tape& tape, const Tensor& x, const Tensor& h_prev,
                                    const Tensor& c_prev, const LstmParams& params);

}  // namespace ops
}  // namespace stef
