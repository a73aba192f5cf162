#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stef/grid.hpp"
#include "stef/ops.hpp"

namespace stef {

/// Architecture hyperparameters. N = W*H is the output layer width.
struct StefConfig {
    int64_t L = 4;    // lag count
    int64_t W = 0;    // grid width
    int64_t H = 0;    // grid height
    int64_t K = 32;   // conv channels per layer
    int64_t M = 0;    // external factor count
    int64_t d = 128;  // per-lag dense width
    int64_t u = 128;  // lstm units

    int64_t N() const { return W * H; }
    /// Flattened per-lag feature width after factor fusion: W*H*(K+M).
    int64_t flat_width() const { return W * H * (K + M); }
    void validate() const;
    bool operator==(const StefConfig&) const = default;
};

struct DenseParams {
    Tensor w;
    Tensor b;
};

/// Full parameter collection: two conv+batch-norm stages, L per-lag dense
/// layers, the LSTM gates, and the output head.
struct ModelParams {
    StefConfig config;
    Tensor conv1_k, conv1_b;  // [3,3,1,K], [K]
    BatchNormParams bn1;
    Tensor conv2_k, conv2_b;  // [3,3,K,K], [K]
    BatchNormParams bn2;
    std::vector<DenseParams> dense1;  // L entries, each [flat_width, d] + [d]
    LstmParams lstm;                  // [d,4u], [u,4u], [4u]
    DenseParams dense2;               // [u, N] + [N]

    /// Trainable arrays in a fixed order (excludes running statistics).
    std::vector<Tensor> trainable();
    /// Every array including batch-norm running statistics, with stable
    /// names (checkpoint layout).
    std::vector<std::pair<std::string, Tensor>> named_arrays();

    /// Closed-form trainable parameter count for `config`.
    static int64_t parameter_count(const StefConfig& config);

    ModelParams clone() const;
    bool all_finite() const;
};

/// Glorot-uniform weights, zero biases, unit gamma; deterministic in seed.
ModelParams init_params(const StefConfig& config, uint64_t seed);

/// Shapes of the named intermediate stages of the last forward call.
struct ForwardTrace {
    std::vector<std::pair<std::string, Shape>> stages;
};

/// Runs the network: per-lag conv stack with batch norm and relu, factor
/// concat, spatial flatten, per-lag dense, LSTM over lags (oldest first),
/// linear head reshaped to the grid. E is [B, L, W, H], F is
/// [B, L, W, H, M]; the result is [B, W, H]. Train mode updates the
/// batch-norm running statistics.
Tensor forward(Tape& tape, ModelParams& params, const Tensor& E, const Tensor& F, Mode mode,
               ForwardTrace* trace = nullptr);

/// Infer-mode forward without parameter mutation; requires populated
/// batch-norm statistics.
Tensor predict_batch(const ModelParams& params, const Tensor& E, const Tensor& F);
Tensor predict_batch(const ModelParams& params, const SampleSet& samples);

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
    ModelParams params;
    uint64_t seed = 0;
    int64_t trained_epochs = 0;
    double demand_scale = 1.0;
};

/// Versioned container holding every array in `named_arrays` order;
/// round-trips predictions bit-identically.
void save_checkpoint(const std::string& path, const ModelParams& params, uint64_t seed,
                     int64_t trained_epochs, double demand_scale = 1.0);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace stef
