#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "stef/adam.hpp"
#include "stef/model.hpp"

namespace stef {

struct TrainConfig {
    double learning_rate = 1e-3;
    int64_t batch_size = 256;
    int64_t max_epochs = 2000;
    int64_t early_stop_patience = 100;
    uint64_t seed = 0;
    bool shuffle = true;  // within the chronological training block only

    void validate() const;
};

enum class StopReason { early_stop, max_epochs };

struct EpochStats {
    int64_t epoch = 0;  // 1-based
    double train_loss = 0;
    double val_loss = 0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    int64_t best_epoch = 0;
    StopReason stopped_reason = StopReason::max_epochs;
    double wall_time_seconds = 0;

    nlohmann::json to_json() const;
};

/// Mean over the batch of the per-sample mean absolute cell error;
/// differentiable through the tape.
Tensor mae_loss(Tape& tape, const Tensor& pred, const Tensor& target);

/// Plain MAE between two equal-shape arrays (no tape).
double mae_value(const Tensor& pred, const Tensor& target);

struct TrainResult {
    ModelParams params;  // best-validation snapshot, not the last epoch
    TrainReport report;
};

/// Mini-batch MAE training with Adam and early stopping on validation
/// loss. Deterministic given config.seed and fixed inputs.
TrainResult train(const ModelParams& init, const SampleSet& train_set, const SampleSet& val_set,
                  const TrainConfig& config);

}  // namespace stef
