#include "stef/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

namespace stef {

using nlohmann::json;

void TrainConfig::validate() const {
    if (!(learning_rate >= 0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("TrainConfig: learning_rate must be finite and non-negative");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be positive");
    if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be positive");
    if (early_stop_patience < 1)
        throw std::invalid_argument("TrainConfig: early_stop_patience must be positive");
}

json TrainReport::to_json() const {
    json eps = json::array();
    for (const EpochStats& e : epochs)
        eps.push_back({{"epoch", e.epoch}, {"train_mae", e.train_loss}, {"val_mae", e.val_loss}});
    return {{"epochs", eps},
            {"best_epoch", best_epoch},
            {"stopped_reason", stopped_reason == StopReason::early_stop ? "early_stop" : "max_epochs"},
            {"wall_time_seconds", wall_time_seconds}};
}

Tensor mae_loss(Tape& tape, const Tensor& pred, const Tensor& target) {
    if (pred.shape() != target.shape())
        throw std::invalid_argument("mae_loss: shape mismatch " + shape_str(pred.shape()) + " vs " +
                                    shape_str(target.shape()));
    // Per-sample grids all have N cells, so the batch mean of per-sample
    // means equals one global mean.
    return ops::mean_all(tape, ops::abs(tape, ops::sub(tape, pred, target)));
}

double mae_value(const Tensor& pred, const Tensor& target) {
    if (pred.shape() != target.shape())
        throw std::invalid_argument("mae_value: shape mismatch " + shape_str(pred.shape()) +
                                    " vs " + shape_str(target.shape()));
    double sum = 0;
    const double* a = pred.data();
    const double* b = target.data();
    for (int64_t i = 0; i < pred.size(); ++i) sum += std::fabs(a[i] - b[i]);
    return sum / static_cast<double>(pred.size());
}

namespace {

// Validation MAE in infer mode, batched to bound peak memory.
double validation_mae(ModelParams& params, const SampleSet& val, int64_t batch_size) {
    double abs_sum = 0;
    int64_t cells = 0;
    for (int64_t b0 = 0; b0 < val.size(); b0 += batch_size) {
        const int64_t b1 = std::min(val.size(), b0 + batch_size);
        const SampleSet chunk = val.subset(b0, b1);
        Tape tape;
        Tensor pred = forward(tape, params, chunk.E, chunk.F, Mode::infer);
        const double* pv = pred.data();
        const double* tv = chunk.targets.data();
        for (int64_t i = 0; i < pred.size(); ++i) abs_sum += std::fabs(pv[i] - tv[i]);
        cells += pred.size();
    }
    return abs_sum / static_cast<double>(cells);
}

}  // namespace

TrainResult train(const ModelParams& init, const SampleSet& train_set, const SampleSet& val_set,
                  const TrainConfig& config) {
    config.validate();
    if (train_set.size() < 1) throw std::invalid_argument("train: training set is empty");
    if (val_set.size() < 1) throw std::invalid_argument("train: validation set is empty");

    const auto t_start = std::chrono::steady_clock::now();

    ModelParams params = init.clone();
    std::vector<Tensor> trainable = params.trainable();
    AdamState adam = AdamState::make(trainable, {.learning_rate = config.learning_rate});
    Rng rng(config.seed);

    TrainResult result;
    result.params = params.clone();
    double best_val = std::numeric_limits<double>::infinity();
    int64_t epochs_since_best = 0;
    result.report.stopped_reason = StopReason::max_epochs;

    std::vector<int64_t> order(static_cast<size_t>(train_set.size()));
    for (int64_t i = 0; i < train_set.size(); ++i) order[static_cast<size_t>(i)] = i;

    for (int64_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        if (config.shuffle) rng.shuffle(order);

        double loss_weighted = 0;
        int64_t batch_index = 0;
        for (int64_t b0 = 0; b0 < train_set.size(); b0 += config.batch_size, ++batch_index) {
            const int64_t b1 = std::min(train_set.size(), b0 + config.batch_size);
            const SampleSet batch = train_set.gather(
                std::span<const int64_t>(order.data() + b0, static_cast<size_t>(b1 - b0)));

            Tape tape;
            Tensor pred = forward(tape, params, batch.E, batch.F, Mode::train);
            Tensor loss = mae_loss(tape, pred, batch.targets);
            const double loss_v = loss.item();
            if (!std::isfinite(loss_v))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batch_index));
            tape.backward(loss);
            adam_update(trainable, adam);
            loss_weighted += loss_v * static_cast<double>(b1 - b0);
        }
        const double train_loss = loss_weighted / static_cast<double>(train_set.size());
        const double val_loss = validation_mae(params, val_set, config.batch_size);
        if (!std::isfinite(val_loss))
            throw std::runtime_error("train: non-finite validation loss at epoch " +
                                     std::to_string(epoch));
        if (!params.all_finite())
            throw std::runtime_error("train: parameters became non-finite at epoch " +
                                     std::to_string(epoch));

        result.report.epochs.push_back({epoch, train_loss, val_loss});
        if (val_loss < best_val) {
            best_val = val_loss;
            result.params = params.clone();
            result.report.best_epoch = epoch;
            epochs_since_best = 0;
        } else {
            epochs_since_best++;
        }
        if (epochs_since_best >= config.early_stop_patience) {
            result.report.stopped_reason = StopReason::early_stop;
            break;
        }
    }

    result.report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

}  // namespace stef
