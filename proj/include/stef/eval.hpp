#pragma once

#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>

#include "stef/model.hpp"

namespace stef {

enum class Horizon { one_step, rolling };

enum class MapeMode {
    exclude_zeros,  // elementwise percentage over cells with demand > 0
    weighted        // sum of absolute errors over sum of demand
};

struct MetricsReport {
    double mae = 0;
    double rmse = 0;
    std::optional<double> mape;  // empty when every cell is excluded
    int64_t mape_excluded_cells = 0;
    Horizon horizon = Horizon::one_step;
    int64_t window = 0;  // rolling only
    std::string dataset_tag;

    nlohmann::json to_json() const;
};

/// MAE/RMSE over all cells and times; MAPE per MapeMode. preds and
/// targets are [B, W, H].
MetricsReport compute_metrics(const Tensor& preds, const Tensor& targets,
                              MapeMode mode = MapeMode::exclude_zeros);

/// Single-sample predictor: ([1,L,W,H], [1,L,W,H,M]) -> [1,W,H]. Called
/// once per rolling step, in step order.
using Predictor = std::function<Tensor(const Tensor& E, const Tensor& F)>;

struct RollingStep {
    int64_t step = 0;
    double mae = 0;
    double rmse = 0;
};

struct RollingResult {
    MetricsReport metrics;
    std::vector<RollingStep> trace;
    Tensor predictions;  // [window, W, H], raw (unclamped)
};

/// Rolling protocol over the last `window` timesteps of the series: the
/// first step uses true demand lags, every later step feeds the previous
/// prediction back (clamped at zero) while factor lags stay exogenous.
/// Metrics score the raw predictions against true demand.
RollingResult rolling_evaluate(const Predictor& predict, int64_t L, const DemandSeries& demand,
                               const FactorSeries& factors, int64_t window,
                               MapeMode mode = MapeMode::exclude_zeros);

/// Same protocol driven by a trained model. demand_scale must match the
/// checkpoint the model came from.
RollingResult rolling_evaluate(const ModelParams& params, const DemandSeries& demand,
                               const FactorSeries& factors, int64_t window,
                               double demand_scale = 1.0, MapeMode mode = MapeMode::exclude_zeros);

/// Per-cell mean demand by hour-of-week, fit on a training series.
struct HistoricalAverage {
    int64_t W = 0, H = 0;
    std::vector<double> mean_by_how;  // [168, W, H]

    Tensor predict(int64_t time) const;                         // [W, H]
    Tensor predict_batch(std::span<const int64_t> times) const;  // [B, W, H]
};

/// Requires at least one full week of training data.
HistoricalAverage historical_average_baseline(const DemandSeries& train_demand);

}  // namespace stef
