#include "stef/eval.hpp"

#include <cmath>
#include <cstring>
#include <deque>
#include <nlohmann/json.hpp>

namespace stef {

using nlohmann::json;

json MetricsReport::to_json() const {
    json j = {{"mae", mae},
              {"rmse", rmse},
              {"mape", mape ? json(*mape) : json(nullptr)},
              {"mape_excluded_cells", mape_excluded_cells},
              {"horizon", horizon == Horizon::one_step ? "one_step" : "rolling"},
              {"dataset_tag", dataset_tag}};
    if (horizon == Horizon::rolling) j["window"] = window;
    return j;
}

MetricsReport compute_metrics(const Tensor& preds, const Tensor& targets, MapeMode mode) {
    if (preds.shape() != targets.shape())
        throw std::invalid_argument("compute_metrics: shape mismatch " + shape_str(preds.shape()) +
                                    " vs " + shape_str(targets.shape()));
    if (preds.size() < 1) throw std::invalid_argument("compute_metrics: empty input");

    const double* p = preds.data();
    const double* x = targets.data();
    const int64_t n = preds.size();

    double abs_sum = 0, sq_sum = 0;
    double pct_sum = 0;
    double w_err = 0, w_dem = 0;
    int64_t included = 0;
    for (int64_t i = 0; i < n; ++i) {
        const double err = std::fabs(x[i] - p[i]);
        abs_sum += err;
        sq_sum += err * err;
        if (x[i] > 0) {
            pct_sum += err / x[i];
            ++included;
        }
        w_err += err;
        w_dem += x[i];
    }

    MetricsReport r;
    r.mae = abs_sum / static_cast<double>(n);
    r.rmse = std::sqrt(sq_sum / static_cast<double>(n));
    r.mape_excluded_cells = n - included;
    if (mode == MapeMode::exclude_zeros) {
        if (included > 0) r.mape = 100.0 * pct_sum / static_cast<double>(included);
    } else {
        if (w_dem > 0) r.mape = 100.0 * w_err / w_dem;
    }
    return r;
}

RollingResult rolling_evaluate(const Predictor& predict, int64_t L, const DemandSeries& demand,
                               const FactorSeries& factors, int64_t window, MapeMode mode) {
    if (window < 1) throw std::invalid_argument("rolling_evaluate: window must be at least 1");
    if (!(demand.grid == factors.grid) || demand.start_time != factors.start_time ||
        demand.T != factors.T)
        throw std::invalid_argument("rolling_evaluate: demand and factor series are not aligned");
    const int64_t t0 = demand.T - window;
    if (t0 < L)
        throw std::invalid_argument(
            "rolling_evaluate: window " + std::to_string(window) + " exceeds available data (T=" +
            std::to_string(demand.T) + " leaves no room for " + std::to_string(L) + " seed lags)");

    const int64_t W = demand.grid.width;
    const int64_t H = demand.grid.height;
    const int64_t M = factors.M;
    const int64_t cells = W * H;

    // Feedback buffer, most recent first; seeded from true demand.
    std::deque<std::vector<double>> lags;
    for (int64_t l = 0; l < L; ++l) {
        std::vector<double> g(static_cast<size_t>(cells));
        for (int64_t c = 0; c < cells; ++c)
            g[static_cast<size_t>(c)] =
                static_cast<double>(demand.counts[static_cast<size_t>((t0 - 1 - l) * cells + c)]);
        lags.push_back(std::move(g));
    }

    RollingResult res;
    res.predictions = Tensor::zeros({window, W, H});
    res.trace.reserve(static_cast<size_t>(window));

    Tensor E = Tensor::zeros({1, L, W, H});
    Tensor F = Tensor::zeros({1, L, W, H, M});
    Tensor truth = Tensor::zeros({window, W, H});

    for (int64_t s = 0; s < window; ++s) {
        const int64_t t = t0 + s;
        for (int64_t l = 0; l < L; ++l)
            std::memcpy(E.data() + l * cells, lags[static_cast<size_t>(l)].data(),
                        sizeof(double) * static_cast<size_t>(cells));
        // Factors are exogenous and known ahead: always the true series.
        for (int64_t l = 0; l < L; ++l) {
            const int64_t src = t - 1 - l;
            for (int64_t c = 0; c < cells; ++c)
                for (int64_t m = 0; m < M; ++m)
                    F.data()[(l * cells + c) * M + m] = static_cast<double>(
                        factors.factors[static_cast<size_t>((src * cells + c) * M + m)]);
        }

        Tensor pred = predict(E, F);
        if (pred.size() != cells)
            throw std::invalid_argument("rolling_evaluate: predictor returned " +
                                        shape_str(pred.shape()) + ", expected [1," +
                                        std::to_string(W) + "," + std::to_string(H) + "]");
        std::memcpy(res.predictions.data() + s * cells, pred.data(),
                    sizeof(double) * static_cast<size_t>(cells));

        double abs_sum = 0, sq_sum = 0;
        std::vector<double> fed(static_cast<size_t>(cells));
        for (int64_t c = 0; c < cells; ++c) {
            const double truth_v = static_cast<double>(demand.counts[static_cast<size_t>(t * cells + c)]);
            truth.data()[s * cells + c] = truth_v;
            const double err = std::fabs(truth_v - pred.data()[c]);
            abs_sum += err;
            sq_sum += err * err;
            // Demand is non-negative: clamp only what feeds back.
            fed[static_cast<size_t>(c)] = pred.data()[c] > 0 ? pred.data()[c] : 0.0;
        }
        res.trace.push_back({s, abs_sum / static_cast<double>(cells),
                             std::sqrt(sq_sum / static_cast<double>(cells))});

        lags.pop_back();
        lags.push_front(std::move(fed));
    }

    res.metrics = compute_metrics(res.predictions, truth, mode);
    res.metrics.horizon = Horizon::rolling;
    res.metrics.window = window;
    return res;
}

RollingResult rolling_evaluate(const ModelParams& params, const DemandSeries& demand,
                               const FactorSeries& factors, int64_t window, double demand_scale,
                               MapeMode mode) {
    if (!(demand_scale > 0))
        throw std::invalid_argument("rolling_evaluate: demand_scale must be positive");
    // The model operates in scaled units; raw grids cross the boundary here.
    Predictor p = [&params, demand_scale](const Tensor& E, const Tensor& F) {
        Tensor e = E;
        if (demand_scale != 1.0) {
            e = E.clone();
            for (double& v : e.values()) v /= demand_scale;
        }
        Tensor out = predict_batch(params, e, F);
        if (demand_scale != 1.0)
            for (double& v : out.values()) v *= demand_scale;
        return out;
    };
    return rolling_evaluate(p, params.config.L, demand, factors, window, mode);
}

Tensor HistoricalAverage::predict(int64_t time) const {
    const int64_t how = hour_of_week(time);
    Tensor out = Tensor::zeros({W, H});
    std::memcpy(out.data(), mean_by_how.data() + how * W * H,
                sizeof(double) * static_cast<size_t>(W * H));
    return out;
}

Tensor HistoricalAverage::predict_batch(std::span<const int64_t> times) const {
    const int64_t B = static_cast<int64_t>(times.size());
    Tensor out = Tensor::zeros({B, W, H});
    for (int64_t b = 0; b < B; ++b) {
        const int64_t how = hour_of_week(times[static_cast<size_t>(b)]);
        std::memcpy(out.data() + b * W * H, mean_by_how.data() + how * W * H,
                    sizeof(double) * static_cast<size_t>(W * H));
    }
    return out;
}

HistoricalAverage historical_average_baseline(const DemandSeries& train_demand) {
    if (train_demand.T < 168)
        throw std::invalid_argument(
            "historical_average_baseline: need at least one full week (168 slots), got " +
            std::to_string(train_demand.T));
    const int64_t W = train_demand.grid.width;
    const int64_t H = train_demand.grid.height;
    const int64_t cells = W * H;

    HistoricalAverage ha;
    ha.W = W;
    ha.H = H;
    ha.mean_by_how.assign(static_cast<size_t>(168 * cells), 0.0);
    std::vector<int64_t> bin_count(168, 0);

    for (int64_t t = 0; t < train_demand.T; ++t) {
        const int64_t how = hour_of_week(train_demand.time_at(t));
        bin_count[static_cast<size_t>(how)]++;
        for (int64_t c = 0; c < cells; ++c)
            ha.mean_by_how[static_cast<size_t>(how * cells + c)] +=
                static_cast<double>(train_demand.counts[static_cast<size_t>(t * cells + c)]);
    }
    for (int64_t how = 0; how < 168; ++how) {
        const int64_t n = bin_count[static_cast<size_t>(how)];
        if (n == 0) continue;  // cannot happen with T >= 168 on an hourly grid
        for (int64_t c = 0; c < cells; ++c)
            ha.mean_by_how[static_cast<size_t>(how * cells + c)] /= static_cast<double>(n);
    }
    return ha;
}

}  // namespace stef
