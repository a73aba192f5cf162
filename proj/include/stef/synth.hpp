#pragma once

#include <nlohmann/json_fwd.hpp>

#include "stef/grid.hpp"

namespace stef {

enum class NoiseKind { poisson, none };

/// Synthetic-city generator config: multiplicative daily/weekly seasonal
/// base with additive per-factor boosts, Poisson counts.
struct SynthConfig {
    int64_t W = 8, H = 8;
    int64_t T = 336;
    int64_t M = 1;
    double base_rate = 5.0;
    std::vector<double> factor_boost;  // size M
    double daily_amplitude = 0.0;      // [0, 1)
    double weekly_amplitude = 0.0;     // [0, 1)
    NoiseKind noise = NoiseKind::poisson;
    uint64_t seed = 0;
    int64_t poi_count = 2;  // POIs per factor

    void validate() const;
    static SynthConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct SynthDataset {
    GridSpec grid;
    DemandSeries demand;
    FactorSeries factors;
    std::vector<PoiRecord> pois;
};

/// Rate per cell-hour:
///   base_rate * (1 + daily*sin(2*pi*t/24)) * (1 + weekly*sin(2*pi*t/168))
///   + sum_m boost[m] * factor(t,w,h,m)
/// Counts are Poisson draws (or the rounded rate when noise = none), with
/// an independent seeded substream per timestep. The emitted factor
/// tensor is exactly encode_external_factors applied to the emitted POIs.
SynthDataset generate(const SynthConfig& config);

}  // namespace stef
