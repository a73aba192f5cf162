#include "stef/synth.hpp"

#include <cmath>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>

namespace stef {

using nlohmann::json;

void SynthConfig::validate() const {
    if (W < 1 || H < 1 || T < 1 || M < 1)
        throw std::invalid_argument("SynthConfig: W, H, T, M must all be positive");
    if (!(base_rate >= 0)) throw std::invalid_argument("SynthConfig: base_rate must be non-negative");
    if (static_cast<int64_t>(factor_boost.size()) != M)
        throw std::invalid_argument("SynthConfig: factor_boost needs " + std::to_string(M) +
                                    " entries, got " + std::to_string(factor_boost.size()));
    for (double b : factor_boost)
        if (!(b >= 0)) throw std::invalid_argument("SynthConfig: factor boosts must be non-negative");
    auto amp_ok = [](double a) { return a >= 0 && a < 1; };
    if (!amp_ok(daily_amplitude) || !amp_ok(weekly_amplitude))
        throw std::invalid_argument("SynthConfig: amplitudes must lie in [0, 1)");
    if (poi_count < 1) throw std::invalid_argument("SynthConfig: poi_count must be positive");
}

SynthConfig SynthConfig::from_json(const json& j) {
    SynthConfig c;
    c.W = j.at("width").get<int64_t>();
    c.H = j.at("height").get<int64_t>();
    c.T = j.at("hours").get<int64_t>();
    c.M = j.at("factors").get<int64_t>();
    c.base_rate = j.at("base_rate").get<double>();
    c.factor_boost = j.at("factor_boosts").get<std::vector<double>>();
    c.daily_amplitude = j.value("daily_amplitude", 0.0);
    c.weekly_amplitude = j.value("weekly_amplitude", 0.0);
    const std::string noise = j.value("noise", "poisson");
    if (noise == "poisson")
        c.noise = NoiseKind::poisson;
    else if (noise == "none")
        c.noise = NoiseKind::none;
    else
        throw std::invalid_argument("SynthConfig: noise must be 'poisson' or 'none', got '" +
                                    noise + "'");
    c.seed = j.value("seed", static_cast<uint64_t>(0));
    c.poi_count = j.value("poi_count", static_cast<int64_t>(2));
    c.validate();
    return c;
}

json SynthConfig::to_json() const {
    return {{"width", W},
            {"height", H},
            {"hours", T},
            {"factors", M},
            {"base_rate", base_rate},
            {"factor_boosts", factor_boost},
            {"daily_amplitude", daily_amplitude},
            {"weekly_amplitude", weekly_amplitude},
            {"noise", noise == NoiseKind::poisson ? "poisson" : "none"},
            {"seed", seed},
            {"poi_count", poi_count}};
}

SynthDataset generate(const SynthConfig& config) {
    config.validate();
    if (config.T % 24 != 0)
        std::cerr << "warning: synth hours " << config.T << " is not a multiple of 24\n";

    SynthDataset out;
    out.grid.min_lat = 40.70;
    out.grid.max_lat = 40.70 + 0.01 * static_cast<double>(config.H);
    out.grid.min_lon = -74.02;
    out.grid.max_lon = -74.02 + 0.01 * static_cast<double>(config.W);
    out.grid.width = config.W;
    out.grid.height = config.H;
    out.grid.resolution_minutes = 60;
    const int64_t start = parse_iso8601("2022-01-03T00:00:00Z");  // a Monday

    // POI placement and schedules come from one stream; counts use
    // per-timestep substreams so the demand draw order is t-local.
    Rng poi_rng(splitmix64(config.seed));
    const double dlat = (out.grid.max_lat - out.grid.min_lat) / static_cast<double>(config.H);
    const double dlon = (out.grid.max_lon - out.grid.min_lon) / static_cast<double>(config.W);
    for (int64_t m = 0; m < config.M; ++m)
        for (int64_t i = 0; i < config.poi_count; ++i) {
            PoiRecord p;
            p.name = "factor" + std::to_string(m) + "_poi" + std::to_string(i);
            const int64_t w = poi_rng.uniform_int(config.W);
            const int64_t h = poi_rng.uniform_int(config.H);
            p.lon = out.grid.min_lon + (static_cast<double>(w) + 0.5) * dlon;
            p.lat = out.grid.min_lat + (static_cast<double>(h) + 0.5) * dlat;
            p.factor_index = m;
            const int64_t first = poi_rng.uniform_int(24);
            const int64_t span = 4 + poi_rng.uniform_int(5);  // 4..8 active hours
            for (int64_t s = 0; s < span; ++s)
                p.schedule.active_hours.insert(static_cast<int>((first + s) % 24));
            out.pois.push_back(std::move(p));
        }

    out.factors =
        encode_external_factors(out.pois, out.grid, start, config.T, config.M).series;

    out.demand.grid = out.grid;
    out.demand.start_time = start;
    out.demand.T = config.T;
    out.demand.counts.assign(static_cast<size_t>(config.T * config.W * config.H), 0);

    const double two_pi = 2.0 * std::numbers::pi;
    for (int64_t t = 0; t < config.T; ++t) {
        Rng rng(splitmix64(config.seed ^ (0x9e3779b97f4a7c15ull + static_cast<uint64_t>(t))));
        const double hour = static_cast<double>(t);
        const double seasonal = config.base_rate *
                                (1.0 + config.daily_amplitude * std::sin(two_pi * hour / 24.0)) *
                                (1.0 + config.weekly_amplitude * std::sin(two_pi * hour / 168.0));
        for (int64_t w = 0; w < config.W; ++w)
            for (int64_t h = 0; h < config.H; ++h) {
                double rate = seasonal;
                for (int64_t m = 0; m < config.M; ++m)
                    if (out.factors.at(t, w, h, m))
                        rate += config.factor_boost[static_cast<size_t>(m)];
                out.demand.at(t, w, h) = config.noise == NoiseKind::poisson
                                             ? rng.poisson(rate)
                                             : static_cast<int64_t>(std::llround(rate));
            }
    }
    return out;
}

}  // namespace stef
