#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "stef/tensor.hpp"
#include "stef/timeutil.hpp"

namespace stef {

/// Uniform lat/lon grid over a bounding box; width cells span longitude,
/// height cells span latitude.
struct GridSpec {
    double min_lat = 0, max_lat = 0;
    double min_lon = 0, max_lon = 0;
    int64_t width = 0, height = 0;
    int64_t resolution_minutes = 60;

    void validate() const;
    int64_t cell_count() const { return width * height; }
    int64_t slot_seconds() const { return resolution_minutes * 60; }

    /// Cell assignment: lower edges inclusive, upper edges exclusive,
    /// except the global max edges which are inclusive. Returns false for
    /// coordinates outside the box.
    bool locate(double lat, double lon, int64_t* w, int64_t* h) const;

    bool operator==(const GridSpec&) const = default;
};

struct TripRecord {
    int64_t pickup_time = 0;  // unix seconds, UTC
    double pickup_lat = 0;
    double pickup_lon = 0;
};

/// Hourly (or coarser) ride counts per grid cell: the demand sequence.
struct DemandSeries {
    GridSpec grid;
    int64_t start_time = 0;
    int64_t T = 0;
    std::vector<int64_t> counts;  // [T, width, height]

    int64_t& at(int64_t t, int64_t w, int64_t h) {
        return counts[static_cast<size_t>((t * grid.width + w) * grid.height + h)];
    }
    int64_t at(int64_t t, int64_t w, int64_t h) const {
        return counts[static_cast<size_t>((t * grid.width + w) * grid.height + h)];
    }
    int64_t time_at(int64_t t) const { return start_time + t * grid.slot_seconds(); }

    /// Timesteps [t0, t1) as a new series.
    DemandSeries slice_time(int64_t t0, int64_t t1) const;
};

/// Weekly-periodic activity pattern for one external factor source.
struct FactorSchedule {
    std::set<int> active_hours;        // hour of day, 0..23
    std::set<int> active_days;         // 0 = Monday .. 6 = Sunday; empty = all days

    bool active_at(int64_t unix_seconds) const {
        if (!active_days.empty() && !active_days.count(day_of_week(unix_seconds))) return false;
        return active_hours.count(hour_of_day(unix_seconds)) > 0;
    }
};

struct PoiRecord {
    std::string name;
    double lat = 0, lon = 0;
    int64_t factor_index = 0;
    FactorSchedule schedule;
};

/// Binary external-factor activations per cell and timestep.
struct FactorSeries {
    GridSpec grid;
    int64_t start_time = 0;
    int64_t T = 0;
    int64_t M = 0;
    std::vector<uint8_t> factors;  // [T, width, height, M], values 0/1

    uint8_t at(int64_t t, int64_t w, int64_t h, int64_t m) const {
        return factors[static_cast<size_t>(((t * grid.width + w) * grid.height + h) * M + m)];
    }
    uint8_t& at(int64_t t, int64_t w, int64_t h, int64_t m) {
        return factors[static_cast<size_t>(((t * grid.width + w) * grid.height + h) * M + m)];
    }
};

/// Aligned training triples: lag stacks, factor stacks and targets. Lag
/// slice l of sample b holds the source series at target_time(b)-(l+1)
/// slots, so index 0 is the most recent hour.
struct SampleSet {
    int64_t L = 0, W = 0, H = 0, M = 0;
    Tensor E;        // [B, L, W, H]
    Tensor F;        // [B, L, W, H, M]
    Tensor targets;  // [B, W, H]
    std::vector<int64_t> timestamps;  // target time per sample
    double demand_scale = 1.0;        // divisor applied to E and targets

    int64_t size() const { return static_cast<int64_t>(timestamps.size()); }
    SampleSet subset(int64_t b0, int64_t b1) const;
    /// Rows by index, in the given order (for shuffled mini-batches).
    SampleSet gather(std::span<const int64_t> idx) const;
};

struct RasterizeResult {
    DemandSeries series;
    int64_t dropped = 0;  // outside the box or the time range
};

RasterizeResult rasterize_trips(std::span<const TripRecord> trips, const GridSpec& spec,
                                int64_t start, int64_t T);

struct EncodeFactorsResult {
    FactorSeries series;
    int64_t out_of_bounds_pois = 0;
};

EncodeFactorsResult encode_external_factors(std::span<const PoiRecord> pois, const GridSpec& spec,
                                            int64_t start, int64_t T, int64_t M);

SampleSet build_samples(const DemandSeries& demand, const FactorSeries& factors, int64_t L,
                        double demand_scale = 1.0);

struct SplitRatios {
    double train = 0.65, validation = 0.15, test = 0.20;
};

struct DatasetSplit {
    SampleSet train, validation, test;
    /// Length of the rolling block at the tail of the test split
    /// (min(168, test size)).
    int64_t rolling_window = 0;
};

/// Contiguous chronological split; floor rounding for train and
/// validation, remainder to test.
DatasetSplit split_dataset(const SampleSet& samples, SplitRatios ratios);

}  // namespace stef
