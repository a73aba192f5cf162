#include "stef/grid.hpp"

#include <cmath>
#include <cstring>

namespace stef {

void GridSpec::validate() const {
    if (!(max_lat > min_lat) || !std::isfinite(min_lat) || !std::isfinite(max_lat))
        throw std::invalid_argument("GridSpec: max_lat must exceed min_lat");
    if (!(max_lon > min_lon) || !std::isfinite(min_lon) || !std::isfinite(max_lon))
        throw std::invalid_argument("GridSpec: max_lon must exceed min_lon");
    if (width < 1 || height < 1)
        throw std::invalid_argument("GridSpec: width and height must be at least 1");
    if (resolution_minutes < 1)
        throw std::invalid_argument("GridSpec: resolution_minutes must be positive");
}

bool GridSpec::locate(double lat, double lon, int64_t* w, int64_t* h) const {
    if (!(lat >= min_lat && lat <= max_lat && lon >= min_lon && lon <= max_lon)) return false;
    int64_t wi = static_cast<int64_t>((lon - min_lon) / (max_lon - min_lon) * static_cast<double>(width));
    int64_t hi = static_cast<int64_t>((lat - min_lat) / (max_lat - min_lat) * static_cast<double>(height));
    // the global max edge belongs to the last cell
    if (wi >= width) wi = width - 1;
    if (hi >= height) hi = height - 1;
    *w = wi;
    *h = hi;
    return true;
}

DemandSeries DemandSeries::slice_time(int64_t t0, int64_t t1) const {
    if (t0 < 0 || t1 > T || t0 >= t1)
        throw std::invalid_argument("DemandSeries::slice_time: range [" + std::to_string(t0) +
                                    ", " + std::to_string(t1) + ") out of T=" + std::to_string(T));
    DemandSeries out;
    out.grid = grid;
    out.start_time = time_at(t0);
    out.T = t1 - t0;
    const size_t cells = static_cast<size_t>(grid.cell_count());
    out.counts.assign(counts.begin() + static_cast<int64_t>(cells) * t0,
                      counts.begin() + static_cast<int64_t>(cells) * t1);
    return out;
}

SampleSet SampleSet::subset(int64_t b0, int64_t b1) const {
    if (b0 < 0 || b1 > size() || b0 > b1)
        throw std::invalid_argument("SampleSet::subset: bad range");
    std::vector<int64_t> idx;
    idx.reserve(static_cast<size_t>(b1 - b0));
    for (int64_t b = b0; b < b1; ++b) idx.push_back(b);
    return gather(idx);
}

SampleSet SampleSet::gather(std::span<const int64_t> idx) const {
    SampleSet out;
    out.L = L;
    out.W = W;
    out.H = H;
    out.M = M;
    out.demand_scale = demand_scale;
    const int64_t B = static_cast<int64_t>(idx.size());
    const int64_t e_row = L * W * H;
    const int64_t f_row = L * W * H * M;
    const int64_t t_row = W * H;
    out.E = Tensor::zeros({B, L, W, H});
    out.F = Tensor::zeros({B, L, W, H, M});
    out.targets = Tensor::zeros({B, W, H});
    out.timestamps.reserve(static_cast<size_t>(B));
    for (int64_t r = 0; r < B; ++r) {
        const int64_t b = idx[static_cast<size_t>(r)];
        if (b < 0 || b >= size())
            throw std::invalid_argument("SampleSet::gather: index " + std::to_string(b) +
                                        " out of range");
        std::memcpy(out.E.data() + r * e_row, E.data() + b * e_row,
                    sizeof(double) * static_cast<size_t>(e_row));
        std::memcpy(out.F.data() + r * f_row, F.data() + b * f_row,
                    sizeof(double) * static_cast<size_t>(f_row));
        std::memcpy(out.targets.data() + r * t_row, targets.data() + b * t_row,
                    sizeof(double) * static_cast<size_t>(t_row));
        out.timestamps.push_back(timestamps[static_cast<size_t>(b)]);
    }
    return out;
}

RasterizeResult rasterize_trips(std::span<const TripRecord> trips, const GridSpec& spec,
                                int64_t start, int64_t T) {
    spec.validate();
    if (T <= 0) throw std::invalid_argument("rasterize_trips: T must be positive");
    if (start % spec.slot_seconds() != 0)
        throw std::invalid_argument("rasterize_trips: start " + format_iso8601(start) +
                                    " is not aligned to the " +
                                    std::to_string(spec.resolution_minutes) +
                                    "-minute resolution");
    RasterizeResult res;
    res.series.grid = spec;
    res.series.start_time = start;
    res.series.T = T;
    res.series.counts.assign(static_cast<size_t>(T * spec.cell_count()), 0);

    const int64_t slot = spec.slot_seconds();
    for (const TripRecord& trip : trips) {
        const int64_t offset = trip.pickup_time - start;
        int64_t w, h;
        if (offset < 0 || offset >= T * slot ||
            !spec.locate(trip.pickup_lat, trip.pickup_lon, &w, &h)) {
            res.dropped++;
            continue;
        }
        res.series.at(offset / slot, w, h)++;
    }
    return res;
}

EncodeFactorsResult encode_external_factors(std::span<const PoiRecord> pois, const GridSpec& spec,
                                            int64_t start, int64_t T, int64_t M) {
    spec.validate();
    if (T <= 0) throw std::invalid_argument("encode_external_factors: T must be positive");
    if (M <= 0) throw std::invalid_argument("encode_external_factors: M must be positive");
    for (const PoiRecord& poi : pois) {
        if (poi.factor_index < 0 || poi.factor_index >= M)
            throw std::invalid_argument("encode_external_factors: POI '" + poi.name +
                                        "' has factor_index " + std::to_string(poi.factor_index) +
                                        " outside [0, " + std::to_string(M) + ")");
        if (poi.schedule.active_hours.empty())
            throw std::invalid_argument("encode_external_factors: POI '" + poi.name +
                                        "' has an empty active_hours set");
    }

    EncodeFactorsResult res;
    res.series.grid = spec;
    res.series.start_time = start;
    res.series.T = T;
    res.series.M = M;
    res.series.factors.assign(static_cast<size_t>(T * spec.cell_count() * M), 0);

    const int64_t slot = spec.slot_seconds();
    for (const PoiRecord& poi : pois) {
        int64_t w, h;
        if (!spec.locate(poi.lat, poi.lon, &w, &h)) {
            res.out_of_bounds_pois++;
            continue;
        }
        for (int64_t t = 0; t < T; ++t) {
            if (poi.schedule.active_at(start + t * slot))
                res.series.at(t, w, h, poi.factor_index) = 1;  // OR across POIs
        }
    }
    return res;
}

SampleSet build_samples(const DemandSeries& demand, const FactorSeries& factors, int64_t L,
                        double demand_scale) {
    if (L < 1) throw std::invalid_argument("build_samples: L must be at least 1");
    if (!(demand.grid == factors.grid))
        throw std::invalid_argument("build_samples: demand and factor grids differ");
    if (demand.start_time != factors.start_time || demand.T != factors.T)
        throw std::invalid_argument("build_samples: demand and factor time axes differ");
    if (demand.T <= L)
        throw std::invalid_argument("build_samples: need T > L, got T=" + std::to_string(demand.T) +
                                    ", L=" + std::to_string(L));
    if (!(demand_scale > 0)) throw std::invalid_argument("build_samples: demand_scale must be positive");

    const int64_t W = demand.grid.width;
    const int64_t H = demand.grid.height;
    const int64_t M = factors.M;
    const int64_t B = demand.T - L;

    SampleSet s;
    s.L = L;
    s.W = W;
    s.H = H;
    s.M = M;
    s.demand_scale = demand_scale;
    s.E = Tensor::zeros({B, L, W, H});
    s.F = Tensor::zeros({B, L, W, H, M});
    s.targets = Tensor::zeros({B, W, H});
    s.timestamps.reserve(static_cast<size_t>(B));

    const double inv_scale = 1.0 / demand_scale;
    double* e = s.E.data();
    double* f = s.F.data();
    double* tg = s.targets.data();
    const int64_t cells = W * H;
    for (int64_t b = 0; b < B; ++b) {
        const int64_t t = b + L;  // target timestep
        s.timestamps.push_back(demand.time_at(t));
        for (int64_t l = 0; l < L; ++l) {
            const int64_t src = t - 1 - l;  // lag 0 is the most recent hour
            for (int64_t c = 0; c < cells; ++c)
                e[(b * L + l) * cells + c] =
                    static_cast<double>(demand.counts[static_cast<size_t>(src * cells + c)]) * inv_scale;
            for (int64_t c = 0; c < cells; ++c)
                for (int64_t m = 0; m < M; ++m)
                    f[((b * L + l) * cells + c) * M + m] =
                        static_cast<double>(factors.factors[static_cast<size_t>((src * cells + c) * M + m)]);
        }
        for (int64_t c = 0; c < cells; ++c)
            tg[b * cells + c] =
                static_cast<double>(demand.counts[static_cast<size_t>(t * cells + c)]) * inv_scale;
    }
    return s;
}

DatasetSplit split_dataset(const SampleSet& samples, SplitRatios ratios) {
    if (!(ratios.train > 0) || !(ratios.validation > 0) || !(ratios.test > 0))
        throw std::invalid_argument("split_dataset: all three ratios must be positive");
    const double sum = ratios.train + ratios.validation + ratios.test;
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split_dataset: ratios sum to " + std::to_string(sum) +
                                    ", expected 1");
    const int64_t B = samples.size();
    const int64_t n_train = static_cast<int64_t>(std::floor(ratios.train * static_cast<double>(B)));
    const int64_t n_val = static_cast<int64_t>(std::floor(ratios.validation * static_cast<double>(B)));
    const int64_t n_test = B - n_train - n_val;
    if (n_train < 1) throw std::invalid_argument("split_dataset: train split is empty");
    if (n_val < 1) throw std::invalid_argument("split_dataset: validation split is empty");
    if (n_test < 1) throw std::invalid_argument("split_dataset: test split is empty");

    DatasetSplit out;
    out.train = samples.subset(0, n_train);
    out.validation = samples.subset(n_train, n_train + n_val);
    out.test = samples.subset(n_train + n_val, B);
    out.rolling_window = std::min<int64_t>(168, n_test);
    return out;
}

}  // namespace stef
