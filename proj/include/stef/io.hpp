#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "stef/grid.hpp"

// On-disk container: 8-byte magic "STEFBIN1", a u64 little-endian header
// length, a JSON header, then the raw little-endian array payloads in
// header order. Layout details in docs/FORMATS.md.

namespace stef {

inline constexpr int kContainerFormatVersion = 1;

struct ContainerArray {
    std::string name;
    std::string dtype;  // "f64" | "i64" | "u8"
    Shape shape;
    std::vector<std::byte> bytes;

    int64_t element_count() const { return shape_size(shape); }
};

struct Container {
    nlohmann::json header;  // includes the "arrays" index
    std::vector<ContainerArray> arrays;

    const ContainerArray& get(const std::string& name) const;
};

void write_container(const std::string& path, const nlohmann::json& meta,
                     const std::vector<ContainerArray>& arrays);
Container read_container(const std::string& path);

ContainerArray make_f64_array(std::string name, Shape shape, std::span<const double> data);
ContainerArray make_i64_array(std::string name, Shape shape, std::span<const int64_t> data);
ContainerArray make_u8_array(std::string name, Shape shape, std::span<const uint8_t> data);

// Dataset containers.
void save_demand(const std::string& path, const DemandSeries& series);
DemandSeries load_demand(const std::string& path);
void save_factors(const std::string& path, const FactorSeries& series);
FactorSeries load_factors(const std::string& path);

// GridSpec JSON file.
nlohmann::json gridspec_to_json(const GridSpec& spec);
GridSpec gridspec_from_json(const nlohmann::json& j);
GridSpec load_gridspec(const std::string& path);
void save_gridspec(const std::string& path, const GridSpec& spec);

// POI JSON file: array of {name, lat, lon, factor_index, active_hours,
// active_days?}.
nlohmann::json pois_to_json(const std::vector<PoiRecord>& pois);
std::vector<PoiRecord> pois_from_json(const nlohmann::json& j);
std::vector<PoiRecord> load_pois(const std::string& path);
void save_pois(const std::string& path, const std::vector<PoiRecord>& pois);

/// Trips CSV: header row with pickup_datetime, pickup_latitude,
/// pickup_longitude (extra columns ignored), ISO-8601 timestamps.
std::vector<TripRecord> load_trips_csv(const std::string& path);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

/// FNV-1a 64-bit digest of a file's bytes, hex-encoded (manifest inputs).
std::string fnv1a64_file(const std::string& path);

}  // namespace stef
