#include "stef/io.hpp"

#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

namespace stef {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'T', 'E', 'F', 'B', 'I', 'N', '1'};

int64_t dtype_size(const std::string& dtype) {
    if (dtype == "f64" || dtype == "i64") return 8;
    if (dtype == "u8") return 1;
    throw std::runtime_error("container: unknown dtype '" + dtype + "'");
}

void put_u64le(std::ofstream& out, uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

uint64_t get_u64le(std::ifstream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw std::runtime_error("container: truncated header length");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

const ContainerArray& Container::get(const std::string& name) const {
    for (const ContainerArray& a : arrays)
        if (a.name == name) return a;
    throw std::runtime_error("container: missing array '" + name + "'");
}

void write_container(const std::string& path, const json& meta,
                     const std::vector<ContainerArray>& arrays) {
    json header = meta;
    header["format_version"] = kContainerFormatVersion;
    json idx = json::array();
    for (const ContainerArray& a : arrays) {
        if (static_cast<int64_t>(a.bytes.size()) != a.element_count() * dtype_size(a.dtype))
            throw std::runtime_error("container: array '" + a.name + "' byte size disagrees with " +
                                     shape_str(a.shape));
        idx.push_back({{"name", a.name}, {"dtype", a.dtype}, {"shape", a.shape}});
    }
    header["arrays"] = idx;
    const std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(kMagic, sizeof(kMagic));
    put_u64le(out, hs.size());
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const ContainerArray& a : arrays)
        out.write(reinterpret_cast<const char*>(a.bytes.data()),
                  static_cast<std::streamsize>(a.bytes.size()));
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Container read_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("'" + path + "' is not a STEFBIN1 container");
    const uint64_t hlen = get_u64le(in);
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw std::runtime_error("'" + path + "': truncated header");

    Container c;
    try {
        c.header = json::parse(hs);
    } catch (const json::exception& e) {
        throw std::runtime_error("'" + path + "': bad container header: " + e.what());
    }
    const int version = c.header.value("format_version", -1);
    if (version != kContainerFormatVersion)
        throw std::runtime_error("'" + path + "': container format_version " +
                                 std::to_string(version) + " is not supported (expected " +
                                 std::to_string(kContainerFormatVersion) + ")");
    for (const json& e : c.header.at("arrays")) {
        ContainerArray a;
        a.name = e.at("name").get<std::string>();
        a.dtype = e.at("dtype").get<std::string>();
        a.shape = e.at("shape").get<Shape>();
        a.bytes.resize(static_cast<size_t>(a.element_count() * dtype_size(a.dtype)));
        in.read(reinterpret_cast<char*>(a.bytes.data()),
                static_cast<std::streamsize>(a.bytes.size()));
        if (!in)
            throw std::runtime_error("'" + path + "': truncated payload for array '" + a.name + "'");
        c.arrays.push_back(std::move(a));
    }
    return c;
}

namespace {

template <class T>
ContainerArray make_array(std::string name, std::string dtype, Shape shape, std::span<const T> data) {
    if (shape_size(shape) != static_cast<int64_t>(data.size()))
        throw std::invalid_argument("container array '" + name + "': shape " + shape_str(shape) +
                                    " needs " + std::to_string(shape_size(shape)) +
                                    " elements, got " + std::to_string(data.size()));
    ContainerArray a;
    a.name = std::move(name);
    a.dtype = std::move(dtype);
    a.shape = std::move(shape);
    a.bytes.resize(data.size_bytes());
    std::memcpy(a.bytes.data(), data.data(), data.size_bytes());
    return a;
}

template <class T>
std::vector<T> array_values(const ContainerArray& a) {
    std::vector<T> v(static_cast<size_t>(a.element_count()));
    std::memcpy(v.data(), a.bytes.data(), a.bytes.size());
    return v;
}

}  // namespace

ContainerArray make_f64_array(std::string name, Shape shape, std::span<const double> data) {
    return make_array(std::move(name), "f64", std::move(shape), data);
}
ContainerArray make_i64_array(std::string name, Shape shape, std::span<const int64_t> data) {
    return make_array(std::move(name), "i64", std::move(shape), data);
}
ContainerArray make_u8_array(std::string name, Shape shape, std::span<const uint8_t> data) {
    return make_array(std::move(name), "u8", std::move(shape), data);
}

void save_demand(const std::string& path, const DemandSeries& series) {
    json meta = {{"kind", "demand"},
                 {"grid", gridspec_to_json(series.grid)},
                 {"start_time", format_iso8601(series.start_time)},
                 {"T", series.T}};
    write_container(path, meta,
                    {make_i64_array("counts", {series.T, series.grid.width, series.grid.height},
                                    series.counts)});
}

DemandSeries load_demand(const std::string& path) {
    const Container c = read_container(path);
    if (c.header.value("kind", "") != "demand")
        throw std::runtime_error("'" + path + "' is not a demand container (kind='" +
                                 c.header.value("kind", "") + "')");
    DemandSeries s;
    s.grid = gridspec_from_json(c.header.at("grid"));
    s.start_time = parse_iso8601(c.header.at("start_time").get<std::string>());
    s.T = c.header.at("T").get<int64_t>();
    const ContainerArray& a = c.get("counts");
    if (a.shape != Shape{s.T, s.grid.width, s.grid.height})
        throw std::runtime_error("'" + path + "': counts shape " + shape_str(a.shape) +
                                 " disagrees with header");
    s.counts = array_values<int64_t>(a);
    return s;
}

void save_factors(const std::string& path, const FactorSeries& series) {
    json meta = {{"kind", "factors"},
                 {"grid", gridspec_to_json(series.grid)},
                 {"start_time", format_iso8601(series.start_time)},
                 {"T", series.T},
                 {"M", series.M}};
    write_container(
        path, meta,
        {make_u8_array("factors", {series.T, series.grid.width, series.grid.height, series.M},
                       series.factors)});
}

FactorSeries load_factors(const std::string& path) {
    const Container c = read_container(path);
    if (c.header.value("kind", "") != "factors")
        throw std::runtime_error("'" + path + "' is not a factors container (kind='" +
                                 c.header.value("kind", "") + "')");
    FactorSeries s;
    s.grid = gridspec_from_json(c.header.at("grid"));
    s.start_time = parse_iso8601(c.header.at("start_time").get<std::string>());
    s.T = c.header.at("T").get<int64_t>();
    s.M = c.header.at("M").get<int64_t>();
    const ContainerArray& a = c.get("factors");
    if (a.shape != Shape{s.T, s.grid.width, s.grid.height, s.M})
        throw std::runtime_error("'" + path + "': factors shape " + shape_str(a.shape) +
                                 " disagrees with header");
    s.factors = array_values<uint8_t>(a);
    for (uint8_t v : s.factors)
        if (v > 1) throw std::runtime_error("'" + path + "': factor values must be 0 or 1");
    return s;
}

json gridspec_to_json(const GridSpec& spec) {
    return {{"min_lat", spec.min_lat},     {"max_lat", spec.max_lat},
            {"min_lon", spec.min_lon},     {"max_lon", spec.max_lon},
            {"width", spec.width},         {"height", spec.height},
            {"resolution_minutes", spec.resolution_minutes}};
}

GridSpec gridspec_from_json(const json& j) {
    GridSpec s;
    s.min_lat = j.at("min_lat").get<double>();
    s.max_lat = j.at("max_lat").get<double>();
    s.min_lon = j.at("min_lon").get<double>();
    s.max_lon = j.at("max_lon").get<double>();
    s.width = j.at("width").get<int64_t>();
    s.height = j.at("height").get<int64_t>();
    s.resolution_minutes = j.value("resolution_minutes", static_cast<int64_t>(60));
    s.validate();
    return s;
}

GridSpec load_gridspec(const std::string& path) { return gridspec_from_json(read_json_file(path)); }

void save_gridspec(const std::string& path, const GridSpec& spec) {
    write_json_file(path, gridspec_to_json(spec));
}

json pois_to_json(const std::vector<PoiRecord>& pois) {
    json arr = json::array();
    for (const PoiRecord& p : pois) {
        json e = {{"name", p.name},
                  {"lat", p.lat},
                  {"lon", p.lon},
                  {"factor_index", p.factor_index},
                  {"active_hours", p.schedule.active_hours}};
        if (!p.schedule.active_days.empty()) e["active_days"] = p.schedule.active_days;
        arr.push_back(std::move(e));
    }
    return arr;
}

std::vector<PoiRecord> pois_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("POI file must hold a JSON array");
    std::vector<PoiRecord> pois;
    for (const json& e : j) {
        PoiRecord p;
        p.name = e.at("name").get<std::string>();
        p.lat = e.at("lat").get<double>();
        p.lon = e.at("lon").get<double>();
        p.factor_index = e.at("factor_index").get<int64_t>();
        for (int h : e.at("active_hours").get<std::vector<int>>()) {
            if (h < 0 || h > 23)
                throw std::invalid_argument("POI '" + p.name + "': active hour " +
                                            std::to_string(h) + " outside [0, 24)");
            p.schedule.active_hours.insert(h);
        }
        if (p.schedule.active_hours.empty())
            throw std::invalid_argument("POI '" + p.name + "': active_hours must be non-empty");
        if (e.contains("active_days"))
            for (int d : e.at("active_days").get<std::vector<int>>()) {
                if (d < 0 || d > 6)
                    throw std::invalid_argument("POI '" + p.name + "': active day " +
                                                std::to_string(d) + " outside [0, 7)");
                p.schedule.active_days.insert(d);
            }
        pois.push_back(std::move(p));
    }
    return pois;
}

std::vector<PoiRecord> load_pois(const std::string& path) {
    return pois_from_json(read_json_file(path));
}

void save_pois(const std::string& path, const std::vector<PoiRecord>& pois) {
    write_json_file(path, pois_to_json(pois));
}

namespace {

// Splits one CSV line; handles double-quoted fields (extra columns in trip
// exports sometimes carry commas).
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

std::vector<TripRecord> load_trips_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("'" + path + "': empty file, expected a CSV header row");

    const std::vector<std::string> header = split_csv_line(line);
    int64_t col_time = -1, col_lat = -1, col_lon = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "pickup_datetime") col_time = static_cast<int64_t>(i);
        if (header[i] == "pickup_latitude") col_lat = static_cast<int64_t>(i);
        if (header[i] == "pickup_longitude") col_lon = static_cast<int64_t>(i);
    }
    for (const auto& [col, name] :
         {std::pair{col_time, "pickup_datetime"}, {col_lat, "pickup_latitude"},
          {col_lon, "pickup_longitude"}}) {
        if (col < 0)
            throw std::invalid_argument("'" + path + "': missing required CSV column '" +
                                        std::string(name) + "'");
    }

    std::vector<TripRecord> trips;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv_line(line);
        const size_t need = static_cast<size_t>(std::max({col_time, col_lat, col_lon})) + 1;
        if (fields.size() < need)
            throw std::invalid_argument("'" + path + "' line " + std::to_string(line_no) +
                                        ": expected at least " + std::to_string(need) +
                                        " columns, got " + std::to_string(fields.size()));
        TripRecord t;
        try {
            t.pickup_time = parse_iso8601(fields[static_cast<size_t>(col_time)]);
            t.pickup_lat = std::stod(fields[static_cast<size_t>(col_lat)]);
            t.pickup_lon = std::stod(fields[static_cast<size_t>(col_lon)]);
        } catch (const std::exception& e) {
            throw std::invalid_argument("'" + path + "' line " + std::to_string(line_no) + ": " +
                                        e.what());
        }
        trips.push_back(t);
    }
    return trips;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("'" + path + "': invalid JSON: " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    uint64_t hash = 0xcbf29ce484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
    return out;
}

}  // namespace stef
