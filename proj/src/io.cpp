#include "floodcare/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "floodcare/csv.hpp"
#include "floodcare/scenario.hpp"

namespace floodcare {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
    std::string out = fmt::format("{} load error(s)", issues.size());
    for (const auto& i : issues) out += "\n  " + i;
    return out;
}

bool parse_int64(std::string_view s, std::int64_t& out) {
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size() && !s.empty();
}

bool parse_int(std::string_view s, int& out) {
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size() && !s.empty();
}

bool parse_double(std::string_view s, double& out) {
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size() && !s.empty();
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Column access with itemized errors for one CSV file.
class TableReader {
public:
    TableReader(CsvTable table, std::string file, std::vector<std::string>& issues)
        : table_(std::move(table)), file_(std::move(file)), issues_(issues) {}

    bool require(std::initializer_list<std::string_view> names) {
        bool ok = true;
        for (auto name : names) {
            if (table_.column(name) < 0) {
                issues_.push_back(fmt::format("{}: missing column '{}'", file_, name));
                ok = false;
            }
        }
        return ok;
    }

    std::size_t size() const { return table_.rows.size(); }
    int line(std::size_t r) const { return table_.lines[r]; }

    std::string text(std::size_t r, std::string_view name) const {
        const int c = table_.column(name);
        if (c < 0 || static_cast<std::size_t>(c) >= table_.rows[r].size()) return {};
        return trim(table_.rows[r][c]);
    }

    bool has_column(std::string_view name) const { return table_.column(name) >= 0; }

    bool width_ok(std::size_t r) {
        if (table_.rows[r].size() == table_.header.size()) return true;
        fail(r, fmt::format("expected {} fields, found {}", table_.header.size(), table_.rows[r].size()));
        return false;
    }

    void fail(std::size_t r, const std::string& message) {
        issues_.push_back(fmt::format("{}:{}: {}", file_, line(r), message));
    }

    template <typename T, typename Parser>
    std::optional<T> number(std::size_t r, std::string_view name, Parser parse, bool optional = false) {
        const auto s = text(r, name);
        if (s.empty() && optional) return std::nullopt;
        T v{};
        if (!parse(s, v)) {
            fail(r, fmt::format("bad {} '{}'", name, s));
            return std::nullopt;
        }
        return v;
    }

    std::optional<FloodClass> flood(std::size_t r, std::string_view name) {
        try {
            return parse_flood_class(text(r, name));
        } catch (const ConfigError& e) {
            fail(r, e.what());
            return std::nullopt;
        }
    }

private:
    CsvTable table_;
    std::string file_;
    std::vector<std::string>& issues_;
};

std::optional<TableReader> open_table(const fs::path& dir, const std::string& file, std::vector<std::string>& issues) {
    const auto path = dir / file;
    if (!fs::exists(path)) {
        issues.push_back(fmt::format("{}: file not found", path.string()));
        return std::nullopt;
    }
    try {
        return TableReader(read_csv(path), file, issues);
    } catch (const ConfigError& e) {
        issues.push_back(e.what());
        return std::nullopt;
    }
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace

LoadError::LoadError(std::vector<std::string> issues) : Error(join_issues(issues)), issues_(std::move(issues)) {}

std::string format_double(double value) { return fmt::format("{}", value); }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot write {}", tmp.string()));
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError(fmt::format("write failed for {}", tmp.string()));
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError(fmt::format("cannot rename {} to {}: {}", tmp.string(), path.string(), ec.message()));
}

InstanceBundle read_bundle(const fs::path& dir) {
    const auto manifest_path = dir / "bundle.json";
    json manifest = json::object();
    if (fs::exists(manifest_path)) manifest = read_json(manifest_path);

    InstanceBundle b;
    b.schema_version = manifest.value("schema_version", kSchemaVersion);
    if (b.schema_version != kSchemaVersion)
        throw LoadError({fmt::format("{}: unsupported schema_version {}", manifest_path.string(), b.schema_version)});
    b.name = manifest.value("name", dir.filename().string());
    const auto file = [&](const char* key, const char* fallback) { return manifest.value(key, std::string(fallback)); };

    std::vector<std::string> issues;

    if (auto t = open_table(dir, file("nodes", "nodes.csv"), issues); t && t->require({"id", "lon", "lat"})) {
        for (std::size_t r = 0; r < t->size(); ++r) {
            if (!t->width_ok(r)) continue;
            auto id = t->number<std::int64_t>(r, "id", parse_int64);
            auto lon = t->number<double>(r, "lon", parse_double);
            auto lat = t->number<double>(r, "lat", parse_double);
            if (id && lon && lat) b.nodes.push_back({*id, *lon, *lat});
        }
    }

    if (auto t = open_table(dir, file("edges", "edges.csv"), issues);
        t && t->require({"id", "node_a", "node_b", "length_m", "flood_class"})) {
        for (std::size_t r = 0; r < t->size(); ++r) {
            if (!t->width_ok(r)) continue;
            auto id = t->number<std::int64_t>(r, "id", parse_int64);
            auto a = t->number<std::int64_t>(r, "node_a", parse_int64);
            auto nb = t->number<std::int64_t>(r, "node_b", parse_int64);
            auto len = t->number<double>(r, "length_m", parse_double);
            auto fc = t->flood(r, "flood_class");
            if (len && !(*len > 0.0)) {
                t->fail(r, fmt::format("edge length must be positive, got {}", *len));
                continue;
            }
            if (id && a && nb && len && fc) b.edges.push_back({*id, *a, *nb, *len, *fc});
        }
    }

    if (auto t = open_table(dir, file("facilities", "facilities.csv"), issues);
        t && t->require({"id", "lon", "lat", "flood_class"})) {
        for (std::size_t r = 0; r < t->size(); ++r) {
            if (!t->width_ok(r)) continue;
            FacilityRecord f;
            f.id = t->text(r, "id");
            f.line = t->line(r);
            if (f.id.empty()) {
                t->fail(r, "empty facility id");
                continue;
            }
            auto lon = t->number<double>(r, "lon", parse_double);
            auto lat = t->number<double>(r, "lat", parse_double);
            auto fc = t->flood(r, "flood_class");
            const bool node_ok = !t->has_column("node_id") || t->text(r, "node_id").empty() ||
                                 t->number<std::int64_t>(r, "node_id", parse_int64).has_value();
            if (t->has_column("node_id")) f.node_id = t->number<std::int64_t>(r, "node_id", parse_int64, true);
            const auto visits_text = t->has_column("weekly_visits") ? t->text(r, "weekly_visits") : std::string();
            if (!visits_text.empty()) {
                int v = 0;
                if (!parse_int(visits_text, v) || v < 0) {
                    t->fail(r, fmt::format("bad weekly_visits '{}'", visits_text));
                    continue;
                }
                f.weekly_visits = v;
            }
            if (!lon || !lat || !fc || !node_ok) continue;
            f.lon = *lon;
            f.lat = *lat;
            f.flood_class = *fc;
            b.facilities.push_back(std::move(f));
        }
    }

    if (auto t = open_table(dir, file("tazs", "tazs.csv"), issues); t && t->require({"id", "lon", "lat"})) {
        for (std::size_t r = 0; r < t->size(); ++r) {
            if (!t->width_ok(r)) continue;
            TazRecord z;
            z.id = t->text(r, "id");
            z.line = t->line(r);
            if (z.id.empty()) {
                t->fail(r, "empty TAZ id");
                continue;
            }
            auto lon = t->number<double>(r, "lon", parse_double);
            auto lat = t->number<double>(r, "lat", parse_double);
            const bool node_ok = !t->has_column("node_id") || t->text(r, "node_id").empty() ||
                                 t->number<std::int64_t>(r, "node_id", parse_int64).has_value();
            if (t->has_column("node_id")) z.node_id = t->number<std::int64_t>(r, "node_id", parse_int64, true);
            if (!lon || !lat || !node_ok) continue;
            z.lon = *lon;
            z.lat = *lat;
            b.tazs.push_back(std::move(z));
        }
    }

    if (manifest.contains("visits")) {
        // Aggregated (taz, facility, count) rows expand into patients with
        // ids "<taz>|<facility>|<n>", in file order.
        const auto name = manifest["visits"].get<std::string>();
        if (auto t = open_table(dir, name, issues); t && t->require({"taz_id", "facility_id", "weekly_count"})) {
            for (std::size_t r = 0; r < t->size(); ++r) {
                if (!t->width_ok(r)) continue;
                auto count = t->number<int>(r, "weekly_count", parse_int);
                if (!count) continue;
                if (*count < 0) {
                    t->fail(r, "negative weekly_count");
                    continue;
                }
                const auto taz = t->text(r, "taz_id");
                const auto fac = t->text(r, "facility_id");
                for (int n = 0; n < *count; ++n)
                    b.patients.push_back({fmt::format("{}|{}|{:06d}", taz, fac, n), taz, fac, t->line(r)});
            }
        }
    } else if (auto t = open_table(dir, file("patients", "patients.csv"), issues);
               t && t->require({"id", "taz_id", "preferred_facility_id"})) {
        for (std::size_t r = 0; r < t->size(); ++r) {
            if (!t->width_ok(r)) continue;
            PatientRecord p{t->text(r, "id"), t->text(r, "taz_id"), t->text(r, "preferred_facility_id"), t->line(r)};
            if (p.id.empty()) {
                t->fail(r, "empty patient id");
                continue;
            }
            b.patients.push_back(std::move(p));
        }
    }

    if (!issues.empty()) throw LoadError(std::move(issues));
    return b;
}

void write_bundle(const InstanceBundle& bundle, const fs::path& dir) {
    fs::create_directories(dir);
    json manifest = {{"schema_version", bundle.schema_version},
                     {"name", bundle.name},
                     {"nodes", "nodes.csv"},
                     {"edges", "edges.csv"},
                     {"facilities", "facilities.csv"},
                     {"tazs", "tazs.csv"},
                     {"patients", "patients.csv"}};
    write_file_atomic(dir / "bundle.json", manifest.dump(2) + "\n");

    CsvWriter nodes({"id", "lon", "lat"});
    for (const auto& n : bundle.nodes) nodes.add_row({std::to_string(n.id), format_double(n.lon), format_double(n.lat)});
    write_file_atomic(dir / "nodes.csv", nodes.str());

    CsvWriter edges({"id", "node_a", "node_b", "length_m", "flood_class"});
    for (const auto& e : bundle.edges)
        edges.add_row({std::to_string(e.id), std::to_string(e.node_a), std::to_string(e.node_b), format_double(e.length),
                       to_string(e.flood_class)});
    write_file_atomic(dir / "edges.csv", edges.str());

    CsvWriter facilities({"id", "lon", "lat", "node_id", "weekly_visits", "flood_class"});
    for (const auto& f : bundle.facilities)
        facilities.add_row({f.id, format_double(f.lon), format_double(f.lat),
                            f.node_id ? std::to_string(*f.node_id) : std::string(),
                            f.weekly_visits ? std::to_string(*f.weekly_visits) : std::string(),
                            to_string(f.flood_class)});
    write_file_atomic(dir / "facilities.csv", facilities.str());

    CsvWriter tazs({"id", "lon", "lat", "node_id"});
    for (const auto& z : bundle.tazs)
        tazs.add_row({z.id, format_double(z.lon), format_double(z.lat), z.node_id ? std::to_string(*z.node_id) : std::string()});
    write_file_atomic(dir / "tazs.csv", tazs.str());

    CsvWriter patients({"id", "taz_id", "preferred_facility_id"});
    for (const auto& p : bundle.patients) patients.add_row({p.id, p.taz_id, p.facility_id});
    write_file_atomic(dir / "patients.csv", patients.str());
}

LoadedInstance build_instance(const InstanceBundle& bundle) {
    LoadedInstance out;
    std::vector<std::string> issues;
    try {
        out.graph = RoadGraph(bundle.nodes, bundle.edges);
    } catch (const ConfigError& e) {
        throw LoadError({fmt::format("road graph: {}", e.what())});
    }
    if (out.graph.num_nodes() == 0) throw LoadError({"road graph has no nodes"});
    out.instance.graph_ref = bundle.name;

    std::unordered_map<std::string, std::size_t> facility_row, taz_row;
    for (std::size_t n = 0; n < bundle.facilities.size(); ++n)
        if (!facility_row.emplace(bundle.facilities[n].id, n).second)
            issues.push_back(fmt::format("facilities.csv:{}: duplicate facility id {}", bundle.facilities[n].line,
                                         bundle.facilities[n].id));
    for (std::size_t n = 0; n < bundle.tazs.size(); ++n)
        if (!taz_row.emplace(bundle.tazs[n].id, n).second)
            issues.push_back(fmt::format("tazs.csv:{}: duplicate TAZ id {}", bundle.tazs[n].line, bundle.tazs[n].id));

    std::vector<int> preferred(bundle.facilities.size(), 0);
    std::vector<int> residents(bundle.tazs.size(), 0);
    std::set<std::string> patient_ids;
    for (const auto& p : bundle.patients) {
        if (!patient_ids.insert(p.id).second)
            issues.push_back(fmt::format("patients:{}: duplicate patient id {}", p.line, p.id));
        const auto f = facility_row.find(p.facility_id);
        const auto z = taz_row.find(p.taz_id);
        if (f == facility_row.end())
            issues.push_back(fmt::format("patients:{}: patient {} references missing facility {}", p.line, p.id, p.facility_id));
        if (z == taz_row.end())
            issues.push_back(fmt::format("patients:{}: patient {} references missing TAZ {}", p.line, p.id, p.taz_id));
        if (f != facility_row.end() && z != taz_row.end()) {
            ++preferred[f->second];
            ++residents[z->second];
        }
    }

    // Facilities: node placement, visit consistency, zero-visit exclusion.
    std::vector<int> facility_index(bundle.facilities.size(), -1);
    std::vector<std::size_t> kept_facilities;
    for (std::size_t n = 0; n < bundle.facilities.size(); ++n) {
        const auto& f = bundle.facilities[n];
        const int visits = f.weekly_visits.value_or(preferred[n]);
        if (visits != preferred[n]) {
            issues.push_back(fmt::format("facilities.csv:{}: facility {} has weekly_visits {} but {} patients prefer it",
                                         f.line, f.id, visits, preferred[n]));
            continue;
        }
        if (visits == 0) {
            out.notices.push_back(fmt::format("facility {} has no weekly visits; excluded", f.id));
            continue;
        }
        if (f.node_id && out.graph.node_index(*f.node_id) < 0) {
            issues.push_back(fmt::format("facilities.csv:{}: facility {} references missing node {}", f.line, f.id, *f.node_id));
            continue;
        }
        kept_facilities.push_back(n);
    }
    std::vector<std::size_t> kept_tazs;
    for (std::size_t n = 0; n < bundle.tazs.size(); ++n) {
        const auto& z = bundle.tazs[n];
        if (residents[n] == 0) {
            out.notices.push_back(fmt::format("TAZ {} has no patients; excluded", z.id));
            continue;
        }
        if (z.node_id && out.graph.node_index(*z.node_id) < 0) {
            issues.push_back(fmt::format("tazs.csv:{}: TAZ {} references missing node {}", z.line, z.id, *z.node_id));
            continue;
        }
        kept_tazs.push_back(n);
    }
    if (!issues.empty()) throw LoadError(std::move(issues));

    auto by_id = [](const auto& records) {
        return [&records](std::size_t a, std::size_t b) { return records[a].id < records[b].id; };
    };
    std::sort(kept_facilities.begin(), kept_facilities.end(), by_id(bundle.facilities));
    std::sort(kept_tazs.begin(), kept_tazs.end(), by_id(bundle.tazs));

    auto& inst = out.instance;
    std::vector<int> used_nodes;
    for (std::size_t n : kept_facilities) {
        const auto& r = bundle.facilities[n];
        Facility f;
        f.id = r.id;
        f.lon = r.lon;
        f.lat = r.lat;
        f.node_id = r.node_id ? *r.node_id : out.graph.nodes()[out.graph.nearest_node(r.lon, r.lat)].id;
        f.weekly_visits = preferred[n];
        f.capacity = estimate_capacity(f.weekly_visits);
        f.flood_class = r.flood_class;
        facility_index[n] = static_cast<int>(inst.facilities.size());
        used_nodes.push_back(out.graph.node_index(f.node_id));
        inst.facilities.push_back(std::move(f));
    }
    std::vector<int> taz_index(bundle.tazs.size(), -1);
    for (std::size_t n : kept_tazs) {
        const auto& r = bundle.tazs[n];
        Taz z;
        z.id = r.id;
        z.lon = r.lon;
        z.lat = r.lat;
        z.node_id = r.node_id ? *r.node_id : out.graph.nodes()[out.graph.nearest_node(r.lon, r.lat)].id;
        z.patient_count = residents[n];
        taz_index[n] = static_cast<int>(inst.tazs.size());
        used_nodes.push_back(out.graph.node_index(z.node_id));
        inst.tazs.push_back(std::move(z));
    }

    std::vector<std::size_t> patient_order(bundle.patients.size());
    for (std::size_t n = 0; n < patient_order.size(); ++n) patient_order[n] = n;
    std::sort(patient_order.begin(), patient_order.end(), by_id(bundle.patients));
    inst.patients.reserve(bundle.patients.size());
    for (std::size_t n : patient_order) {
        const auto& r = bundle.patients[n];
        inst.patients.push_back({r.id, taz_index[taz_row.at(r.taz_id)], facility_index[facility_row.at(r.facility_id)]});
    }

    if (!out.graph.connected(used_nodes)) {
        std::vector<int> stranded;
        for (int node : used_nodes)
            if (!out.graph.connected(std::vector<int>{used_nodes.front(), node})) stranded.push_back(node);
        for (const auto& f : inst.facilities)
            if (std::count(stranded.begin(), stranded.end(), out.graph.node_index(f.node_id)))
                issues.push_back(fmt::format("facility {} at node {} is disconnected from the network", f.id, f.node_id));
        for (const auto& z : inst.tazs)
            if (std::count(stranded.begin(), stranded.end(), out.graph.node_index(z.node_id)))
                issues.push_back(fmt::format("TAZ {} at node {} is disconnected from the network", z.id, z.node_id));
        throw LoadError(std::move(issues));
    }

    try {
        inst.validate();
    } catch (const ConfigError& e) {
        throw LoadError({e.what()});
    }
    return out;
}

LoadedInstance load_instance(const fs::path& dir) { return build_instance(read_bundle(dir)); }

void write_matrix(const fs::path& path, const Matrix<double>& m) {
    static_assert(std::endian::native == std::endian::little, "matrix sidecar assumes a little-endian host");
    std::string buf = "FCDM";
    const auto rows = static_cast<std::uint32_t>(m.rows());
    const auto cols = static_cast<std::uint32_t>(m.cols());
    buf.append(reinterpret_cast<const char*>(&rows), 4);
    buf.append(reinterpret_cast<const char*>(&cols), 4);
    buf.append(reinterpret_cast<const char*>(m.data().data()), m.data().size() * sizeof(double));
    write_file_atomic(path, buf);
}

Matrix<double> read_matrix(const fs::path& path) {
    const auto buf = read_file(path);
    if (buf.size() < 12 || buf.compare(0, 4, "FCDM") != 0) throw IoError(fmt::format("{}: not a distance matrix file", path.string()));
    std::uint32_t rows = 0, cols = 0;
    std::memcpy(&rows, buf.data() + 4, 4);
    std::memcpy(&cols, buf.data() + 8, 4);
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    if (buf.size() != 12 + n * sizeof(double)) throw IoError(fmt::format("{}: truncated distance matrix", path.string()));
    Matrix<double> m(rows, cols);
    std::memcpy(m.data().data(), buf.data() + 12, n * sizeof(double));
    return m;
}

void write_scenario(const fs::path& json_path, const Scenario& s, const ProblemInstance& instance) {
    auto sidecar = json_path;
    sidecar.replace_extension(".dmat");
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["id"] = s.id;
    doc["rng_seed"] = s.rng_seed;
    json facility_ids = json::array(), taz_ids = json::array(), closed_ids = json::array();
    for (const auto& f : instance.facilities) facility_ids.push_back(f.id);
    for (const auto& z : instance.tazs) taz_ids.push_back(z.id);
    for (int i : s.closed_facilities) closed_ids.push_back(instance.facilities[i].id);
    doc["facility_ids"] = facility_ids;
    doc["taz_ids"] = taz_ids;
    doc["closed_facilities"] = s.closed_facilities;
    doc["closed_facility_ids"] = closed_ids;
    doc["flooded_edges"] = s.flooded_edges;
    doc["capacity"] = s.capacity;
    doc["demand"] = s.demand;
    doc["pre_assignment"] = s.pre_assignment;
    doc["displaced_patients"] = s.displaced_patients;
    doc["distance_matrix"] = {{"file", sidecar.filename().string()},
                              {"rows", s.distance.rows()},
                              {"cols", s.distance.cols()},
                              {"unit", "m"}};
    write_matrix(sidecar, s.distance);
    write_file_atomic(json_path, doc.dump(1) + "\n");
}

Scenario read_scenario(const fs::path& json_path, const ProblemInstance* instance) {
    const auto doc = read_json(json_path);
    try {
        if (doc.at("schema_version").get<int>() != kSchemaVersion)
            throw ConfigError(fmt::format("{}: unsupported schema_version", json_path.string()));
        Scenario s;
        s.id = doc.at("id").get<int>();
        s.rng_seed = doc.at("rng_seed").get<std::uint64_t>();
        s.closed_facilities = doc.at("closed_facilities").get<std::vector<int>>();
        s.flooded_edges = doc.at("flooded_edges").get<std::vector<int>>();
        s.capacity = doc.at("capacity").get<std::vector<int>>();
        s.demand = doc.at("demand").get<std::vector<int>>();
        s.pre_assignment = doc.at("pre_assignment").get<std::vector<int>>();
        s.displaced_patients = doc.at("displaced_patients").get<std::vector<int>>();
        s.distance = read_matrix(json_path.parent_path() / doc.at("distance_matrix").at("file").get<std::string>());
        if (instance) {
            const auto ids = doc.at("facility_ids").get<std::vector<std::string>>();
            const auto tz = doc.at("taz_ids").get<std::vector<std::string>>();
            bool match = ids.size() == instance->facilities.size() && tz.size() == instance->tazs.size();
            for (std::size_t i = 0; match && i < ids.size(); ++i) match = ids[i] == instance->facilities[i].id;
            for (std::size_t j = 0; match && j < tz.size(); ++j) match = tz[j] == instance->tazs[j].id;
            if (!match) throw ConfigError(fmt::format("{}: scenario was generated for a different instance", json_path.string()));
        }
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", json_path.string(), e.what()));
    }
}

json archive_to_json(const ParetoArchive& archive, const std::vector<RunInfo>& runs) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["scenario_id"] = archive.scenario_id();
    json run_list = json::array();
    for (const auto& r : runs)
        run_list.push_back({{"run", r.run}, {"gamma0", r.gamma0}, {"gamma1", r.gamma1}, {"seed", r.seed}});
    doc["runs"] = run_list;
    json entries = json::array();
    for (const auto& e : archive.entries()) {
        json cells = json::array();
        for (const auto& c : e.assignment) cells.push_back({c.facility, c.taz, c.count});
        entries.push_back({{"f0", e.costs.f0},
                           {"f1", e.costs.f1},
                           {"run", e.provenance.run},
                           {"iteration", e.provenance.iteration},
                           {"ant", e.provenance.ant},
                           {"assignment", cells},
                           {"trace", e.trace}});
    }
    doc["entries"] = entries;
    return doc;
}

ParetoArchive archive_from_json(const json& doc) {
    try {
        if (doc.at("schema_version").get<int>() != kSchemaVersion) throw ConfigError("unsupported archive schema_version");
        ParetoArchive archive(doc.at("scenario_id").get<int>());
        for (const auto& e : doc.at("entries")) {
            ArchiveEntry entry;
            entry.costs = {e.at("f0").get<double>(), e.at("f1").get<double>()};
            entry.provenance = {e.at("run").get<int>(), e.at("iteration").get<int>(), e.at("ant").get<int>()};
            for (const auto& c : e.at("assignment"))
                entry.assignment.push_back({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()});
            entry.trace = e.at("trace").get<std::vector<int>>();
            if (!archive.try_add(std::move(entry))) throw ConfigError("archive entries are not mutually non-dominated");
        }
        return archive;
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("malformed archive: {}", e.what()));
    }
}

void write_archive(const fs::path& path, const ParetoArchive& archive, const std::vector<RunInfo>& runs) {
    write_file_atomic(path, archive_to_json(archive, runs).dump(1) + "\n");
}

ParetoArchive read_archive(const fs::path& path) {
    try {
        return archive_from_json(read_json(path));
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

json aggregate_to_json(const AggregateSolution& a, const ProblemInstance& instance) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["scenarios"] = a.scenarios;
    doc["solutions"] = a.solutions;
    doc["mean_f0_m"] = a.mean_f0;
    doc["mean_f1"] = a.mean_f1;
    doc["mean_total_cost_m"] = a.mean_total_cost;

    json facilities = json::array();
    for (std::size_t i = 0; i < instance.facilities.size(); ++i) {
        facilities.push_back({{"id", instance.facilities[i].id},
                              {"capacity", instance.facilities[i].capacity},
                              {"weekly_visits", instance.facilities[i].weekly_visits},
                              {"expected_served", a.expected_served[i]},
                              {"expected_relative_occupancy", a.expected_relative_occupancy[i]},
                              {"closure_rate", a.closure_rate[i]},
                              {"stress_rate", a.stress_rate(i)},
                              {"underused_rate", a.underused_rate(i)},
                              {"ideal_rate", a.ideal_rate(i)},
                              {"displaced_when_closed", a.displaced_when_closed[i]}});
    }
    doc["facilities"] = facilities;

    json tazs = json::array();
    for (std::size_t j = 0; j < instance.tazs.size(); ++j) {
        tazs.push_back({{"id", instance.tazs[j].id},
                        {"patients", instance.tazs[j].patient_count},
                        {"baseline_avg_cost_m", a.taz_baseline_cost[j]},
                        {"expected_avg_cost_m", a.taz_expected_cost[j]},
                        {"mobility_risk_rate", a.mobility_risk_rate(j)}});
    }
    doc["tazs"] = tazs;

    json assignment = json::array();
    for (std::size_t i = 0; i < a.expected_assignment.rows(); ++i)
        for (std::size_t j = 0; j < a.expected_assignment.cols(); ++j)
            if (a.expected_assignment(i, j) != 0.0) assignment.push_back({i, j, a.expected_assignment(i, j)});
    doc["expected_assignment"] = assignment;

    json reassignment = json::array();
    for (std::size_t x = 0; x < a.expected_reassignment.rows(); ++x)
        for (std::size_t y = 0; y < a.expected_reassignment.cols(); ++y)
            if (a.expected_reassignment(x, y) != 0.0) reassignment.push_back({x, y, a.expected_reassignment(x, y)});
    doc["expected_reassignment"] = reassignment;
    return doc;
}

namespace {

std::string km(double meters) { return format_double(meters / 1000.0); }

}  // namespace

std::string occupancy_csv(const ReportTables& t, const ProblemInstance& instance) {
    CsvWriter w({"rank", "facility_id", "expected_relative_occupancy", "closure_rate"});
    int rank = 1;
    for (const auto& r : t.occupancy)
        w.add_row({std::to_string(rank++), instance.facilities[r.facility].id, format_double(r.expected_relative_occupancy),
                   format_double(r.closure_rate)});
    return w.str();
}

std::string stress_csv(const ReportTables& t, const ProblemInstance& instance) {
    CsvWriter w({"rank", "facility_id", "stress_rate", "underused_rate", "ideal_rate", "closure_rate"});
    int rank = 1;
    for (const auto& r : t.stress)
        w.add_row({std::to_string(rank++), instance.facilities[r.facility].id, format_double(r.stress_rate),
                   format_double(r.underused_rate), format_double(r.ideal_rate), format_double(r.closure_rate)});
    return w.str();
}

std::string reassignment_csv(const ReportTables& t, const ProblemInstance& instance) {
    CsvWriter w({"rank", "from_facility_id", "to_facility_id", "expected_patients"});
    int rank = 1;
    for (const auto& r : t.reassignment)
        w.add_row({std::to_string(rank++), instance.facilities[r.from].id, instance.facilities[r.to].id,
                   format_double(r.expected_patients)});
    return w.str();
}

std::string closure_importance_csv(const ReportTables& t, const ProblemInstance& instance) {
    CsvWriter w({"rank", "facility_id", "closure_rate", "displaced_when_closed", "importance"});
    int rank = 1;
    for (const auto& r : t.closure_importance)
        w.add_row({std::to_string(rank++), instance.facilities[r.facility].id, format_double(r.closure_rate),
                   format_double(r.displaced_when_closed), format_double(r.importance)});
    return w.str();
}

std::string demand_increase_csv(const ReportTables& t, const ProblemInstance& instance) {
    CsvWriter w({"rank", "facility_id", "pre_hazard_visits", "expected_served", "demand_increase"});
    int rank = 1;
    for (const auto& r : t.demand_increase)
        w.add_row({std::to_string(rank++), instance.facilities[r.facility].id, std::to_string(r.pre_hazard_visits),
                   format_double(r.expected_served), format_double(r.increase)});
    return w.str();
}

std::string taz_travel_csv(const ReportTables& t, const ProblemInstance& instance) {
    CsvWriter w({"rank", "taz_id", "patients", "baseline_avg_km", "expected_avg_km", "mobility_risk_rate"});
    int rank = 1;
    for (const auto& r : t.taz_travel)
        w.add_row({std::to_string(rank++), instance.tazs[r.taz].id, std::to_string(r.patients), km(r.baseline_cost),
                   km(r.expected_cost), format_double(r.mobility_risk_rate)});
    return w.str();
}

std::string pareto_front_csv(const ParetoArchive& archive) {
    CsvWriter w({"f0_km", "f1", "run", "iteration", "ant"});
    std::vector<const ArchiveEntry*> sorted;
    for (const auto& e : archive.entries()) sorted.push_back(&e);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ArchiveEntry* a, const ArchiveEntry* b) { return a->costs.f0 < b->costs.f0; });
    for (const auto* e : sorted)
        w.add_row({km(e->costs.f0), format_double(e->costs.f1), std::to_string(e->provenance.run),
                   std::to_string(e->provenance.iteration), std::to_string(e->provenance.ant)});
    return w.str();
}

namespace {

json point(double lon, double lat, json properties) {
    return {{"type", "Feature"},
            {"geometry", {{"type", "Point"}, {"coordinates", {lon, lat}}}},
            {"properties", std::move(properties)}};
}

}  // namespace

json facilities_geojson(const AggregateSolution& a, const ProblemInstance& instance) {
    json features = json::array();
    for (std::size_t i = 0; i < instance.facilities.size(); ++i) {
        const auto& f = instance.facilities[i];
        features.push_back(point(f.lon, f.lat,
                                 {{"id", f.id},
                                  {"capacity", f.capacity},
                                  {"flood_class", to_string(f.flood_class)},
                                  {"closure_rate", a.closure_rate[i]},
                                  {"expected_relative_occupancy", a.expected_relative_occupancy[i]},
                                  {"stress_rate", a.stress_rate(i)},
                                  {"underused_rate", a.underused_rate(i)},
                                  {"ideal_rate", a.ideal_rate(i)}}));
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

json tazs_geojson(const AggregateSolution& a, const ProblemInstance& instance) {
    json features = json::array();
    for (std::size_t j = 0; j < instance.tazs.size(); ++j) {
        const auto& z = instance.tazs[j];
        features.push_back(point(z.lon, z.lat,
                                 {{"id", z.id},
                                  {"patients", z.patient_count},
                                  {"baseline_avg_km", a.taz_baseline_cost[j] / 1000.0},
                                  {"expected_avg_km", a.taz_expected_cost[j] / 1000.0},
                                  {"mobility_risk_rate", a.mobility_risk_rate(j)}}));
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace floodcare
