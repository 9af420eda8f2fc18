#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "floodcare/analytics.hpp"
#include "floodcare/model.hpp"
#include "floodcare/pareto.hpp"
#include "floodcare/road_graph.hpp"

namespace floodcare {

inline constexpr int kSchemaVersion = 1;

// Itemized ingestion failure; each issue carries file and line.
class LoadError : public Error {
public:
    explicit LoadError(std::vector<std::string> issues);
    const char* kind() const noexcept override { return "load"; }
    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    std::vector<std::string> issues_;
};

class IoError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "io"; }
};

struct FacilityRecord {
    std::string id;
    double lon = 0.0;
    double lat = 0.0;
    std::optional<std::int64_t> node_id;
    std::optional<int> weekly_visits;  // derived from patients when absent
    FloodClass flood_class = FloodClass::None;
    int line = 0;
};

struct TazRecord {
    std::string id;
    double lon = 0.0;
    double lat = 0.0;
    std::optional<std::int64_t> node_id;
    int line = 0;
};

struct PatientRecord {
    std::string id;
    std::string taz_id;
    std::string facility_id;
    int line = 0;
};

// Raw tabular inputs. bundle.json names the member files:
//   nodes.csv       id,lon,lat
//   edges.csv       id,node_a,node_b,length_m,flood_class
//   facilities.csv  id,lon,lat,node_id,weekly_visits,flood_class
//   tazs.csv        id,lon,lat,node_id
//   patients.csv    id,taz_id,preferred_facility_id
// or, instead of patients.csv,
//   visits.csv      taz_id,facility_id,weekly_count
struct InstanceBundle {
    int schema_version = kSchemaVersion;
    std::string name;
    std::vector<Node> nodes;
    std::vector<EdgeRecord> edges;
    std::vector<FacilityRecord> facilities;
    std::vector<TazRecord> tazs;
    std::vector<PatientRecord> patients;
};

struct LoadedInstance {
    ProblemInstance instance;
    RoadGraph graph;
    std::vector<std::string> notices;
};

InstanceBundle read_bundle(const std::filesystem::path& dir);
void write_bundle(const InstanceBundle& bundle, const std::filesystem::path& dir);

// Validates and converts a bundle: snaps unplaced facilities/TAZs to the
// nearest node, drops zero-visit facilities and zero-patient TAZs (with a
// notice), derives capacities and checks connectivity.
LoadedInstance build_instance(const InstanceBundle& bundle);
LoadedInstance load_instance(const std::filesystem::path& dir);

// Writes via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

// Scenario bundle: JSON metadata plus a binary distance matrix sidecar
// ("FCDM", u32 rows, u32 cols, little-endian float64 row-major).
void write_scenario(const std::filesystem::path& json_path, const Scenario& scenario, const ProblemInstance& instance);
Scenario read_scenario(const std::filesystem::path& json_path, const ProblemInstance* instance = nullptr);

void write_matrix(const std::filesystem::path& path, const Matrix<double>& m);
Matrix<double> read_matrix(const std::filesystem::path& path);

struct RunInfo {
    int run = 0;
    double gamma0 = 1.0;
    double gamma1 = 1.0;
    std::uint64_t seed = 0;
};

nlohmann::json archive_to_json(const ParetoArchive& archive, const std::vector<RunInfo>& runs);
ParetoArchive archive_from_json(const nlohmann::json& doc);
void write_archive(const std::filesystem::path& path, const ParetoArchive& archive, const std::vector<RunInfo>& runs);
ParetoArchive read_archive(const std::filesystem::path& path);

nlohmann::json aggregate_to_json(const AggregateSolution& aggregate, const ProblemInstance& instance);

// Report tables as CSV text; distances shown in kilometers.
std::string occupancy_csv(const ReportTables& t, const ProblemInstance& instance);
std::string stress_csv(const ReportTables& t, const ProblemInstance& instance);
std::string reassignment_csv(const ReportTables& t, const ProblemInstance& instance);
std::string closure_importance_csv(const ReportTables& t, const ProblemInstance& instance);
std::string demand_increase_csv(const ReportTables& t, const ProblemInstance& instance);
std::string taz_travel_csv(const ReportTables& t, const ProblemInstance& instance);
std::string pareto_front_csv(const ParetoArchive& archive);

nlohmann::json facilities_geojson(const AggregateSolution& aggregate, const ProblemInstance& instance);
nlohmann::json tazs_geojson(const AggregateSolution& aggregate, const ProblemInstance& instance);

// Shortest round-trip decimal form.
std::string format_double(double value);

}  // namespace floodcare
