#pragma once

#include <span>
#include <string>
#include <vector>

#include "floodcare/model.hpp"
#include "floodcare/pareto.hpp"

namespace floodcare {

enum class FacilityStatus { Closed, Underused, Stressed, Ideal };

const char* to_string(FacilityStatus status);

inline constexpr double kUnderusedAbove = 0.5;
inline constexpr double kStressedBelow = 0.1;

// Underused when unused share > 0.5, Stressed when < 0.1, Ideal otherwise.
FacilityStatus facility_status(double relative_unused, bool closed);

// Pre-assignment merged with one residual solution.
struct FullSolution {
    AssignmentMatrix assignment;          // pre-assigned + residual, per (facility, TAZ)
    AssignmentMatrix residual;
    std::vector<int> pre_assignment;
    std::vector<int> served;              // per facility, whole system
    std::vector<int> patient_facility;    // per instance patient
    std::vector<double> patient_cost;     // meters, scenario distances
    std::vector<char> closed;             // per facility
};

FullSolution merge_full(const ProblemInstance& instance, const Scenario& scenario, const ArchiveEntry& entry);

// (x, y): patients preferring closed facility x served at y.
Matrix<int> reassignment_matrix(const FullSolution& full, const ProblemInstance& instance);

struct TazStatus {
    bool mobility_risk = false;
    double avg_cost = 0.0;       // meters
    double baseline_cost = 0.0;  // meters
};

// Average preferred-facility travel cost per TAZ on the unpenalized matrix.
std::vector<double> baseline_taz_costs(const ProblemInstance& instance, const Matrix<double>& baseline_distance);

std::vector<TazStatus> taz_status(const FullSolution& full, const ProblemInstance& instance,
                                  std::span<const double> baseline_costs);

std::vector<double> relative_unused(const FullSolution& full, const ProblemInstance& instance);

// Expected values over a solution set (one scenario) or over scenarios.
struct AggregateSolution {
    int scenarios = 0;
    int solutions = 0;                       // (scenario, solution) pairs
    Matrix<double> expected_assignment;      // facility x TAZ, whole system
    Matrix<double> expected_reassignment;    // facility x facility
    std::vector<double> expected_served;
    std::vector<double> expected_relative_occupancy;
    std::vector<double> closure_rate;        // share of scenarios with the facility closed
    std::vector<int> stressed_count;
    std::vector<int> underused_count;
    std::vector<int> ideal_count;
    std::vector<double> displaced_when_closed;  // preferred patients displaced per closure
    std::vector<double> taz_expected_cost;   // meters
    std::vector<double> taz_baseline_cost;   // meters
    std::vector<int> taz_risk_count;
    double mean_f0 = 0.0;                    // residual objectives
    double mean_f1 = 0.0;
    double mean_total_cost = 0.0;            // whole-system travel, meters

    double stress_rate(std::size_t facility) const;
    double underused_rate(std::size_t facility) const;
    double ideal_rate(std::size_t facility) const;
    double mobility_risk_rate(std::size_t taz) const;
    bool always_closed(std::size_t facility) const { return closure_rate[facility] >= 1.0; }
};

AggregateSolution aggregate_scenario(const ParetoArchive& archive, const Scenario& scenario,
                                     const ProblemInstance& instance, std::span<const double> baseline_costs);

// Equal-weight mean of scenario aggregates; status and risk rates pool
// every (scenario, solution) pair.
AggregateSolution aggregate_all(std::span<const AggregateSolution> scenario_aggregates);

struct OccupancyRow {
    int facility;
    double expected_relative_occupancy;
    double closure_rate;
};
struct StressRow {
    int facility;
    double stress_rate;
    double underused_rate;
    double ideal_rate;
    double closure_rate;
};
struct ReassignmentRow {
    int from;
    int to;
    double expected_patients;
};
struct ClosureImportanceRow {
    int facility;
    double closure_rate;
    double displaced_when_closed;
    double importance;  // closure_rate * displaced_when_closed
};
struct DemandRow {
    int facility;
    int pre_hazard_visits;
    double expected_served;
    double increase;
};
struct TazTravelRow {
    int taz;
    int patients;
    double baseline_cost;  // meters
    double expected_cost;  // meters
    double mobility_risk_rate;
};

struct ReportTables {
    std::vector<OccupancyRow> occupancy;
    std::vector<StressRow> stress;
    std::vector<ReassignmentRow> reassignment;
    std::vector<ClosureImportanceRow> closure_importance;
    std::vector<DemandRow> demand_increase;
    std::vector<TazTravelRow> taz_travel;
};

// Ranked tables, descending by their headline metric (ties by index).
// Always-closed facilities are left out of the facility tables.
ReportTables build_report(const AggregateSolution& aggregate, const ProblemInstance& instance);

}  // namespace floodcare
