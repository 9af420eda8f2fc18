#include "floodcare/analytics.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace floodcare {

const char* to_string(FacilityStatus status) {
    switch (status) {
        case FacilityStatus::Closed: return "closed";
        case FacilityStatus::Underused: return "underused";
        case FacilityStatus::Stressed: return "stressed";
        case FacilityStatus::Ideal: return "ideal";
    }
    return "ideal";
}

FacilityStatus facility_status(double relative_unused, bool closed) {
    if (closed) return FacilityStatus::Closed;
    if (relative_unused > kUnderusedAbove) return FacilityStatus::Underused;
    if (relative_unused < kStressedBelow) return FacilityStatus::Stressed;
    return FacilityStatus::Ideal;
}

FullSolution merge_full(const ProblemInstance& instance, const Scenario& scenario, const ArchiveEntry& entry) {
    const auto nh = instance.num_facilities();
    const auto nt = instance.num_tazs();
    if (scenario.num_facilities() != nh || scenario.num_tazs() != nt)
        throw ConfigError("scenario does not match instance dimensions");

    FullSolution full;
    full.residual = entry.matrix(nh, nt);
    if (const auto violations = check_feasible(full.residual, scenario); !violations.empty())
        throw ConfigError(fmt::format("residual solution infeasible: {}", violations.front().describe()));
    if (static_cast<long long>(scenario.displaced_patients.size()) != scenario.total_demand() ||
        entry.trace.size() != scenario.displaced_patients.size())
        throw ConfigError("solution lacks patient-level provenance for the displaced patients");

    full.closed.assign(nh, 0);
    for (int i : scenario.closed_facilities) full.closed[i] = 1;
    full.pre_assignment.assign(nh, 0);
    full.assignment = AssignmentMatrix(nh, nt, 0);
    full.patient_facility.assign(instance.patients.size(), -1);
    full.patient_cost.assign(instance.patients.size(), 0.0);

    for (std::size_t p = 0; p < instance.patients.size(); ++p) {
        const auto& patient = instance.patients[p];
        if (full.closed[patient.preferred_facility]) continue;
        full.patient_facility[p] = patient.preferred_facility;
        ++full.pre_assignment[patient.preferred_facility];
        ++full.assignment(patient.preferred_facility, patient.taz);
    }
    for (std::size_t k = 0; k < entry.trace.size(); ++k) {
        const int p = scenario.displaced_patients[k];
        const int i = entry.trace[k];
        if (full.patient_facility[p] != -1) throw ConfigError("displaced patient is also pre-assigned");
        full.patient_facility[p] = i;
        ++full.assignment(i, instance.patients[p].taz);
    }
    for (std::size_t p = 0; p < instance.patients.size(); ++p) {
        const int i = full.patient_facility[p];
        if (i < 0) throw ConfigError(fmt::format("patient {} left unassigned", instance.patients[p].id));
        full.patient_cost[p] = scenario.distance(i, instance.patients[p].taz);
    }
    full.served = served_counts(full.assignment);
    return full;
}

Matrix<int> reassignment_matrix(const FullSolution& full, const ProblemInstance& instance) {
    const auto nh = instance.num_facilities();
    Matrix<int> m(nh, nh, 0);
    for (std::size_t p = 0; p < instance.patients.size(); ++p) {
        const int from = instance.patients[p].preferred_facility;
        if (full.closed[from]) ++m(from, full.patient_facility[p]);
    }
    return m;
}

std::vector<double> baseline_taz_costs(const ProblemInstance& instance, const Matrix<double>& baseline_distance) {
    std::vector<CompensatedSum> sums(instance.num_tazs());
    std::vector<int> counts(instance.num_tazs(), 0);
    for (const auto& p : instance.patients) {
        sums[p.taz].add(baseline_distance(p.preferred_facility, p.taz));
        ++counts[p.taz];
    }
    std::vector<double> out(instance.num_tazs(), 0.0);
    for (std::size_t j = 0; j < out.size(); ++j)
        if (counts[j] > 0) out[j] = sums[j].value() / counts[j];
    return out;
}

std::vector<TazStatus> taz_status(const FullSolution& full, const ProblemInstance& instance,
                                  std::span<const double> baseline_costs) {
    if (baseline_costs.size() != instance.num_tazs()) throw ConfigError("baseline cost vector length mismatch");
    std::vector<CompensatedSum> sums(instance.num_tazs());
    std::vector<int> counts(instance.num_tazs(), 0);
    for (std::size_t p = 0; p < instance.patients.size(); ++p) {
        sums[instance.patients[p].taz].add(full.patient_cost[p]);
        ++counts[instance.patients[p].taz];
    }
    std::vector<TazStatus> out(instance.num_tazs());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j].baseline_cost = baseline_costs[j];
        out[j].avg_cost = counts[j] > 0 ? sums[j].value() / counts[j] : 0.0;
        out[j].mobility_risk = out[j].avg_cost > out[j].baseline_cost;
    }
    return out;
}

std::vector<double> relative_unused(const FullSolution& full, const ProblemInstance& instance) {
    std::vector<double> r(instance.num_facilities(), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (full.closed[i]) continue;
        const int c = instance.facilities[i].capacity;
        r[i] = static_cast<double>(c - full.served[i]) / c;
    }
    return r;
}

double AggregateSolution::stress_rate(std::size_t facility) const {
    return solutions > 0 ? static_cast<double>(stressed_count[facility]) / solutions : 0.0;
}

double AggregateSolution::underused_rate(std::size_t facility) const {
    return solutions > 0 ? static_cast<double>(underused_count[facility]) / solutions : 0.0;
}

double AggregateSolution::ideal_rate(std::size_t facility) const {
    return solutions > 0 ? static_cast<double>(ideal_count[facility]) / solutions : 0.0;
}

double AggregateSolution::mobility_risk_rate(std::size_t taz) const {
    return solutions > 0 ? static_cast<double>(taz_risk_count[taz]) / solutions : 0.0;
}

namespace {

// Running sums for a mean over equally weighted items.
struct MeanAccumulator {
    std::vector<CompensatedSum> sums;
    explicit MeanAccumulator(std::size_t n) : sums(n) {}
    std::vector<double> mean(double count) const {
        std::vector<double> out(sums.size());
        for (std::size_t n = 0; n < sums.size(); ++n) out[n] = sums[n].value() / count;
        return out;
    }
};

AggregateSolution empty_aggregate(std::size_t nh, std::size_t nt) {
    AggregateSolution a;
    a.expected_assignment = Matrix<double>(nh, nt, 0.0);
    a.expected_reassignment = Matrix<double>(nh, nh, 0.0);
    a.expected_served.assign(nh, 0.0);
    a.expected_relative_occupancy.assign(nh, 0.0);
    a.closure_rate.assign(nh, 0.0);
    a.stressed_count.assign(nh, 0);
    a.underused_count.assign(nh, 0);
    a.ideal_count.assign(nh, 0);
    a.displaced_when_closed.assign(nh, 0.0);
    a.taz_expected_cost.assign(nt, 0.0);
    a.taz_baseline_cost.assign(nt, 0.0);
    a.taz_risk_count.assign(nt, 0);
    return a;
}

}  // namespace

AggregateSolution aggregate_scenario(const ParetoArchive& archive, const Scenario& scenario,
                                     const ProblemInstance& instance, std::span<const double> baseline_costs) {
    if (archive.empty()) throw ConfigError(fmt::format("scenario {} has an empty archive", scenario.id));
    const auto nh = instance.num_facilities();
    const auto nt = instance.num_tazs();
    auto agg = empty_aggregate(nh, nt);
    agg.scenarios = 1;
    agg.solutions = static_cast<int>(archive.size());
    agg.taz_baseline_cost.assign(baseline_costs.begin(), baseline_costs.end());

    MeanAccumulator assignment(nh * nt), reassignment(nh * nh), served(nh), occupancy(nh), taz_cost(nt);
    CompensatedSum f0, f1, total_cost;
    for (const auto& entry : archive.entries()) {
        const auto full = merge_full(instance, scenario, entry);
        const auto& a = full.assignment.data();
        for (std::size_t n = 0; n < a.size(); ++n)
            if (a[n] != 0) assignment.sums[n].add(a[n]);
        const auto moved = reassignment_matrix(full, instance);
        for (std::size_t n = 0; n < moved.data().size(); ++n)
            if (moved.data()[n] != 0) reassignment.sums[n].add(moved.data()[n]);

        const auto r = relative_unused(full, instance);
        for (std::size_t i = 0; i < nh; ++i) {
            served.sums[i].add(full.served[i]);
            occupancy.sums[i].add(static_cast<double>(full.served[i]) / instance.facilities[i].capacity);
            switch (facility_status(r[i], full.closed[i] != 0)) {
                case FacilityStatus::Stressed: ++agg.stressed_count[i]; break;
                case FacilityStatus::Underused: ++agg.underused_count[i]; break;
                case FacilityStatus::Ideal: ++agg.ideal_count[i]; break;
                case FacilityStatus::Closed: break;
            }
        }
        const auto statuses = taz_status(full, instance, baseline_costs);
        for (std::size_t j = 0; j < nt; ++j) {
            taz_cost.sums[j].add(statuses[j].avg_cost);
            if (statuses[j].mobility_risk) ++agg.taz_risk_count[j];
        }
        f0.add(entry.costs.f0);
        f1.add(entry.costs.f1);
        CompensatedSum cost;
        for (double c : full.patient_cost) cost.add(c);
        total_cost.add(cost.value());
    }

    const double n = static_cast<double>(archive.size());
    agg.expected_assignment.data() = assignment.mean(n);
    agg.expected_reassignment.data() = reassignment.mean(n);
    agg.expected_served = served.mean(n);
    agg.expected_relative_occupancy = occupancy.mean(n);
    agg.taz_expected_cost = taz_cost.mean(n);
    agg.mean_f0 = f0.value() / n;
    agg.mean_f1 = f1.value() / n;
    agg.mean_total_cost = total_cost.value() / n;

    std::vector<int> preferred(nh, 0);
    for (const auto& p : instance.patients) ++preferred[p.preferred_facility];
    for (int i : scenario.closed_facilities) {
        agg.closure_rate[i] = 1.0;
        agg.displaced_when_closed[i] = preferred[i];
    }
    return agg;
}

AggregateSolution aggregate_all(std::span<const AggregateSolution> scenario_aggregates) {
    if (scenario_aggregates.empty()) throw ConfigError("no scenario aggregates to combine");
    const auto& first = scenario_aggregates.front();
    const auto nh = first.expected_served.size();
    const auto nt = first.taz_expected_cost.size();
    auto agg = empty_aggregate(nh, nt);
    agg.taz_baseline_cost = first.taz_baseline_cost;

    MeanAccumulator assignment(nh * nt), reassignment(nh * nh), served(nh), occupancy(nh), closure(nh), taz_cost(nt);
    std::vector<CompensatedSum> displaced(nh);
    CompensatedSum f0, f1, total_cost;
    for (const auto& s : scenario_aggregates) {
        if (s.expected_served.size() != nh || s.taz_expected_cost.size() != nt)
            throw ConfigError("scenario aggregates have mismatched dimensions");
        agg.scenarios += s.scenarios;
        agg.solutions += s.solutions;
        for (std::size_t n = 0; n < nh * nt; ++n) assignment.sums[n].add(s.expected_assignment.data()[n]);
        for (std::size_t n = 0; n < nh * nh; ++n) reassignment.sums[n].add(s.expected_reassignment.data()[n]);
        for (std::size_t i = 0; i < nh; ++i) {
            served.sums[i].add(s.expected_served[i]);
            occupancy.sums[i].add(s.expected_relative_occupancy[i]);
            closure.sums[i].add(s.closure_rate[i]);
            displaced[i].add(s.closure_rate[i] * s.displaced_when_closed[i]);
            agg.stressed_count[i] += s.stressed_count[i];
            agg.underused_count[i] += s.underused_count[i];
            agg.ideal_count[i] += s.ideal_count[i];
        }
        for (std::size_t j = 0; j < nt; ++j) {
            taz_cost.sums[j].add(s.taz_expected_cost[j]);
            agg.taz_risk_count[j] += s.taz_risk_count[j];
        }
        f0.add(s.mean_f0);
        f1.add(s.mean_f1);
        total_cost.add(s.mean_total_cost);
    }

    const double n = static_cast<double>(scenario_aggregates.size());
    agg.expected_assignment.data() = assignment.mean(n);
    agg.expected_reassignment.data() = reassignment.mean(n);
    agg.expected_served = served.mean(n);
    agg.expected_relative_occupancy = occupancy.mean(n);
    agg.closure_rate = closure.mean(n);
    agg.taz_expected_cost = taz_cost.mean(n);
    for (std::size_t i = 0; i < nh; ++i) {
        const double closed_weight = closure.sums[i].value();
        agg.displaced_when_closed[i] = closed_weight > 0.0 ? displaced[i].value() / closed_weight : 0.0;
    }
    agg.mean_f0 = f0.value() / n;
    agg.mean_f1 = f1.value() / n;
    agg.mean_total_cost = total_cost.value() / n;
    return agg;
}

namespace {

template <typename Row, typename Key>
void rank_descending(std::vector<Row>& rows, Key key) {
    std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) { return key(a) > key(b); });
}

}  // namespace

ReportTables build_report(const AggregateSolution& aggregate, const ProblemInstance& instance) {
    const auto nh = instance.num_facilities();
    const auto nt = instance.num_tazs();
    if (aggregate.expected_served.size() != nh || aggregate.taz_expected_cost.size() != nt)
        throw ConfigError("aggregate does not match instance dimensions");
    ReportTables t;
    for (std::size_t i = 0; i < nh; ++i) {
        const int f = static_cast<int>(i);
        const double closure = aggregate.closure_rate[i];
        if (closure > 0.0 && closure < 1.0)
            t.closure_importance.push_back(
                {f, closure, aggregate.displaced_when_closed[i], closure * aggregate.displaced_when_closed[i]});
        if (aggregate.always_closed(i)) continue;
        t.occupancy.push_back({f, aggregate.expected_relative_occupancy[i], closure});
        t.stress.push_back({f, aggregate.stress_rate(i), aggregate.underused_rate(i), aggregate.ideal_rate(i), closure});
        const int visits = instance.facilities[i].weekly_visits;
        t.demand_increase.push_back({f, visits, aggregate.expected_served[i], aggregate.expected_served[i] - visits});
    }
    for (std::size_t x = 0; x < nh; ++x)
        for (std::size_t y = 0; y < nh; ++y)
            if (aggregate.expected_reassignment(x, y) > 0.0)
                t.reassignment.push_back({static_cast<int>(x), static_cast<int>(y), aggregate.expected_reassignment(x, y)});
    for (std::size_t j = 0; j < nt; ++j)
        t.taz_travel.push_back({static_cast<int>(j), instance.tazs[j].patient_count, aggregate.taz_baseline_cost[j],
                                aggregate.taz_expected_cost[j], aggregate.mobility_risk_rate(j)});

    rank_descending(t.occupancy, [](const OccupancyRow& r) { return r.expected_relative_occupancy; });
    rank_descending(t.stress, [](const StressRow& r) { return r.stress_rate; });
    rank_descending(t.reassignment, [](const ReassignmentRow& r) { return r.expected_patients; });
    rank_descending(t.closure_importance, [](const ClosureImportanceRow& r) { return r.importance; });
    rank_descending(t.demand_increase, [](const DemandRow& r) { return r.increase; });
    rank_descending(t.taz_travel, [](const TazTravelRow& r) { return r.expected_cost; });
    return t;
}

}  // namespace floodcare
