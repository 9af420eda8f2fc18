#include <doctest.h>

#include <numeric>

#include "floodcare/acs.hpp"
#include "floodcare/analytics.hpp"
#include "support.hpp"

using namespace floodcare;

namespace {

// Three facilities (A, B, C) and two TAZs; A can be closed.
ProblemInstance tiny_instance() {
    ProblemInstance inst;
    inst.facilities = {{"A", 1, 0, 0, 3, 4, FloodClass::FP100},
                       {"B", 2, 0, 0, 3, 6, FloodClass::None},
                       {"C", 3, 0, 0, 2, 4, FloodClass::None}};
    inst.tazs = {{"T0", 4, 0, 0, 4}, {"T1", 5, 0, 0, 4}};
    inst.patients = {{"p0", 0, 0}, {"p1", 0, 0}, {"p2", 1, 0}, {"p3", 0, 1},
                     {"p4", 1, 1}, {"p5", 1, 1}, {"p6", 0, 2}, {"p7", 1, 2}};
    inst.validate();
    return inst;
}

Matrix<double> tiny_distance() { return fct::dense({{100, 200}, {300, 400}, {100, 150}}); }

ArchiveEntry entry_for(const Scenario& s, std::vector<int> trace) {
    ArchiveEntry e;
    e.trace = std::move(trace);
    e.assignment = cells_from_trace(e.trace, s.residual_patient_tazs());
    const auto m = e.matrix(s.num_facilities(), s.num_tazs());
    e.costs = {objective_distance(m, s.distance), load_balance_or_zero(served_counts(m), s.capacity)};
    return e;
}

Scenario closed_a() {
    ScenarioRealization r;
    r.closed_facilities = {0};
    return pre_assign(tiny_instance(), r, tiny_distance());
}

}  // namespace

TEST_CASE("status thresholds") {
    CHECK(facility_status(0.0, false) == FacilityStatus::Stressed);
    CHECK(facility_status(0.0999, false) == FacilityStatus::Stressed);
    CHECK(facility_status(0.1, false) == FacilityStatus::Ideal);
    CHECK(facility_status(0.5, false) == FacilityStatus::Ideal);
    CHECK(facility_status(0.5000001, false) == FacilityStatus::Underused);
    CHECK(facility_status(1.0, false) == FacilityStatus::Underused);
    CHECK(facility_status(0.3, true) == FacilityStatus::Closed);
    CHECK(std::string(to_string(FacilityStatus::Stressed)) == "stressed");
}

TEST_CASE("statuses partition every open facility") {
    for (int n = 0; n <= 1000; ++n) {
        const double r = n / 1000.0;
        const auto s = facility_status(r, false);
        const int hits = (s == FacilityStatus::Underused) + (s == FacilityStatus::Stressed) + (s == FacilityStatus::Ideal);
        CHECK(hits == 1);
    }
}

TEST_CASE("merge_full and reassignment on the tiny instance") {
    const auto inst = tiny_instance();
    const auto s = closed_a();
    REQUIRE(s.capacity == std::vector<int>{0, 3, 2});
    REQUIRE(s.demand == std::vector<int>{2, 1});
    REQUIRE(s.displaced_patients == std::vector<int>{0, 1, 2});

    const auto e = entry_for(s, {1, 2, 2});
    CHECK(e.costs.f0 == 550.0);
    const auto full = merge_full(inst, s, e);
    CHECK(full.served == std::vector<int>{0, 4, 4});
    CHECK(full.patient_facility == std::vector<int>{1, 2, 2, 1, 1, 1, 2, 2});
    CHECK(full.pre_assignment == std::vector<int>{0, 3, 2});
    CHECK(full.assignment(1, 0) == 2);

    const auto moved = reassignment_matrix(full, inst);
    CHECK(moved(0, 1) == 1);
    CHECK(moved(0, 2) == 2);
    CHECK(moved(1, 0) + moved(1, 2) + moved(2, 0) + moved(2, 1) == 0);

    const auto r = relative_unused(full, inst);
    CHECK(r[1] == doctest::Approx(1.0 / 3.0));
    CHECK(r[2] == 0.0);

    const auto base = baseline_taz_costs(inst, tiny_distance());
    CHECK(base[0] == 150.0);
    CHECK(base[1] == 287.5);
    const auto taz = taz_status(full, inst, base);
    CHECK(taz[0].avg_cost == 200.0);
    CHECK(taz[0].mobility_risk);
    CHECK(taz[1].avg_cost == 275.0);
    CHECK_FALSE(taz[1].mobility_risk);

    auto bad = e;
    bad.trace = {1, 1, 1, 1};
    CHECK_THROWS_AS(merge_full(inst, s, bad), ConfigError);
}

TEST_CASE("mobility risk needs a strictly higher average") {
    const auto inst = tiny_instance();
    ScenarioRealization none;
    const auto s = pre_assign(inst, none, tiny_distance());
    const auto full = merge_full(inst, s, entry_for(s, {}));
    const auto base = baseline_taz_costs(inst, tiny_distance());
    for (const auto& t : taz_status(full, inst, base)) {
        CHECK(t.avg_cost == t.baseline_cost);
        CHECK_FALSE(t.mobility_risk);
    }
}

TEST_CASE("scenario and overall aggregates") {
    const auto inst = tiny_instance();
    const auto base = baseline_taz_costs(inst, tiny_distance());
    const auto s1 = closed_a();
    ParetoArchive a1(0);
    REQUIRE(a1.try_add(entry_for(s1, {1, 2, 2})));  // (550, 0.471)
    REQUIRE(a1.try_add(entry_for(s1, {1, 1, 2})));  // (750, 0.118)
    const auto g1 = aggregate_scenario(a1, s1, inst, base);
    CHECK(g1.solutions == 2);
    CHECK(g1.closure_rate == std::vector<double>{1, 0, 0});
    CHECK(g1.expected_served == std::vector<double>{0, 4.5, 3.5});
    CHECK(g1.expected_relative_occupancy[1] == doctest::Approx(0.75));
    CHECK(g1.expected_relative_occupancy[2] == doctest::Approx(0.875));
    CHECK(g1.stress_rate(2) == 0.5);
    CHECK(g1.ideal_rate(2) == 0.5);
    CHECK(g1.ideal_rate(1) == 1.0);
    CHECK(g1.stress_rate(0) + g1.ideal_rate(0) + g1.underused_rate(0) == 0.0);
    CHECK(g1.expected_reassignment(0, 1) == 1.5);
    CHECK(g1.expected_reassignment(0, 2) == 1.5);
    CHECK(g1.mobility_risk_rate(0) == 1.0);
    CHECK(g1.mobility_risk_rate(1) == 0.0);
    CHECK(g1.taz_expected_cost == std::vector<double>{225, 275});
    CHECK(g1.mean_f0 == 650.0);
    CHECK(g1.displaced_when_closed[0] == 3.0);

    const auto t1 = build_report(g1, inst);
    CHECK(t1.occupancy.size() == 2);  // A always closed
    CHECK(t1.stress.size() == 2);
    CHECK(t1.closure_importance.empty());
    REQUIRE(t1.demand_increase.size() == 2);
    CHECK(t1.demand_increase[0].facility == 1);
    CHECK(t1.demand_increase[0].increase == 1.5);
    CHECK(t1.occupancy[0].facility == 2);
    CHECK(t1.reassignment.size() == 2);
    CHECK(t1.taz_travel[0].taz == 1);

    ScenarioRealization none;
    const auto s2 = pre_assign(inst, none, tiny_distance());
    ParetoArchive a2(1);
    a2.try_add(entry_for(s2, {}));
    const auto g2 = aggregate_scenario(a2, s2, inst, base);
    CHECK(g2.ideal_rate(1) == 1.0);  // exactly half unused
    CHECK(g2.ideal_rate(2) == 1.0);

    const std::vector<AggregateSolution> parts{g1, g2};
    const auto all = aggregate_all(parts);
    CHECK(all.scenarios == 2);
    CHECK(all.solutions == 3);
    CHECK(all.closure_rate[0] == 0.5);
    CHECK(all.displaced_when_closed[0] == 3.0);
    CHECK(all.expected_served[1] == 3.75);
    CHECK(all.stress_rate(2) == doctest::Approx(1.0 / 3.0));
    CHECK(all.expected_reassignment(0, 1) == 0.75);
    CHECK(all.mean_f0 == 325.0);

    const auto t = build_report(all, inst);
    REQUIRE(t.closure_importance.size() == 1);
    CHECK(t.closure_importance[0].facility == 0);
    CHECK(t.closure_importance[0].importance == 1.5);
    CHECK(t.occupancy.size() == 3);

    CHECK_THROWS_AS(aggregate_all(std::vector<AggregateSolution>{}), ConfigError);
    CHECK_THROWS_AS(aggregate_scenario(ParetoArchive(0), s1, inst, base), ConfigError);
}

TEST_CASE("aggregate identities on synthetic scenarios") {
    const auto loaded = fct::synthetic_instance(fct::small_spec(3));
    const auto& inst = loaded.instance;
    const auto base = baseline_taz_costs(inst, baseline_distance_matrix(loaded.graph, inst));
    AcsParams params;
    params.iterations = 5;
    params.ants = 10;
    std::vector<AggregateSolution> parts;
    for (int id = 0; id < 4; ++id) {
        const auto s = build_scenario(inst, loaded.graph, id, 100 + id);
        const auto archive = run_acs(s, params, 5);
        const auto g = aggregate_scenario(archive, s, inst, base);
        const double patients = static_cast<double>(inst.patients.size());
        CHECK(std::accumulate(g.expected_served.begin(), g.expected_served.end(), 0.0) ==
              doctest::Approx(patients).epsilon(1e-12));
        CHECK(std::accumulate(g.expected_assignment.data().begin(), g.expected_assignment.data().end(), 0.0) ==
              doctest::Approx(patients).epsilon(1e-12));
        for (std::size_t i = 0; i < inst.num_facilities(); ++i) {
            double row = 0.0;
            for (std::size_t y = 0; y < inst.num_facilities(); ++y) row += g.expected_reassignment(i, y);
            CHECK(row == doctest::Approx(g.closure_rate[i] * g.displaced_when_closed[i]).epsilon(1e-12));
            CHECK(g.expected_served[i] <= inst.facilities[i].capacity + 1e-9);
            const double rates = g.stress_rate(i) + g.underused_rate(i) + g.ideal_rate(i);
            CHECK(rates == doctest::Approx(g.closure_rate[i] > 0 ? 0.0 : 1.0));
        }
        parts.push_back(g);
    }
    const auto all = aggregate_all(parts);
    for (std::size_t i = 0; i < inst.num_facilities(); ++i) {
        double served = 0.0;
        for (const auto& p : parts) served += p.expected_served[i];
        CHECK(all.expected_served[i] == doctest::Approx(served / parts.size()).epsilon(1e-12));
        CHECK(all.closure_rate[i] >= 0.0);
        CHECK(all.closure_rate[i] <= 1.0);
    }
    const auto t = build_report(all, inst);
    for (const auto& row : t.occupancy) CHECK_FALSE(all.always_closed(row.facility));
    for (std::size_t n = 1; n < t.occupancy.size(); ++n)
        CHECK(t.occupancy[n - 1].expected_relative_occupancy >= t.occupancy[n].expected_relative_occupancy);
    for (const auto& row : t.closure_importance) {
        CHECK(row.closure_rate > 0.0);
        CHECK(row.closure_rate < 1.0);
    }
}
