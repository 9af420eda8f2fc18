// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "floodcare/acs.hpp"
#include "floodcare/analytics.hpp"
#include "floodcare/pipeline.hpp"
#include "oracles/pareto_bruteforce.hpp"
#include "oracles/transport.hpp"
#include "support.hpp"
#include "tempdir.hpp"

using namespace floodcare;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and thresholds.
constexpr double kFeasibilityBudgetS = 120.0;
constexpr double kDistanceRatio = 1.10;
constexpr int kDistanceRequired = 18;
constexpr double kSoundnessTol = 1e-9;
constexpr double kHypervolumeRatio = 0.90;
constexpr int kNonDominatedRequired = 9;
constexpr double kDominanceTol = 1e-9;
constexpr double kFloatTol = 1e-12;
constexpr double kAggregateTol = 1e-9;
constexpr double kFullScaleBudgetS = 15 * 60.0;
constexpr double kLinearR2 = 0.95;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::vector<double>> nested(const Matrix<double>& m) {
    std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

// First feasible realization for scenario idx, resampling like the pipeline does.
Scenario feasible_scenario(const LoadedInstance& loaded, int idx, std::uint64_t base) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        try {
            return build_scenario(loaded.instance, loaded.graph, idx, scenario_seed(base, idx, attempt));
        } catch (const InfeasibleScenarioError&) {
        }
    }
    throw ConfigError(fmt::format("no feasible realization for scenario {}", idx));
}

double best_f0(const ParetoArchive& a) {
    double best = INFINITY;
    for (const auto& e : a.entries()) best = std::min(best, e.costs.f0);
    return best;
}

double best_f1(const ParetoArchive& a) {
    double best = INFINITY;
    for (const auto& e : a.entries()) best = std::min(best, e.costs.f1);
    return best;
}

// Random feasible residual trace: shuffle capacity slots and hand them out.
ArchiveEntry random_entry(const Scenario& s, Rng& rng) {
    std::vector<int> slots;
    for (std::size_t i = 0; i < s.capacity.size(); ++i)
        for (int n = 0; n < s.capacity[i]; ++n) slots.push_back(static_cast<int>(i));
    const auto perm = random_permutation(static_cast<int>(slots.size()), rng);
    const auto tazs = s.residual_patient_tazs();
    ArchiveEntry e;
    e.trace.resize(tazs.size());
    for (std::size_t k = 0; k < tazs.size(); ++k) e.trace[k] = slots[perm[k]];
    e.assignment = cells_from_trace(e.trace, tazs);
    const auto m = e.matrix(s.num_facilities(), s.num_tazs());
    e.costs = {objective_distance(m, s.distance), load_balance_or_zero(served_counts(m), s.capacity)};
    return e;
}

// 1 ----------------------------------------------------------------------

Outcome feasibility_suite() {
    const auto t0 = Clock::now();
    const auto loaded = fct::synthetic_instance(fct::small_spec(1));
    std::vector<Scenario> scenarios;
    for (int id = 0; id < 20; ++id) scenarios.push_back(feasible_scenario(loaded, id, 1000));

    long long solutions = 0, violations = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        for (const auto& s : scenarios) {
            const auto archive = run_acs(s, AcsParams{}, seed);
            for (const auto& e : archive.entries()) {
                ++solutions;
                violations += static_cast<long long>(check_feasible(e.matrix(s.num_facilities(), s.num_tazs()), s).size());
                const auto full = merge_full(loaded.instance, s, e);
                for (std::size_t i = 0; i < full.served.size(); ++i)
                    if (full.served[i] > loaded.instance.facilities[i].capacity) ++violations;
            }
        }
    }
    const double t = seconds_since(t0);
    return {violations == 0 && solutions > 0 && t < kFeasibilityBudgetS,
            fmt::format("{} archive solutions over 20 scenarios x 100 seeds, {} violations, {:.1f} s (budget {:.0f} s)",
                        solutions, violations, t, kFeasibilityBudgetS)};
}

// 2 ----------------------------------------------------------------------

Outcome distance_oracle() {
    Rng rng(2024);
    int within = 0, unsound = 0;
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
        const int open = 2 + static_cast<int>(rng.below(5));         // 2..6
        const int closed = static_cast<int>(rng.below(3));
        const int tazs = 3 + static_cast<int>(rng.below(8));
        const int patients = 10 + static_cast<int>(rng.below(31));   // 10..40
        const int slack = static_cast<int>(rng.below(8));
        const auto s = fct::random_residual(rng.next(), open, closed, tazs, patients, slack);
        const double exact = oracle::min_transport_cost(s.capacity, s.demand, nested(s.distance));
        const auto archive = run_scenario(s, AcsParams{}, 500 + n);
        const double got = best_f0(archive);
        worst = std::max(worst, got / exact);
        if (got <= kDistanceRatio * exact) ++within;
        for (const auto& e : archive.entries())
            if (e.costs.f0 < exact * (1 - kSoundnessTol)) ++unsound;
    }
    return {within >= kDistanceRequired && unsound == 0,
            fmt::format("{}/20 within {:.2f} x optimum (need {}), worst ratio {:.4f}, {} entries below optimum", within,
                        kDistanceRatio, kDistanceRequired, worst, unsound)};
}

// 3 ----------------------------------------------------------------------

Outcome pareto_oracle() {
    Rng rng(77);
    int hv_ok = 0, clean = 0;
    double lowest = 1.0;
    for (int n = 0; n < 10; ++n) {
        const int open = 2 + static_cast<int>(rng.below(2));        // 2..3
        const int closed = static_cast<int>(rng.below(2));
        const int tazs = 2 + static_cast<int>(rng.below(3));
        const int patients = 5 + static_cast<int>(rng.below(4));    // 5..8
        const int slack = 1 + static_cast<int>(rng.below(4));
        const auto s = fct::random_residual(rng.next(), open, closed, tazs, patients, slack);
        const auto all = oracle::feasible_costs(s.capacity, s.demand, nested(s.distance));
        double max0 = 0.0, max1 = 0.0;
        for (const auto& [a, b] : all) {
            max0 = std::max(max0, a);
            max1 = std::max(max1, b);
        }
        // a front of constant spread has no area; fall back to a unit band
        const oracle::CostPair ref{1.05 * max0, max1 > 0.0 ? 1.05 * max1 : 1.0};
        const double truth = oracle::hypervolume(all, ref);

        AcsParams p;
        p.iterations = 100;
        p.ants = 30;
        std::vector<double> ratios;
        bool instance_clean = true;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto archive = run_acs(s, p, seed);
            std::vector<oracle::CostPair> pts;
            for (const auto& e : archive.entries()) {
                pts.emplace_back(e.costs.f0, e.costs.f1);
                for (const auto& q : all)
                    if (oracle::better(q, pts.back(), kDominanceTol * std::max(1.0, max0))) instance_clean = false;
            }
            ratios.push_back(truth > 0.0 ? oracle::hypervolume(pts, ref) / truth : 1.0);
        }
        const double m = median(ratios);
        lowest = std::min(lowest, m);
        if (m >= kHypervolumeRatio) ++hv_ok;
        if (instance_clean) ++clean;
    }
    return {hv_ok == 10 && clean >= kNonDominatedRequired,
            fmt::format("median hypervolume ratio >= {:.2f} on {}/10 instances (lowest {:.4f}); archives non-dominated on "
                        "{}/10 (need {})",
                        kHypervolumeRatio, hv_ok, lowest, clean, kNonDominatedRequired)};
}

// 4 ----------------------------------------------------------------------

Outcome model_constants() {
    std::vector<std::string> failed;
    auto expect = [&](bool ok, const char* what) {
        if (!ok) failed.emplace_back(what);
    };
    expect(inundation_probability(FloodClass::FP100) == 1.0, "fp100 probability");
    expect(inundation_probability(FloodClass::FP500) == 0.2, "fp500 probability");
    expect(inundation_probability(FloodClass::None) == 0.0, "none probability");
    expect(kFloodedEdgeFactor == 10.0, "flooded edge factor");
    Edge e{1, 0, 1, 250.0, FloodClass::FP100};
    expect(effective_edge_cost(e, true) == 2500.0 && effective_edge_cost(e, false) == 250.0, "edge cost");
    bool caps = true;
    for (int v = 1; v <= 3000; ++v) caps = caps && estimate_capacity(v) == (4 * v) / 3;
    expect(caps, "capacity floor(4v/3)");
    expect(estimate_capacity(3) == 4 && estimate_capacity(100) == 133 && estimate_capacity(1) == 1, "capacity examples");
    expect(std::abs(heuristic_distance(1.0, 1.0) - 0.02) <= kFloatTol, "h0(1) = m");
    expect(std::abs(heuristic_distance(0.0, 1.0) - 1.0) <= kFloatTol, "h0(0) = 1");
    expect(AcsParams{}.min_heuristic == 0.02, "m default");
    expect(std::abs(initial_pheromone(30, 12345.0) - 1.0 / (900.0 * 12345.0)) <= kFloatTol * 1e-7, "p0 formula");
    {
        const auto s = fct::make_scenario({3, 3}, {2, 2}, fct::dense({{10, 40}, {20, 70}}));
        AcsContext ctx(s, AcsParams{});
        expect(ctx.initial_pheromone() == 1.0 / (900.0 * 70.0), "p0 uses max D");
    }
    const AcsParams d;
    expect(d.iterations == 30 && d.ants == 30, "n_i, n_a");
    expect(d.q0 == 0.8 && d.alpha_local == 0.1 && d.alpha_global == 0.1 && d.beta == 2.0, "q0, alphas, beta");
    const auto combos = GammaGrid{}.combinations();
    bool grid = combos.size() == 9;
    const double g0[] = {0.5, 1.0, 2.0};
    const double g1[] = {1.0 / 3.0, 1.0, 3.0};
    for (std::size_t n = 0; grid && n < 9; ++n)
        grid = combos[n].first == g0[n / 3] && std::abs(combos[n].second - g1[n % 3]) <= kFloatTol;
    expect(grid, "gamma grid");
    expect(run_grid(fct::make_scenario({2, 2}, {1}, fct::dense({{1}, {2}})), AcsParams{}, 1).size() == 9, "9 runs");

    std::string detail = failed.empty() ? "all constants exact" : "mismatch:";
    for (const auto& f : failed) detail += " " + f + ";";
    return {failed.empty(), detail};
}

// 5 ----------------------------------------------------------------------

Outcome aggregation_identities() {
    const auto loaded = fct::synthetic_instance(fct::small_spec(5));
    const auto& inst = loaded.instance;
    const auto base = baseline_taz_costs(inst, baseline_distance_matrix(loaded.graph, inst));
    Rng rng(55);
    double col_err = 0.0, row_excess = 0.0, identity_err = 0.0;
    std::vector<AggregateSolution> parts;
    for (int n = 0; n < 50; ++n) {
        const auto s = feasible_scenario(loaded, n, 7000);
        ParetoArchive archive(s.id);
        const int tries = 1 + static_cast<int>(rng.below(12));
        for (int t = 0; t < tries; ++t) archive.try_add(random_entry(s, rng));
        const auto g = aggregate_scenario(archive, s, inst, base);
        for (std::size_t j = 0; j < inst.num_tazs(); ++j) {
            double col = 0.0;
            for (std::size_t i = 0; i < inst.num_facilities(); ++i) col += g.expected_assignment(i, j);
            col_err = std::max(col_err, std::abs(col - inst.tazs[j].patient_count));
        }
        for (std::size_t i = 0; i < inst.num_facilities(); ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < inst.num_tazs(); ++j) row += g.expected_assignment(i, j);
            row_excess = std::max(row_excess, row - inst.facilities[i].capacity);
        }
        // one solution: the aggregate is that solution
        ParetoArchive single(s.id);
        single.try_add(archive.entries()[0]);
        const auto one = aggregate_scenario(single, s, inst, base);
        const auto full = merge_full(inst, s, archive.entries()[0]);
        for (std::size_t k = 0; k < full.assignment.data().size(); ++k)
            identity_err = std::max(identity_err, std::abs(one.expected_assignment.data()[k] - full.assignment.data()[k]));
        const std::vector<AggregateSolution> alone{g};
        const auto same = aggregate_all(alone);
        for (std::size_t k = 0; k < g.expected_assignment.data().size(); ++k)
            identity_err = std::max(identity_err, std::abs(same.expected_assignment.data()[k] - g.expected_assignment.data()[k]));
        for (std::size_t i = 0; i < inst.num_facilities(); ++i)
            identity_err = std::max(identity_err, std::abs(same.expected_served[i] - g.expected_served[i]));
        parts.push_back(g);
    }
    const auto all = aggregate_all(parts);
    for (std::size_t j = 0; j < inst.num_tazs(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < inst.num_facilities(); ++i) col += all.expected_assignment(i, j);
        col_err = std::max(col_err, std::abs(col - inst.tazs[j].patient_count));
    }
    const bool ok = col_err <= kAggregateTol && row_excess <= kAggregateTol && identity_err <= kAggregateTol;
    return {ok, fmt::format("50 random archives: max column error {:.2e}, max row excess {:.2e}, identity error {:.2e} "
                            "(tol {:.0e})",
                            col_err, std::max(row_excess, 0.0), identity_err, kAggregateTol)};
}

// 6 ----------------------------------------------------------------------

Outcome status_classification() {
    struct Row {
        double r;
        bool closed;
        FacilityStatus want;
    };
    const Row table[] = {
        {0.0, false, FacilityStatus::Stressed},      {0.05, false, FacilityStatus::Stressed},
        {0.0999999, false, FacilityStatus::Stressed}, {0.1, false, FacilityStatus::Ideal},
        {0.1000001, false, FacilityStatus::Ideal},   {0.3, false, FacilityStatus::Ideal},
        {0.4999999, false, FacilityStatus::Ideal},   {0.5, false, FacilityStatus::Ideal},
        {0.5000001, false, FacilityStatus::Underused}, {0.75, false, FacilityStatus::Underused},
        {1.0, false, FacilityStatus::Underused},     {0.0, true, FacilityStatus::Closed},
        {0.7, true, FacilityStatus::Closed},
    };
    int wrong = 0;
    for (const auto& row : table)
        if (facility_status(row.r, row.closed) != row.want) ++wrong;

    const auto loaded = fct::synthetic_instance(fct::small_spec(6));
    const auto& inst = loaded.instance;
    std::vector<int> preferred(inst.num_facilities(), 0);
    for (const auto& p : inst.patients) ++preferred[p.preferred_facility];
    Rng rng(66);
    int broken = 0;
    for (int n = 0; n < 50; ++n) {
        const auto s = feasible_scenario(loaded, n, 9000);
        const auto full = merge_full(inst, s, random_entry(s, rng));
        const auto moved = reassignment_matrix(full, inst);
        for (std::size_t x = 0; x < inst.num_facilities(); ++x) {
            int row = 0;
            for (std::size_t y = 0; y < inst.num_facilities(); ++y) row += moved(x, y);
            const int want = full.closed[x] ? preferred[x] : 0;
            if (row != want || moved(x, x) != 0) ++broken;
        }
    }
    return {wrong == 0 && broken == 0,
            fmt::format("{}/{} status rows wrong; {} reassignment rows not conserved over 50 solutions", wrong,
                        std::size(table), broken)};
}

// 7 ----------------------------------------------------------------------

double linear_r2(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
}

std::vector<std::string> files_under(const fs::path& root) {
    std::vector<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).string());
    std::sort(out.begin(), out.end());
    return out;
}

Outcome determinism_and_scaling() {
    std::vector<std::string> notes;
    bool ok = true;

    // byte-identical archives and reports
    {
        fct::TempDir tmp("accept_determinism");
        cmd_synth(fct::small_spec(7), tmp.path() / "inst");
        std::vector<fs::path> outs{tmp.path() / "first", tmp.path() / "second"};
        for (const auto& out : outs) {
            RunConfig c;
            c.instance = tmp.path() / "inst";
            c.out = out;
            c.scenario_count = 4;
            c.seed = 17;
            c.jobs = 1;
            cmd_generate(c);
            cmd_solve(c);
            cmd_report(c);
        }
        const auto a = files_under(outs[0]), b = files_under(outs[1]);
        int differing = a == b ? 0 : 1;
        for (std::size_t n = 0; differing == 0 && n < a.size(); ++n)
            if (read_file(outs[0] / a[n]) != read_file(outs[1] / a[n])) ++differing;
        ok = ok && differing == 0 && !a.empty();
        notes.push_back(fmt::format("rerun: {} files, {} differing", a.size(), differing));
    }

    // full-scale single scenario, nine runs
    Scenario large;
    {
        const auto t0 = Clock::now();
        SyntheticSpec spec;
        spec.name = "full-scale";
        spec.facilities = 95;
        spec.tazs = 1750;
        spec.patients = 18002;
        spec.facility_fp100 = 0.10;  // expected closure share 0.10 + 0.2 * 0.25 = 0.15
        spec.facility_fp500 = 0.25;
        spec.edge_fp100 = 0.05;
        spec.edge_fp500 = 0.10;
        spec.seed = 2;
        const auto loaded = fct::synthetic_instance(spec);
        large = feasible_scenario(loaded, 0, 31);
        const auto archive = run_scenario(large, AcsParams{}, large.rng_seed);
        const double t = seconds_since(t0);
        ok = ok && t < kFullScaleBudgetS && !archive.empty();
        notes.push_back(fmt::format("full scale: {} closed, n_o = {}, 9 runs, {} Pareto solutions, {:.1f} s",
                                    large.closed_facilities.size(), large.total_demand(), archive.size(), t));
    }

    // runtime against residual patient count, on the full-scale distance matrix
    {
        std::vector<double> xs, ys;
        Rng rng(71);
        std::vector<int> open;
        for (std::size_t i = 0; i < large.capacity.size(); ++i)
            if (large.capacity[i] > 0 || large.pre_assignment[i] > 0) open.push_back(static_cast<int>(i));
        for (int no : {500, 1000, 2000, 4000}) {
            Scenario s = large;
            s.capacity.assign(large.capacity.size(), 0);
            s.demand.assign(large.demand.size(), 0);
            s.displaced_patients.clear();
            for (int p = 0; p < no; ++p) ++s.demand[rng.below(s.demand.size())];
            for (int p = 0; p < no + no / 4; ++p) ++s.capacity[open[rng.below(open.size())]];
            std::vector<double> times;
            for (int rep = 0; rep < 3; ++rep) {
                const auto t0 = Clock::now();
                run_acs(s, AcsParams{}, 100 + rep);
                times.push_back(seconds_since(t0));
            }
            xs.push_back(no);
            ys.push_back(median(times));
        }
        const double r2 = linear_r2(xs, ys);
        ok = ok && r2 >= kLinearR2;
        notes.push_back(fmt::format("runtime at n_o 500/1000/2000/4000 = {:.2f}/{:.2f}/{:.2f}/{:.2f} s, linear R^2 {:.4f}",
                                    ys[0], ys[1], ys[2], ys[3], r2));
    }

    std::string detail;
    for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
    return {ok, detail};
}

// 8 ----------------------------------------------------------------------

Outcome heuristic_shape() {
    SyntheticSpec spec;
    spec.name = "mid";
    spec.facilities = 30;
    spec.tazs = 300;
    spec.patients = 3000;
    spec.facility_fp100 = 0.1;
    spec.facility_fp500 = 0.3;
    spec.edge_fp100 = 0.05;
    spec.edge_fp500 = 0.15;
    spec.seed = 8;
    const auto loaded = fct::synthetic_instance(spec);
    const auto s = feasible_scenario(loaded, 0, 88);
    std::vector<double> f0_low, f0_high, f1_low, f1_high;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto run = [&](double g0, double g1) {
            AcsParams p;
            p.gamma0 = g0;
            p.gamma1 = g1;
            return run_acs(s, p, seed);
        };
        f0_low.push_back(best_f0(run(0.5, 1.0)));
        f0_high.push_back(best_f0(run(2.0, 1.0)));
        f1_high.push_back(best_f1(run(1.0, 3.0)));
        f1_low.push_back(best_f1(run(1.0, 1.0 / 3.0)));
    }
    const double a = median(f0_low), b = median(f0_high), c = median(f1_high), d = median(f1_low);
    return {a <= b && c <= d,
            fmt::format("n_o = {}: median best f0 {:.1f} km (gamma0 1/2) vs {:.1f} km (gamma0 2); median best f1 {:.4f} "
                        "(gamma1 3) vs {:.4f} (gamma1 1/3)",
                        s.total_demand(), a / 1000, b / 1000, c, d)};
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::off);
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 feasibility suite", feasibility_suite},
        {"2 distance objective vs transportation oracle", distance_oracle},
        {"3 Pareto front vs brute force", pareto_oracle},
        {"4 model constants", model_constants},
        {"5 aggregation identities", aggregation_identities},
        {"6 status classification and reassignment conservation", status_classification},
        {"7 determinism and scaling", determinism_and_scaling},
        {"8 heuristic shape effects", heuristic_shape},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        if (!o.pass) ++failures;
        std::printf("%s [%s] %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
