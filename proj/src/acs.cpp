#include "floodcare/acs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "floodcare/parallel.hpp"

namespace floodcare {

void AcsParams::validate() const {
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (ants < 1) throw ConfigError("ants must be >= 1");
    if (!(q0 >= 0.0 && q0 <= 1.0)) throw ConfigError("q0 must lie in [0, 1]");
    if (!(alpha_local > 0.0 && alpha_local < 1.0)) throw ConfigError("alpha_local must lie in (0, 1)");
    if (!(alpha_global > 0.0 && alpha_global < 1.0)) throw ConfigError("alpha_global must lie in (0, 1)");
    if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
    if (!(gamma0 > 0.0) || !(gamma1 > 0.0)) throw ConfigError("gamma values must be > 0");
    if (!(min_heuristic > 0.0 && min_heuristic < 1.0)) throw ConfigError("min_heuristic must lie in (0, 1)");
    if (candidate_list < 0) throw ConfigError("candidate_list must be >= 0");
}

std::vector<std::pair<double, double>> GammaGrid::combinations() const {
    std::vector<std::pair<double, double>> out;
    for (double g0 : gamma0)
        for (double g1 : gamma1) out.emplace_back(g0, g1);
    return out;
}

namespace {

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size() || !(v > 0.0)) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("bad gamma value '{}'", item));
        }
    }
    if (out.empty()) throw ConfigError("empty gamma list");
    return out;
}

}  // namespace

GammaGrid GammaGrid::parse(const std::string& text) {
    GammaGrid grid;
    const GammaGrid full;
    if (text.empty() || text == "3x3" || text == "default") return grid;
    if (text == "1x1") return GammaGrid{{1.0}, {1.0}};
    if (text == "1x3") return GammaGrid{{1.0}, full.gamma1};
    if (text == "3x1") return GammaGrid{full.gamma0, {1.0}};
    const auto slash = text.find('/');
    if (slash == std::string::npos) throw ConfigError(fmt::format("unrecognized gamma grid '{}'", text));
    grid.gamma0 = parse_list(text.substr(0, slash));
    grid.gamma1 = parse_list(text.substr(slash + 1));
    return grid;
}

double heuristic_distance(double d, double gamma0, double m) {
    if (!(d >= 0.0 && d <= 1.0)) throw ConfigError(fmt::format("normalized distance {} outside [0, 1]", d));
    return std::pow(m, std::pow(d, gamma0));
}

double heuristic_capacity(double r, double gamma1) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError(fmt::format("relative capacity {} outside [0, 1]", r));
    return std::pow(r, gamma1);
}

double initial_pheromone(int ants, double max_distance) {
    return 1.0 / (static_cast<double>(ants) * static_cast<double>(ants) * max_distance);
}

PheromoneTable::PheromoneTable(std::size_t facilities, std::size_t patients, double initial)
    : facilities_(facilities), patients_(patients), initial_(initial), values_(facilities * patients, initial) {
    if (!(initial > 0.0)) throw ConfigError("initial pheromone must be positive");
}

void local_pheromone_update(PheromoneTable& table, int facility, int patient, const AcsParams& params) {
    table.blend(facility, patient, params.alpha_local, table.initial());
}

void global_pheromone_update(PheromoneTable& table, const ParetoArchive& archive, const AcsParams& params) {
    for (const auto& entry : archive.entries()) {
        if (!(entry.costs.f0 > 0.0)) continue;
        const double deposit = 1.0 / entry.costs.f0;
        for (std::size_t k = 0; k < entry.trace.size(); ++k)
            table.blend(entry.trace[k], k, params.alpha_global, deposit);
    }
}

std::vector<double> transition_probabilities(std::span<const double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> out(weights.size());
    for (std::size_t n = 0; n < weights.size(); ++n)
        out[n] = total > 0.0 ? weights[n] / total : 1.0 / static_cast<double>(weights.size());
    return out;
}

int apply_transition_rule(std::span<const int> candidates, std::span<const double> weights, double q0, Rng& rng) {
    if (candidates.empty()) throw ConstructionFailure("no facility with remaining capacity");
    const double q = rng.uniform01();
    if (q < q0) {
        std::size_t best = 0;
        for (std::size_t n = 1; n < candidates.size(); ++n)
            if (weights[n] > weights[best]) best = n;
        return candidates[best];
    }
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) return candidates[rng.below(candidates.size())];
    const double target = rng.uniform01() * total;
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t n = 0; n < candidates.size(); ++n) {
        if (weights[n] <= 0.0) continue;
        cumulative += weights[n];
        last_positive = n;
        if (target < cumulative) return candidates[n];
    }
    return candidates[last_positive];
}

AcsContext::AcsContext(const Scenario& scenario, const AcsParams& params)
    : scenario_(&scenario), params_(params), patient_tazs_(scenario.residual_patient_tazs()) {
    params_.validate();
    const auto nh = scenario.num_facilities();
    const auto nt = scenario.num_tazs();
    if (!scenario.distance.same_shape(nh, nt)) throw ConfigError("distance matrix shape does not match scenario");
    for (double d : scenario.distance.data()) max_distance_ = std::max(max_distance_, d);
    if (!(max_distance_ > 0.0)) max_distance_ = 1.0;
    initial_pheromone_ = floodcare::initial_pheromone(params_.ants, max_distance_);

    h0_ = Matrix<double>(nh, nt);
    h0_beta_ = Matrix<double>(nh, nt);
    for (std::size_t i = 0; i < nh; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            const double h = heuristic_distance(scenario.distance(i, j) / max_distance_, params_.gamma0,
                                                params_.min_heuristic);
            h0_(i, j) = h;
            h0_beta_(i, j) = std::pow(h, params_.beta);
        }
    }

    // h1 depends only on the served count, so tabulate it per facility.
    h1_offset_.assign(nh + 1, 0);
    for (std::size_t i = 0; i < nh; ++i)
        h1_offset_[i + 1] = h1_offset_[i] + static_cast<std::size_t>(std::max(scenario.capacity[i], 0));
    h1_beta_.resize(h1_offset_[nh]);
    for (std::size_t i = 0; i < nh; ++i) {
        const int c = scenario.capacity[i];
        for (int u = 0; u < c; ++u) {
            const double r = static_cast<double>(c - u) / c;
            h1_beta_[h1_offset_[i] + u] = std::pow(heuristic_capacity(r, params_.gamma1), params_.beta);
        }
    }

    if (params_.candidate_list > 0) {
        std::vector<int> open;
        for (std::size_t i = 0; i < nh; ++i)
            if (scenario.capacity[i] > 0) open.push_back(static_cast<int>(i));
        const auto width = static_cast<std::size_t>(params_.candidate_list);
        candidates_ = Matrix<int>(nt, width, -1);
        for (std::size_t j = 0; j < nt; ++j) {
            auto order = open;
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return scenario.distance(a, j) < scenario.distance(b, j);
            });
            for (std::size_t n = 0; n < std::min(width, order.size()); ++n) candidates_(j, n) = order[n];
        }
    }
}

double AcsContext::h1_pow(int facility, int served) const {
    const int c = scenario_->capacity[facility];
    if (c <= 0 || served >= c) return 0.0;
    return h1_beta_[h1_offset_[facility] + static_cast<std::size_t>(std::max(served, 0))];
}

double AcsContext::combined_heuristic(int facility, int patient, std::span<const int> served) const {
    const int c = scenario_->capacity[facility];
    const double r = c > 0 ? static_cast<double>(c - served[facility]) / c : 0.0;
    return h0_(facility, patient_tazs_[patient]) * heuristic_capacity(std::clamp(r, 0.0, 1.0), params_.gamma1);
}

std::span<const int> AcsContext::candidates(int taz) const {
    if (params_.candidate_list <= 0) return {};
    auto row = candidates_.row(static_cast<std::size_t>(taz));
    const auto filled = std::find(row.begin(), row.end(), -1) - row.begin();
    return row.first(static_cast<std::size_t>(filled));
}

std::vector<int> AcsContext::admissible(int patient, std::span<const int> served) const {
    std::vector<int> out;
    const auto& c = scenario_->capacity;
    for (int i : candidates(patient_tazs_[patient]))
        if (c[i] - served[i] > 0) out.push_back(i);
    std::sort(out.begin(), out.end());
    if (out.empty()) {
        for (std::size_t i = 0; i < c.size(); ++i)
            if (c[i] - served[i] > 0) out.push_back(static_cast<int>(i));
    }
    if (out.empty()) throw ConstructionFailure(fmt::format("no facility with spare capacity for patient {}", patient));
    return out;
}

int AcsContext::select_hospital(int patient, std::span<const int> served, const PheromoneTable& table,
                                Rng& rng) const {
    const auto mu = admissible(patient, served);
    const int taz = patient_tazs_[patient];
    std::vector<double> weights(mu.size());
    for (std::size_t n = 0; n < mu.size(); ++n)
        weights[n] = table(mu[n], patient) * h0_beta_(mu[n], taz) * h1_pow(mu[n], served[mu[n]]);
    return apply_transition_rule(mu, weights, params_.q0, rng);
}

ArchiveEntry construct_solution(const AcsContext& context, PheromoneTable& table, Rng& rng) {
    const auto& s = context.scenario();
    const auto& params = context.params();
    const auto nh = s.num_facilities();
    const auto no = context.num_patients();
    const auto tazs = context.patient_tazs();

    std::vector<int> served(nh, 0);
    std::vector<double> h1(nh, 0.0);
    std::vector<int> open;  // facilities with spare capacity, ascending
    for (std::size_t i = 0; i < nh; ++i) {
        if (s.capacity[i] > 0) {
            open.push_back(static_cast<int>(i));
            h1[i] = context.h1_pow(static_cast<int>(i), 0);
        }
    }

    ArchiveEntry entry;
    entry.trace.assign(no, -1);
    std::vector<int> mu;
    std::vector<double> weights;
    mu.reserve(nh);
    weights.reserve(nh);

    for (int k : random_permutation(static_cast<int>(no), rng)) {
        const int j = tazs[k];
        mu.clear();
        if (params.candidate_list > 0) {
            for (int i : context.candidates(j))
                if (served[i] < s.capacity[i]) mu.push_back(i);
            std::sort(mu.begin(), mu.end());
        }
        if (mu.empty()) mu = open;
        weights.resize(mu.size());
        for (std::size_t n = 0; n < mu.size(); ++n) weights[n] = table(mu[n], k) * context.h0_pow(mu[n], j) * h1[mu[n]];

        const int i = apply_transition_rule(mu, weights, params.q0, rng);
        entry.trace[k] = i;
        ++served[i];
        if (served[i] >= s.capacity[i]) {
            open.erase(std::lower_bound(open.begin(), open.end(), i));
            h1[i] = 0.0;
        } else {
            h1[i] = context.h1_pow(i, served[i]);
        }
        local_pheromone_update(table, i, k, params);
    }

    entry.assignment = cells_from_trace(entry.trace, tazs);
    entry.costs.f0 = objective_distance(entry.assignment, s.distance);
    entry.costs.f1 = load_balance_or_zero(served, s.capacity);
    return entry;
}

ParetoArchive run_acs(const Scenario& scenario, const AcsParams& params, std::uint64_t seed, int run_index) {
    params.validate();
    if (scenario.total_capacity() < scenario.total_demand())
        throw InfeasibleScenarioError(scenario.total_capacity(), scenario.total_demand());

    const AcsContext context(scenario, params);
    ParetoArchive archive(scenario.id);

    if (context.num_patients() == 0) {
        ArchiveEntry empty;
        const std::vector<int> served(scenario.num_facilities(), 0);
        empty.costs = {0.0, load_balance_or_zero(served, scenario.capacity)};
        empty.provenance = {run_index, 0, 0};
        archive.try_add(std::move(empty));
        return archive;
    }

    PheromoneTable table(scenario.num_facilities(), context.num_patients(), context.initial_pheromone());
    Rng rng(seed);
    for (int t = 0; t < params.iterations; ++t) {
        for (int a = 0; a < params.ants; ++a) {
            auto entry = construct_solution(context, table, rng);
            entry.provenance = {run_index, t, a};
            archive.try_add(std::move(entry));
        }
        global_pheromone_update(table, archive, params);
    }
    return archive;
}

std::vector<ParetoArchive> run_grid(const Scenario& scenario, const AcsParams& base, std::uint64_t seed,
                                    const GammaGrid& grid, int jobs) {
    const auto combos = grid.combinations();
    std::vector<ParetoArchive> runs(combos.size(), ParetoArchive(scenario.id));
    parallel_for(combos.size(), jobs, [&](std::size_t r) {
        AcsParams p = base;
        p.gamma0 = combos[r].first;
        p.gamma1 = combos[r].second;
        runs[r] = run_acs(scenario, p, seed + r, static_cast<int>(r));
    });
    return runs;
}

ParetoArchive run_scenario(const Scenario& scenario, const AcsParams& base, std::uint64_t seed, const GammaGrid& grid,
                           int jobs) {
    const auto runs = run_grid(scenario, base, seed, grid, jobs);
    return merge_pareto(runs);
}

}  // namespace floodcare
