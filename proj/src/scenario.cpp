#include "floodcare/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "floodcare/parallel.hpp"
#include "floodcare/rng.hpp"

namespace floodcare {

double inundation_probability(FloodClass fc) noexcept {
    switch (fc) {
        case FloodClass::FP100: return 1.0;
        case FloodClass::FP500: return 0.2;
        case FloodClass::None: return 0.0;
    }
    return 0.0;
}

bool ScenarioRealization::is_flooded(int edge) const {
    return std::binary_search(flooded_edges.begin(), flooded_edges.end(), edge);
}

bool ScenarioRealization::is_closed(int facility) const {
    return std::binary_search(closed_facilities.begin(), closed_facilities.end(), facility);
}

ScenarioRealization sample_scenario(const ProblemInstance& instance, const RoadGraph& graph, std::uint64_t seed) {
    ScenarioRealization out;
    out.rng_seed = seed;
    Rng rng(seed);
    const auto& edges = graph.edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
        if (rng.bernoulli(inundation_probability(edges[e].flood_class))) out.flooded_edges.push_back(static_cast<int>(e));
    for (std::size_t i = 0; i < instance.facilities.size(); ++i)
        if (rng.bernoulli(inundation_probability(instance.facilities[i].flood_class)))
            out.closed_facilities.push_back(static_cast<int>(i));
    return out;
}

double effective_edge_cost(const Edge& edge, bool flooded) noexcept {
    return flooded ? edge.length * kFloodedEdgeFactor : edge.length;
}

double effective_edge_cost(const RoadGraph& graph, int edge, const ScenarioRealization& realization) {
    return effective_edge_cost(graph.edges().at(static_cast<std::size_t>(edge)), realization.is_flooded(edge));
}

Matrix<double> distance_matrix(const RoadGraph& graph, const ScenarioRealization& realization,
                               const ProblemInstance& instance, int jobs) {
    std::vector<double> costs = graph.base_lengths();
    for (int e : realization.flooded_edges) costs[e] = effective_edge_cost(graph.edges()[e], true);

    std::vector<int> facility_nodes(instance.facilities.size());
    for (std::size_t i = 0; i < facility_nodes.size(); ++i) {
        facility_nodes[i] = graph.node_index(instance.facilities[i].node_id);
        if (facility_nodes[i] < 0)
            throw ConfigError(fmt::format("facility {} is not on the road graph", instance.facilities[i].id));
    }

    // Distinct TAZ nodes, each searched once.
    std::map<int, std::vector<int>> sources;
    for (std::size_t j = 0; j < instance.tazs.size(); ++j) {
        const int node = graph.node_index(instance.tazs[j].node_id);
        if (node < 0) throw ConfigError(fmt::format("TAZ {} is not on the road graph", instance.tazs[j].id));
        sources[node].push_back(static_cast<int>(j));
    }
    std::vector<std::pair<int, std::vector<int>>> work(sources.begin(), sources.end());

    Matrix<double> d(instance.facilities.size(), instance.tazs.size());
    parallel_for(work.size(), jobs, [&](std::size_t w) {
        const auto dist = graph.shortest_paths(work[w].first, costs);
        for (std::size_t i = 0; i < facility_nodes.size(); ++i) {
            const double v = dist[facility_nodes[i]];
            if (!std::isfinite(v))
                throw ConfigError(fmt::format("facility {} unreachable from TAZ {}", instance.facilities[i].id,
                                              instance.tazs[work[w].second.front()].id));
            for (int j : work[w].second) d(i, j) = std::max(v, kMinDistanceMeters);
        }
    });
    return d;
}

Matrix<double> baseline_distance_matrix(const RoadGraph& graph, const ProblemInstance& instance, int jobs) {
    return distance_matrix(graph, ScenarioRealization{}, instance, jobs);
}

int estimate_capacity(int weekly_visits) {
    if (weekly_visits < 1) throw ConfigError("capacity requires at least one weekly visit");
    return static_cast<int>((static_cast<long long>(weekly_visits) * 4) / 3);
}

Scenario pre_assign(const ProblemInstance& instance, const ScenarioRealization& realization, Matrix<double> distance) {
    const auto nh = instance.facilities.size();
    const auto nt = instance.tazs.size();
    if (!distance.same_shape(nh, nt)) throw ConfigError("distance matrix shape does not match instance");

    Scenario s;
    s.rng_seed = realization.rng_seed;
    s.closed_facilities = realization.closed_facilities;
    s.flooded_edges = realization.flooded_edges;
    s.distance = std::move(distance);
    s.pre_assignment.assign(nh, 0);
    s.demand.assign(nt, 0);

    std::vector<char> closed(nh, 0);
    for (int i : realization.closed_facilities) closed[i] = 1;

    std::vector<std::pair<int, int>> displaced;  // (taz, patient)
    for (std::size_t k = 0; k < instance.patients.size(); ++k) {
        const auto& p = instance.patients[k];
        if (closed[p.preferred_facility]) {
            ++s.demand[p.taz];
            displaced.emplace_back(p.taz, static_cast<int>(k));
        } else {
            ++s.pre_assignment[p.preferred_facility];
        }
    }
    std::sort(displaced.begin(), displaced.end());
    s.displaced_patients.reserve(displaced.size());
    for (const auto& [taz, patient] : displaced) s.displaced_patients.push_back(patient);

    s.capacity.assign(nh, 0);
    for (std::size_t i = 0; i < nh; ++i) {
        if (closed[i]) continue;
        s.capacity[i] = instance.facilities[i].capacity - s.pre_assignment[i];
        if (s.capacity[i] < 0)
            throw ConfigError(fmt::format("facility {} pre-assignment exceeds capacity", instance.facilities[i].id));
    }
    if (s.total_capacity() < s.total_demand()) throw InfeasibleScenarioError(s.total_capacity(), s.total_demand());
    return s;
}

Scenario build_scenario(const ProblemInstance& instance, const RoadGraph& graph, int id, std::uint64_t seed,
                        int jobs) {
    const auto realization = sample_scenario(instance, graph, seed);
    auto s = pre_assign(instance, realization, distance_matrix(graph, realization, instance, jobs));
    s.id = id;
    return s;
}

}  // namespace floodcare
