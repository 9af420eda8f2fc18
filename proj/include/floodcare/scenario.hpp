#pragma once

#include <cstdint>
#include <vector>

#include "floodcare/model.hpp"
#include "floodcare/road_graph.hpp"

namespace floodcare {

// Cost multiplier applied to flooded road segments.
inline constexpr double kFloodedEdgeFactor = 10.0;
// Floor for facility-TAZ distances (co-located centroid and facility).
inline constexpr double kMinDistanceMeters = 1.0;
inline constexpr int kDefaultScenarioCount = 100;

double inundation_probability(FloodClass fc) noexcept;

struct ScenarioRealization {
    std::vector<int> flooded_edges;      // ascending edge indices
    std::vector<int> closed_facilities;  // ascending facility indices
    std::uint64_t rng_seed = 0;

    bool is_flooded(int edge) const;
    bool is_closed(int facility) const;
};

// One uniform draw per edge in index (= id) order, then one per facility in
// index (= id) order; an item is flooded when its draw falls below its
// inundation probability.
ScenarioRealization sample_scenario(const ProblemInstance& instance, const RoadGraph& graph, std::uint64_t seed);

double effective_edge_cost(const Edge& edge, bool flooded) noexcept;
double effective_edge_cost(const RoadGraph& graph, int edge, const ScenarioRealization& realization);

// Shortest-path facility x TAZ cost matrix under penalized edge costs, one
// Dijkstra per distinct TAZ node. Entries are floored at kMinDistanceMeters.
Matrix<double> distance_matrix(const RoadGraph& graph, const ScenarioRealization& realization,
                               const ProblemInstance& instance, int jobs = 1);

// Unpenalized matrix (no flooded edges).
Matrix<double> baseline_distance_matrix(const RoadGraph& graph, const ProblemInstance& instance, int jobs = 1);

int estimate_capacity(int weekly_visits);

// Pre-assigns every patient whose preferred facility is open and returns
// the residual scenario. Throws InfeasibleScenarioError when residual
// capacity cannot cover residual demand.
Scenario pre_assign(const ProblemInstance& instance, const ScenarioRealization& realization, Matrix<double> distance);

// sample_scenario + distance_matrix + pre_assign.
Scenario build_scenario(const ProblemInstance& instance, const RoadGraph& graph, int id, std::uint64_t seed,
                        int jobs = 1);

}  // namespace floodcare
