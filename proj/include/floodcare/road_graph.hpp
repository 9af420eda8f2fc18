#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "floodcare/model.hpp"

namespace floodcare {

struct Node {
    std::int64_t id = 0;
    double lon = 0.0;
    double lat = 0.0;
};

// Undirected road segment between node indices a and b.
struct Edge {
    std::int64_t id = 0;
    int a = -1;
    int b = -1;
    double length = 0.0;  // meters
    FloodClass flood_class = FloodClass::None;
};

// Edge as read from input, endpoints given by node id.
struct EdgeRecord {
    std::int64_t id = 0;
    std::int64_t node_a = 0;
    std::int64_t node_b = 0;
    double length = 0.0;
    FloodClass flood_class = FloodClass::None;
};

class RoadGraph {
public:
    RoadGraph() = default;
    // Nodes and edges are sorted by id. Throws ConfigError on duplicate
    // ids, dangling endpoints or non-positive lengths.
    RoadGraph(std::vector<Node> nodes, std::vector<EdgeRecord> edges);

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_edges() const noexcept { return edges_.size(); }

    // -1 when the id is unknown.
    int node_index(std::int64_t id) const;
    int nearest_node(double lon, double lat) const;

    // Single-source shortest path costs to every node under the given
    // per-edge costs (infinity where unreachable).
    std::vector<double> shortest_paths(int source, std::span<const double> edge_costs) const;

    // True when every listed node lies in one connected component.
    bool connected(std::span<const int> node_indices) const;

    std::vector<double> base_lengths() const;

private:
    struct Arc {
        int to;
        int edge;
    };

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::unordered_map<std::int64_t, int> index_;
    std::vector<int> offsets_;
    std::vector<Arc> arcs_;
};

// Great-circle distance in meters.
double haversine_m(double lon1, double lat1, double lon2, double lat2);

}  // namespace floodcare
