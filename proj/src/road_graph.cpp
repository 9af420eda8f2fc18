#include "floodcare/road_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include <fmt/format.h>

namespace floodcare {

RoadGraph::RoadGraph(std::vector<Node> nodes, std::vector<EdgeRecord> edges) : nodes_(std::move(nodes)) {
    std::sort(nodes_.begin(), nodes_.end(), [](const Node& x, const Node& y) { return x.id < y.id; });
    index_.reserve(nodes_.size());
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        if (!index_.emplace(nodes_[n].id, static_cast<int>(n)).second)
            throw ConfigError(fmt::format("duplicate node id {}", nodes_[n].id));
    }

    std::sort(edges.begin(), edges.end(), [](const EdgeRecord& x, const EdgeRecord& y) { return x.id < y.id; });
    edges_.reserve(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& rec = edges[e];
        if (e > 0 && edges[e - 1].id == rec.id) throw ConfigError(fmt::format("duplicate edge id {}", rec.id));
        const int a = node_index(rec.node_a);
        const int b = node_index(rec.node_b);
        if (a < 0 || b < 0)
            throw ConfigError(fmt::format("edge {} references missing node {}", rec.id, a < 0 ? rec.node_a : rec.node_b));
        if (!(rec.length > 0.0) || !std::isfinite(rec.length))
            throw ConfigError(fmt::format("edge {} has non-positive length {}", rec.id, rec.length));
        edges_.push_back({rec.id, a, b, rec.length, rec.flood_class});
    }

    offsets_.assign(nodes_.size() + 1, 0);
    for (const auto& e : edges_) {
        ++offsets_[e.a + 1];
        ++offsets_[e.b + 1];
    }
    for (std::size_t n = 0; n < nodes_.size(); ++n) offsets_[n + 1] += offsets_[n];
    arcs_.resize(offsets_.back());
    std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        arcs_[fill[edges_[e].a]++] = {edges_[e].b, static_cast<int>(e)};
        arcs_[fill[edges_[e].b]++] = {edges_[e].a, static_cast<int>(e)};
    }
}

int RoadGraph::node_index(std::int64_t id) const {
    const auto it = index_.find(id);
    return it == index_.end() ? -1 : it->second;
}

int RoadGraph::nearest_node(double lon, double lat) const {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        const double d = haversine_m(lon, lat, nodes_[n].lon, nodes_[n].lat);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(n);
        }
    }
    return best;
}

std::vector<double> RoadGraph::shortest_paths(int source, std::span<const double> edge_costs) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(nodes_.size(), inf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (int a = offsets_[u]; a < offsets_[u + 1]; ++a) {
            const auto& arc = arcs_[a];
            const double nd = d + edge_costs[arc.edge];
            if (nd < dist[arc.to]) {
                dist[arc.to] = nd;
                heap.push({nd, arc.to});
            }
        }
    }
    return dist;
}

bool RoadGraph::connected(std::span<const int> node_indices) const {
    if (node_indices.empty()) return true;
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<int> stack{node_indices.front()};
    seen[node_indices.front()] = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int a = offsets_[u]; a < offsets_[u + 1]; ++a) {
            const int v = arcs_[a].to;
            if (!seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
        }
    }
    return std::all_of(node_indices.begin(), node_indices.end(), [&](int n) { return seen[n] != 0; });
}

std::vector<double> RoadGraph::base_lengths() const {
    std::vector<double> out(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) out[e] = edges_[e].length;
    return out;
}

double haversine_m(double lon1, double lat1, double lon2, double lat2) {
    constexpr double radius = 6371008.8;
    constexpr double rad = std::numbers::pi / 180.0;
    const double dlat = (lat2 - lat1) * rad;
    const double dlon = (lon2 - lon1) * rad;
    const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * radius * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace floodcare
