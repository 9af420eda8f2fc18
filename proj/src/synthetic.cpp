#include "floodcare/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "floodcare/rng.hpp"
#include "floodcare/scenario.hpp"

namespace floodcare {

namespace {

constexpr double kMetersPerDegLat = 110540.0;
constexpr double kMetersPerDegLonEquator = 111320.0;

struct Point {
    double x;
    double y;
};

// Rank items by distance to the nearest flood center; the closest share
// becomes FP100, the next share FP500.
std::vector<FloodClass> assign_flood_classes(const std::vector<Point>& items, const std::vector<Point>& centers,
                                             double fp100, double fp500) {
    const auto n = items.size();
    std::vector<double> score(n);
    for (std::size_t k = 0; k < n; ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) best = std::min(best, std::hypot(items[k].x - c.x, items[k].y - c.y));
        score[k] = best;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
    const auto n100 = static_cast<std::size_t>(std::llround(fp100 * static_cast<double>(n)));
    const auto n500 = std::min(n - std::min(n, n100), static_cast<std::size_t>(std::llround(fp500 * static_cast<double>(n))));
    std::vector<FloodClass> out(n, FloodClass::None);
    for (std::size_t r = 0; r < n; ++r) {
        if (r < n100)
            out[order[r]] = FloodClass::FP100;
        else if (r < n100 + n500)
            out[order[r]] = FloodClass::FP500;
    }
    return out;
}

bool is_share(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void SyntheticSpec::validate() const {
    if (facilities < 1 || tazs < 1) throw ConfigError("synthetic spec needs at least one facility and one TAZ");
    if (patients < std::max(facilities, tazs))
        throw ConfigError(fmt::format("synthetic spec needs at least {} patients so every facility and TAZ is used",
                                      std::max(facilities, tazs)));
    if (!is_share(facility_fp100) || !is_share(facility_fp500) || facility_fp100 + facility_fp500 > 1.0)
        throw ConfigError("facility floodplain shares must lie in [0, 1] and sum to at most 1");
    if (!is_share(edge_fp100) || !is_share(edge_fp500) || edge_fp100 + edge_fp500 > 1.0)
        throw ConfigError("edge floodplain shares must lie in [0, 1] and sum to at most 1");
    if (!(spacing_m > 0.0) || jitter < 0.0 || jitter >= 1.0) throw ConfigError("grid spacing must be positive, jitter in [0, 1)");
    if (!(distance_scale_m > 0.0)) throw ConfigError("distance_scale_m must be positive");
    if (flood_centers < 1) throw ConfigError("flood_centers must be at least 1");
    const int w = grid_width > 0 ? grid_width : 0;
    if (w > 0 && w * w < facilities + tazs) throw ConfigError("grid too small to place facilities and TAZs on distinct nodes");
}

InstanceBundle generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    const int placed = spec.facilities + spec.tazs;
    int width = spec.grid_width;
    if (width <= 0) width = std::max(2, static_cast<int>(std::ceil(std::sqrt(4.0 * placed))));
    const double lon_scale = kMetersPerDegLonEquator * std::cos(spec.origin_lat * M_PI / 180.0);

    InstanceBundle b;
    b.name = spec.name;
    std::vector<Point> node_xy;
    for (int r = 0; r < width; ++r) {
        for (int c = 0; c < width; ++c) {
            const double x = (c + spec.jitter * (rng.uniform01() - 0.5)) * spec.spacing_m;
            const double y = (r + spec.jitter * (rng.uniform01() - 0.5)) * spec.spacing_m;
            node_xy.push_back({x, y});
            b.nodes.push_back({static_cast<std::int64_t>(r * width + c + 1), spec.origin_lon + x / lon_scale,
                               spec.origin_lat + y / kMetersPerDegLat});
        }
    }

    std::vector<Point> edge_mid;
    auto add_edge = [&](int u, int v) {
        const auto& a = b.nodes[u];
        const auto& z = b.nodes[v];
        const double len = haversine_m(a.lon, a.lat, z.lon, z.lat) * (1.0 + 0.1 * rng.uniform01());
        b.edges.push_back({static_cast<std::int64_t>(b.edges.size() + 1), a.id, z.id, std::max(len, 1.0), FloodClass::None});
        edge_mid.push_back({(node_xy[u].x + node_xy[v].x) / 2, (node_xy[u].y + node_xy[v].y) / 2});
    };
    for (int r = 0; r < width; ++r) {
        for (int c = 0; c < width; ++c) {
            const int u = r * width + c;
            if (c + 1 < width) add_edge(u, u + 1);
            if (r + 1 < width) add_edge(u, u + width);
        }
    }

    const double extent = (width - 1) * spec.spacing_m;
    std::vector<Point> centers;
    for (int k = 0; k < spec.flood_centers; ++k) centers.push_back({rng.uniform01() * extent, rng.uniform01() * extent});
    const auto edge_classes = assign_flood_classes(edge_mid, centers, spec.edge_fp100, spec.edge_fp500);
    for (std::size_t e = 0; e < b.edges.size(); ++e) b.edges[e].flood_class = edge_classes[e];

    const auto slots = random_permutation(width * width, rng);
    std::vector<int> facility_node(slots.begin(), slots.begin() + spec.facilities);
    std::vector<int> taz_node(slots.begin() + spec.facilities, slots.begin() + placed);

    std::vector<Point> facility_xy;
    for (int n : facility_node) facility_xy.push_back(node_xy[n]);
    const auto facility_classes = assign_flood_classes(facility_xy, centers, spec.facility_fp100, spec.facility_fp500);

    const RoadGraph graph(b.nodes, b.edges);
    const auto lengths = graph.base_lengths();
    // dist[j][i]: unpenalized road distance from TAZ j to facility i.
    std::vector<std::vector<double>> dist(spec.tazs, std::vector<double>(spec.facilities));
    for (int j = 0; j < spec.tazs; ++j) {
        const auto d = graph.shortest_paths(graph.node_index(b.nodes[taz_node[j]].id), lengths);
        for (int i = 0; i < spec.facilities; ++i)
            dist[j][i] = std::max(kMinDistanceMeters, d[graph.node_index(b.nodes[facility_node[i]].id)]);
    }

    std::vector<int> patient_taz(spec.patients), patient_facility(spec.patients);
    std::vector<double> weight(spec.facilities);
    for (int p = 0; p < spec.patients; ++p) {
        const int j = p < spec.tazs ? p : static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.tazs)));
        double total = 0.0;
        for (int i = 0; i < spec.facilities; ++i) total += weight[i] = std::exp(-dist[j][i] / spec.distance_scale_m);
        int pick = spec.facilities - 1;
        if (total > 0.0) {
            double u = rng.uniform01() * total;
            for (int i = 0; i < spec.facilities; ++i) {
                if (u < weight[i]) {
                    pick = i;
                    break;
                }
                u -= weight[i];
            }
        } else {
            pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.facilities)));
        }
        patient_taz[p] = j;
        patient_facility[p] = pick;
    }

    // Every facility needs visits: hand each empty one its nearest patient
    // from a facility that can spare one.
    std::vector<int> visits(spec.facilities, 0);
    for (int f : patient_facility) ++visits[f];
    for (int i = 0; i < spec.facilities; ++i) {
        if (visits[i] > 0) continue;
        int best = -1;
        for (int p = 0; p < spec.patients; ++p) {
            if (visits[patient_facility[p]] < 2) continue;
            if (best < 0 || dist[patient_taz[p]][i] < dist[patient_taz[best]][i]) best = p;
        }
        --visits[patient_facility[best]];
        patient_facility[best] = i;
        ++visits[i];
    }

    long spare = 0, stranded = 0;
    for (int i = 0; i < spec.facilities; ++i) {
        if (facility_classes[i] == FloodClass::FP100)
            stranded += visits[i];
        else
            spare += estimate_capacity(visits[i]) - visits[i];
    }
    if (stranded > spare)
        throw ConfigError(fmt::format("synthetic spec cannot be feasible: {} patients of always-flooded facilities, "
                                      "{} spare places elsewhere",
                                      stranded, spare));

    const int fw = std::max(4, static_cast<int>(std::to_string(spec.facilities).size()));
    const int tw = std::max(4, static_cast<int>(std::to_string(spec.tazs).size()));
    const int pw = std::max(6, static_cast<int>(std::to_string(spec.patients).size()));
    std::vector<std::string> facility_ids, taz_ids;
    for (int i = 0; i < spec.facilities; ++i) {
        const auto& node = b.nodes[facility_node[i]];
        facility_ids.push_back(fmt::format("F{:0{}d}", i + 1, fw));
        b.facilities.push_back({facility_ids.back(), node.lon, node.lat, node.id, visits[i], facility_classes[i], 0});
    }
    for (int j = 0; j < spec.tazs; ++j) {
        const auto& node = b.nodes[taz_node[j]];
        taz_ids.push_back(fmt::format("T{:0{}d}", j + 1, tw));
        b.tazs.push_back({taz_ids.back(), node.lon, node.lat, node.id, 0});
    }
    for (int p = 0; p < spec.patients; ++p)
        b.patients.push_back({fmt::format("P{:0{}d}", p + 1, pw), taz_ids[patient_taz[p]],
                              facility_ids[patient_facility[p]], 0});
    return b;
}

}  // namespace floodcare
