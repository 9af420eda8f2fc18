#pragma once

#include <cstdint>
#include <string>

#include "floodcare/io.hpp"

namespace floodcare {

// Jittered grid road network with facilities and TAZs on distinct nodes.
struct SyntheticSpec {
    std::string name = "synthetic";
    int facilities = 10;
    int tazs = 50;
    int patients = 500;
    int grid_width = 0;          // 0: ceil(sqrt(4 * (facilities + tazs)))
    double spacing_m = 1000.0;
    double jitter = 0.3;         // node offset as a fraction of spacing
    // Share of facilities / edges in each floodplain; placed around a few
    // random flood centers so that flooding is spatially clustered.
    double facility_fp100 = 0.0;
    double facility_fp500 = 0.0;
    double edge_fp100 = 0.0;
    double edge_fp500 = 0.0;
    int flood_centers = 3;
    double distance_scale_m = 5000.0;  // preference weight exp(-d / scale)
    std::uint64_t seed = 1;
    double origin_lon = -95.37;
    double origin_lat = 29.76;

    void validate() const;
};

// Throws ConfigError for a spec that cannot yield a feasible instance
// (fewer patients than facilities or TAZs, or always-closed demand that the
// remaining facilities cannot absorb).
InstanceBundle generate_synthetic(const SyntheticSpec& spec);

}  // namespace floodcare
