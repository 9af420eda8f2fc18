#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "floodcare/io.hpp"
#include "floodcare/model.hpp"
#include "floodcare/rng.hpp"
#include "floodcare/scenario.hpp"
#include "floodcare/synthetic.hpp"

namespace fct {

using namespace floodcare;

inline Matrix<double> dense(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix<double> m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& r : rows) {
        std::size_t j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

inline AssignmentMatrix dense_int(std::initializer_list<std::initializer_list<int>> rows) {
    AssignmentMatrix m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& r : rows) {
        std::size_t j = 0;
        for (int v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

inline Scenario make_scenario(std::vector<int> c, std::vector<int> o, Matrix<double> d, int id = 0) {
    Scenario s;
    s.id = id;
    s.pre_assignment.assign(c.size(), 0);
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] == 0) s.closed_facilities.push_back(static_cast<int>(i));
    s.capacity = std::move(c);
    s.demand = std::move(o);
    s.distance = std::move(d);
    return s;
}

// Random residual problem with the given open facility count, TAZ count and
// patient total; capacities leave `slack` spare places overall.
inline Scenario random_residual(std::uint64_t seed, int open, int closed, int tazs, int patients, int slack) {
    Rng rng(seed);
    const int nh = open + closed;
    std::vector<int> c(nh, 0), o(tazs, 0);
    for (int p = 0; p < patients; ++p) ++o[rng.below(tazs)];
    for (int p = 0; p < patients + slack; ++p) ++c[rng.below(open)];
    // closed facilities sit at random positions
    std::vector<int> cap(nh, 0);
    const auto perm = random_permutation(nh, rng);
    for (int n = 0; n < open; ++n) cap[perm[n]] = c[n];
    Matrix<double> d(nh, tazs);
    for (auto& v : d.data()) v = 100.0 + std::floor(rng.uniform01() * 9900.0);
    return make_scenario(cap, o, d);
}

inline SyntheticSpec small_spec(std::uint64_t seed = 1) {
    SyntheticSpec s;
    s.facilities = 10;
    s.tazs = 50;
    s.patients = 500;
    s.facility_fp100 = 0.1;
    s.facility_fp500 = 0.3;
    s.edge_fp100 = 0.05;
    s.edge_fp500 = 0.15;
    s.seed = seed;
    return s;
}

inline LoadedInstance synthetic_instance(const SyntheticSpec& spec) { return build_instance(generate_synthetic(spec)); }

}  // namespace fct
