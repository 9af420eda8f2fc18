#include "floodcare/pareto.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace floodcare {

AssignmentMatrix ArchiveEntry::matrix(std::size_t facilities, std::size_t tazs) const {
    AssignmentMatrix a(facilities, tazs, 0);
    for (const auto& c : assignment) a(c.facility, c.taz) += c.count;
    return a;
}

std::vector<Cell> to_cells(const AssignmentMatrix& assignment) {
    std::vector<Cell> out;
    for (std::size_t i = 0; i < assignment.rows(); ++i)
        for (std::size_t j = 0; j < assignment.cols(); ++j)
            if (assignment(i, j) != 0) out.push_back({static_cast<int>(i), static_cast<int>(j), assignment(i, j)});
    return out;
}

std::vector<Cell> cells_from_trace(std::span<const int> trace, std::span<const int> patient_tazs) {
    if (trace.size() != patient_tazs.size()) throw ConfigError("trace length does not match residual patients");
    const bool grouped = std::is_sorted(patient_tazs.begin(), patient_tazs.end()) &&
                         std::all_of(trace.begin(), trace.end(), [](int i) { return i >= 0; });
    if (grouped && !trace.empty()) {
        // Residual patients come TAZ by TAZ: count per block, then a stable
        // bucket pass by facility keeps (facility, taz) order without sorting.
        const auto nh = static_cast<std::size_t>(*std::max_element(trace.begin(), trace.end())) + 1;
        std::vector<int> count(nh, 0);
        std::vector<int> touched;
        std::vector<Cell> by_taz;
        for (std::size_t k = 0; k < trace.size();) {
            const int j = patient_tazs[k];
            for (; k < trace.size() && patient_tazs[k] == j; ++k)
                if (count[trace[k]]++ == 0) touched.push_back(trace[k]);
            for (int i : touched) {
                by_taz.push_back({i, j, count[i]});
                count[i] = 0;
            }
            touched.clear();
        }
        std::vector<std::size_t> start(nh + 1, 0);
        for (const auto& c : by_taz) ++start[c.facility + 1];
        for (std::size_t i = 0; i < nh; ++i) start[i + 1] += start[i];
        std::vector<Cell> out(by_taz.size());
        for (const auto& c : by_taz) out[start[c.facility]++] = c;
        return out;
    }
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k) pairs.emplace_back(trace[k], patient_tazs[k]);
    std::sort(pairs.begin(), pairs.end());
    std::vector<Cell> out;
    for (const auto& [i, j] : pairs) {
        if (!out.empty() && out.back().facility == i && out.back().taz == j)
            ++out.back().count;
        else
            out.push_back({i, j, 1});
    }
    return out;
}

double objective_distance(std::span<const Cell> cells, const Matrix<double>& distance) {
    CompensatedSum total;
    for (const auto& c : cells) {
        if (c.facility < 0 || static_cast<std::size_t>(c.facility) >= distance.rows() || c.taz < 0 ||
            static_cast<std::size_t>(c.taz) >= distance.cols())
            throw ConfigError(fmt::format("cell ({}, {}) outside distance matrix", c.facility, c.taz));
        if (c.count != 0) total.add(c.count * distance(c.facility, c.taz));
    }
    return total.value();
}

bool ParetoArchive::would_accept(const ObjectiveCosts& costs) const {
    return std::none_of(entries_.begin(), entries_.end(), [&](const ArchiveEntry& e) {
        return e.costs == costs || dominates(e.costs, costs);
    });
}

bool ParetoArchive::try_add(ArchiveEntry entry) {
    if (!would_accept(entry.costs)) return false;
    std::erase_if(entries_, [&](const ArchiveEntry& e) { return dominates(entry.costs, e.costs); });
    entries_.push_back(std::move(entry));
    return true;
}

ParetoArchive merge_pareto(std::span<const ParetoArchive> archives) {
    if (archives.empty()) return ParetoArchive{};
    const int id = archives.front().scenario_id();
    ParetoArchive merged(id);
    for (const auto& archive : archives) {
        if (archive.scenario_id() != id)
            throw ConfigError(fmt::format("cannot merge archives of scenarios {} and {}", id, archive.scenario_id()));
        for (const auto& e : archive.entries()) merged.try_add(e);
    }
    return merged;
}

}  // namespace floodcare
