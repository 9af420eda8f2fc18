#pragma once

#include <span>
#include <vector>

#include "floodcare/model.hpp"

namespace floodcare {

struct Provenance {
    int run = 0;
    int iteration = 0;
    int ant = 0;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

// Nonzero entry of an assignment matrix.
struct Cell {
    int facility = 0;
    int taz = 0;
    int count = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
};

struct ArchiveEntry {
    std::vector<Cell> assignment;  // sorted by (facility, taz)
    std::vector<int> trace;        // facility of each residual patient
    ObjectiveCosts costs;
    Provenance provenance;

    AssignmentMatrix matrix(std::size_t facilities, std::size_t tazs) const;
};

std::vector<Cell> to_cells(const AssignmentMatrix& assignment);
std::vector<Cell> cells_from_trace(std::span<const int> trace, std::span<const int> patient_tazs);

// Same value as objective_distance on the dense matrix.
double objective_distance(std::span<const Cell> cells, const Matrix<double>& distance);

// Mutually non-dominated solutions in insertion order.
class ParetoArchive {
public:
    explicit ParetoArchive(int scenario_id = -1) : scenario_id_(scenario_id) {}

    // Rejects entries that are dominated by, or tie the costs of, an
    // existing entry; otherwise evicts what the newcomer dominates.
    bool try_add(ArchiveEntry entry);
    bool would_accept(const ObjectiveCosts& costs) const;

    const std::vector<ArchiveEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    int scenario_id() const noexcept { return scenario_id_; }

private:
    int scenario_id_;
    std::vector<ArchiveEntry> entries_;
};

// Union of the archives with dominated entries removed. All archives must
// carry the same scenario id.
ParetoArchive merge_pareto(std::span<const ParetoArchive> archives);

}  // namespace floodcare
