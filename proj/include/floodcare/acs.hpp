#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "floodcare/model.hpp"
#include "floodcare/pareto.hpp"
#include "floodcare/rng.hpp"

namespace floodcare {

struct AcsParams {
    int iterations = 30;
    int ants = 30;
    double q0 = 0.8;            // exploitation rate
    double alpha_local = 0.1;   // local pheromone decay
    double alpha_global = 0.1;  // global pheromone decay
    double beta = 2.0;          // heuristic importance
    double gamma0 = 1.0;        // distance heuristic shape
    double gamma1 = 1.0;        // capacity heuristic shape
    double min_heuristic = 0.02;
    int candidate_list = 0;     // nearest open facilities per TAZ, 0 = off

    void validate() const;
};

// Cartesian grid of (gamma0, gamma1) shapes, one ACS run per combination.
struct GammaGrid {
    std::vector<double> gamma0{0.5, 1.0, 2.0};
    std::vector<double> gamma1{1.0 / 3.0, 1.0, 3.0};

    // gamma0-major order.
    std::vector<std::pair<double, double>> combinations() const;

    // "3x3" (default grid), "1x1" (1, 1), "1x3", "3x1", or explicit lists
    // "0.5,1,2/0.333,1,3".
    static GammaGrid parse(const std::string& text);
};

// m^(d^gamma0) on normalized distance d in [0, 1].
double heuristic_distance(double d, double gamma0, double m = 0.02);
// r^gamma1 on relative unused capacity r in [0, 1].
double heuristic_capacity(double r, double gamma1);

// (n_a^2 * max D)^-1
double initial_pheromone(int ants, double max_distance);

// Pheromone per (facility, residual patient), stored patient-major.
class PheromoneTable {
public:
    PheromoneTable(std::size_t facilities, std::size_t patients, double initial);

    double operator()(std::size_t facility, std::size_t patient) const {
        return values_[patient * facilities_ + facility];
    }
    double initial() const noexcept { return initial_; }
    std::size_t facilities() const noexcept { return facilities_; }
    std::size_t patients() const noexcept { return patients_; }

    // p <- (1 - rate) p + rate * target
    void blend(std::size_t facility, std::size_t patient, double rate, double target) {
        auto& p = values_[patient * facilities_ + facility];
        p = (1.0 - rate) * p + rate * target;
    }

    void set(std::size_t facility, std::size_t patient, double value) {
        values_[patient * facilities_ + facility] = value;
    }

    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t facilities_;
    std::size_t patients_;
    double initial_;
    std::vector<double> values_;
};

void local_pheromone_update(PheromoneTable& table, int facility, int patient, const AcsParams& params);

// Deposits (f0)^-1 on every (facility, patient) pair used by each archive
// solution, entries applied in archive order.
void global_pheromone_update(PheromoneTable& table, const ParetoArchive& archive, const AcsParams& params);

// Normalized selection probabilities of the exploration branch.
std::vector<double> transition_probabilities(std::span<const double> weights);

// ACS state transition over candidate facilities (ascending) with weights
// p * h^beta: argmax (lowest index on ties) when q < q0, otherwise a
// weighted draw, uniform if every weight is zero.
int apply_transition_rule(std::span<const int> candidates, std::span<const double> weights, double q0, Rng& rng);

// Static data for one scenario under one parameter set.
class AcsContext {
public:
    AcsContext(const Scenario& scenario, const AcsParams& params);

    const Scenario& scenario() const noexcept { return *scenario_; }
    const AcsParams& params() const noexcept { return params_; }
    std::size_t num_patients() const noexcept { return patient_tazs_.size(); }
    std::span<const int> patient_tazs() const noexcept { return patient_tazs_; }
    double max_distance() const noexcept { return max_distance_; }
    double initial_pheromone() const noexcept { return initial_pheromone_; }

    // h0 for (facility, TAZ); precomputed.
    double distance_heuristic(int facility, int taz) const { return h0_(facility, taz); }
    // h0 * h1 for patient k given per-facility served counts of a partial solution.
    double combined_heuristic(int facility, int patient, std::span<const int> served) const;

    // Facilities admissible for patient k: candidate-list members with
    // spare capacity, or every facility with spare capacity when the list
    // is off or exhausted. Throws ConstructionFailure if none.
    std::vector<int> admissible(int patient, std::span<const int> served) const;

    int select_hospital(int patient, std::span<const int> served, const PheromoneTable& table, Rng& rng) const;

    double h0_pow(int facility, int taz) const { return h0_beta_(facility, taz); }
    double h1_pow(int facility, int served) const;
    std::span<const int> candidates(int taz) const;

private:
    const Scenario* scenario_;
    AcsParams params_;
    std::vector<int> patient_tazs_;
    double max_distance_ = 0.0;
    double initial_pheromone_ = 0.0;
    Matrix<double> h0_;
    Matrix<double> h0_beta_;
    Matrix<int> candidates_;  // TAZ x n_c, -1 padded
    std::vector<double> h1_beta_;      // h1^beta per (facility, served count)
    std::vector<std::size_t> h1_offset_;
};

// One ant: random patient order, transition rule per patient, local update
// after each assignment. Costs are filled in; provenance is not.
ArchiveEntry construct_solution(const AcsContext& context, PheromoneTable& table, Rng& rng);

ParetoArchive run_acs(const Scenario& scenario, const AcsParams& params, std::uint64_t seed, int run_index = 0);

// One run_acs per grid combination (seed + run index), merged.
ParetoArchive run_scenario(const Scenario& scenario, const AcsParams& base, std::uint64_t seed,
                           const GammaGrid& grid = {}, int jobs = 1);

// Per-run archives of run_scenario, in grid order.
std::vector<ParetoArchive> run_grid(const Scenario& scenario, const AcsParams& base, std::uint64_t seed,
                                    const GammaGrid& grid = {}, int jobs = 1);

}  // namespace floodcare
