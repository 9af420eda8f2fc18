#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace floodcare {

// Error kinds shared by every module. The CLI maps each to a stable
// "kind" string in its machine-readable error output.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "config"; }
};

class DegenerateScenarioError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "degenerate_scenario"; }
};

class InfeasibleScenarioError : public Error {
public:
    InfeasibleScenarioError(long long capacity, long long demand);
    const char* kind() const noexcept override { return "infeasible_scenario"; }
    long long shortfall() const noexcept { return demand_ - capacity_; }

private:
    long long capacity_;
    long long demand_;
};

class ConstructionFailure : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "construction_failure"; }
};

enum class FloodClass { None, FP500, FP100 };

const char* to_string(FloodClass fc);
FloodClass parse_flood_class(const std::string& text);

// Row-major dense matrix.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<T>& data() noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    bool same_shape(std::size_t rows, std::size_t cols) const noexcept {
        return rows_ == rows && cols_ == cols;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

struct Facility {
    std::string id;
    std::int64_t node_id = -1;
    double lon = 0.0;
    double lat = 0.0;
    int weekly_visits = 0;
    int capacity = 0;
    FloodClass flood_class = FloodClass::None;
};

struct Taz {
    std::string id;
    std::int64_t node_id = -1;
    double lon = 0.0;
    double lat = 0.0;
    int patient_count = 0;
};

// Facility and TAZ references are indices into ProblemInstance vectors.
struct Patient {
    std::string id;
    int taz = -1;
    int preferred_facility = -1;
};

struct ProblemInstance {
    std::vector<Facility> facilities;
    std::vector<Taz> tazs;
    std::vector<Patient> patients;
    std::string graph_ref;

    std::size_t num_facilities() const noexcept { return facilities.size(); }
    std::size_t num_tazs() const noexcept { return tazs.size(); }

    // Throws ConfigError naming the first broken invariant.
    void validate() const;
};

// One Monte Carlo realization reduced to the residual problem {c, o, D}
// after pre-assignment. Facility/TAZ axes follow the instance order.
struct Scenario {
    int id = -1;
    std::uint64_t rng_seed = 0;
    std::vector<int> closed_facilities;   // ascending facility indices
    std::vector<int> flooded_edges;       // ascending edge indices
    std::vector<int> capacity;            // residual c
    std::vector<int> demand;              // residual o
    Matrix<double> distance;              // D, meters
    std::vector<int> pre_assignment;      // per facility
    // Instance patient indices of the residual patients, ordered TAZ by TAZ
    // (k-th residual patient belongs to the TAZ obtained by expanding o).
    // Empty for hand-built scenarios.
    std::vector<int> displaced_patients;

    std::size_t num_facilities() const noexcept { return capacity.size(); }
    std::size_t num_tazs() const noexcept { return demand.size(); }
    long long total_capacity() const;
    long long total_demand() const;

    // TAZ index of every residual patient, in residual order.
    std::vector<int> residual_patient_tazs() const;

    // Shape and sign checks; throws ConfigError.
    void validate() const;
};

using AssignmentMatrix = Matrix<int>;

struct ObjectiveCosts {
    double f0 = 0.0;  // meters
    double f1 = 0.0;

    friend bool operator==(const ObjectiveCosts&, const ObjectiveCosts&) = default;
};

// Neumaier-compensated accumulator; summation order is the caller's.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

double objective_distance(const AssignmentMatrix& assignment, const Matrix<double>& distance);

double objective_load_balance(std::span<const int> served, std::span<const int> capacity);
double objective_load_balance(const AssignmentMatrix& assignment, std::span<const int> capacity);

// Same as objective_load_balance, but scenarios with fewer than two
// facilities of positive capacity score 0 instead of throwing.
double load_balance_or_zero(std::span<const int> served, std::span<const int> capacity);

std::vector<int> served_counts(const AssignmentMatrix& assignment);

struct Violation {
    enum class Kind { Capacity, Demand, Negative, Shape };
    Kind kind;
    int index;       // facility for Capacity, TAZ for Demand
    long long magnitude;
    std::string describe() const;
};

std::vector<Violation> check_feasible(const AssignmentMatrix& assignment, const Scenario& scenario);

bool dominates(const ObjectiveCosts& a, const ObjectiveCosts& b) noexcept;

}  // namespace floodcare
