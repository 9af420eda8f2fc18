#include "floodcare/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace floodcare {

InfeasibleScenarioError::InfeasibleScenarioError(long long capacity, long long demand)
    : Error(fmt::format("infeasible scenario: residual capacity {} < residual demand {} (shortfall {})",
                        capacity, demand, demand - capacity)),
      capacity_(capacity),
      demand_(demand) {}

const char* to_string(FloodClass fc) {
    switch (fc) {
        case FloodClass::None: return "none";
        case FloodClass::FP500: return "fp500";
        case FloodClass::FP100: return "fp100";
    }
    return "none";
}

FloodClass parse_flood_class(const std::string& text) {
    std::string lower;
    for (char ch : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (lower.empty() || lower == "none" || lower == "0") return FloodClass::None;
    if (lower == "fp500" || lower == "500") return FloodClass::FP500;
    if (lower == "fp100" || lower == "100") return FloodClass::FP100;
    throw ConfigError(fmt::format("unknown flood class '{}'", text));
}

void ProblemInstance::validate() const {
    for (const auto& f : facilities) {
        if (f.weekly_visits < 1)
            throw ConfigError(fmt::format("facility {} has no weekly visits", f.id));
        if (f.capacity < f.weekly_visits || f.capacity < 1)
            throw ConfigError(fmt::format("facility {} capacity {} below visits {}", f.id, f.capacity,
                                          f.weekly_visits));
    }
    std::vector<int> per_taz(tazs.size(), 0);
    std::vector<int> per_facility(facilities.size(), 0);
    for (const auto& p : patients) {
        if (p.taz < 0 || static_cast<std::size_t>(p.taz) >= tazs.size())
            throw ConfigError(fmt::format("patient {} references a missing TAZ", p.id));
        if (p.preferred_facility < 0 || static_cast<std::size_t>(p.preferred_facility) >= facilities.size())
            throw ConfigError(fmt::format("patient {} references a missing facility", p.id));
        ++per_taz[p.taz];
        ++per_facility[p.preferred_facility];
    }
    for (std::size_t j = 0; j < tazs.size(); ++j) {
        if (tazs[j].patient_count != per_taz[j])
            throw ConfigError(fmt::format("TAZ {} patient_count {} but {} patients reference it", tazs[j].id,
                                          tazs[j].patient_count, per_taz[j]));
        if (per_taz[j] == 0) throw ConfigError(fmt::format("TAZ {} has no patients", tazs[j].id));
    }
    for (std::size_t i = 0; i < facilities.size(); ++i) {
        if (facilities[i].weekly_visits != per_facility[i])
            throw ConfigError(fmt::format("facility {} weekly_visits {} but {} patients prefer it",
                                          facilities[i].id, facilities[i].weekly_visits, per_facility[i]));
    }
}

long long Scenario::total_capacity() const {
    return std::accumulate(capacity.begin(), capacity.end(), 0LL);
}

long long Scenario::total_demand() const {
    return std::accumulate(demand.begin(), demand.end(), 0LL);
}

std::vector<int> Scenario::residual_patient_tazs() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(total_demand()));
    for (std::size_t j = 0; j < demand.size(); ++j)
        out.insert(out.end(), static_cast<std::size_t>(demand[j]), static_cast<int>(j));
    return out;
}

void Scenario::validate() const {
    const auto nh = capacity.size();
    const auto nt = demand.size();
    if (!distance.same_shape(nh, nt))
        throw ConfigError(fmt::format("distance matrix is {}x{}, expected {}x{}", distance.rows(),
                                      distance.cols(), nh, nt));
    for (int c : capacity)
        if (c < 0) throw ConfigError("negative residual capacity");
    for (int o : demand)
        if (o < 0) throw ConfigError("negative residual demand");
    for (double d : distance.data())
        if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("distance entries must be positive and finite");
    for (int i : closed_facilities) {
        if (i < 0 || static_cast<std::size_t>(i) >= nh) throw ConfigError("closed facility index out of range");
        if (capacity[i] != 0) throw ConfigError("closed facility has nonzero residual capacity");
    }
    if (!pre_assignment.empty() && pre_assignment.size() != nh)
        throw ConfigError("pre_assignment length does not match facility count");
    if (!displaced_patients.empty() && static_cast<long long>(displaced_patients.size()) != total_demand())
        throw ConfigError("displaced patient list does not match residual demand");
}

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
        compensation_ += (sum_ - t) + x;
    else
        compensation_ += (x - t) + sum_;
    sum_ = t;
}

double objective_distance(const AssignmentMatrix& assignment, const Matrix<double>& distance) {
    if (!distance.same_shape(assignment.rows(), assignment.cols()))
        throw ConfigError(fmt::format("assignment is {}x{} but distance matrix is {}x{}", assignment.rows(),
                                      assignment.cols(), distance.rows(), distance.cols()));
    CompensatedSum total;
    const auto& a = assignment.data();
    const auto& d = distance.data();
    for (std::size_t n = 0; n < a.size(); ++n)
        if (a[n] != 0) total.add(a[n] * d[n]);
    return total.value();
}

namespace {

// Returns the corrected sample standard deviation of the relative unused
// capacity over facilities with positive capacity, or a negative value when
// fewer than two such facilities exist.
double spread_of_unused(std::span<const int> served, std::span<const int> capacity) {
    if (served.size() != capacity.size())
        throw ConfigError(fmt::format("served vector has {} entries, capacity has {}", served.size(),
                                      capacity.size()));
    std::vector<double> r;
    r.reserve(capacity.size());
    for (std::size_t i = 0; i < capacity.size(); ++i) {
        if (capacity[i] <= 0) continue;
        r.push_back(static_cast<double>(capacity[i] - served[i]) / capacity[i]);
    }
    if (r.size() < 2) return -1.0;
    CompensatedSum sum;
    for (double x : r) sum.add(x);
    const double mean = sum.value() / static_cast<double>(r.size());
    CompensatedSum sq;
    for (double x : r) sq.add((x - mean) * (x - mean));
    return std::sqrt(sq.value() / static_cast<double>(r.size() - 1));
}

}  // namespace

double objective_load_balance(std::span<const int> served, std::span<const int> capacity) {
    const double s = spread_of_unused(served, capacity);
    if (s < 0.0)
        throw DegenerateScenarioError("load balance needs at least two facilities with positive capacity");
    return s;
}

double objective_load_balance(const AssignmentMatrix& assignment, std::span<const int> capacity) {
    const auto u = served_counts(assignment);
    return objective_load_balance(u, capacity);
}

double load_balance_or_zero(std::span<const int> served, std::span<const int> capacity) {
    return std::max(0.0, spread_of_unused(served, capacity));
}

std::vector<int> served_counts(const AssignmentMatrix& assignment) {
    std::vector<int> u(assignment.rows(), 0);
    for (std::size_t i = 0; i < assignment.rows(); ++i)
        for (int a : assignment.row(i)) u[i] += a;
    return u;
}

std::string Violation::describe() const {
    switch (kind) {
        case Kind::Capacity:
            return fmt::format("facility {} exceeds capacity by {}", index, magnitude);
        case Kind::Demand:
            return fmt::format("TAZ {} demand mismatch of {}", index, magnitude);
        case Kind::Negative:
            return fmt::format("negative assignment entry in row {} ({})", index, magnitude);
        case Kind::Shape:
            return "assignment shape does not match scenario";
    }
    return "unknown violation";
}

std::vector<Violation> check_feasible(const AssignmentMatrix& assignment, const Scenario& scenario) {
    std::vector<Violation> out;
    const auto nh = scenario.num_facilities();
    const auto nt = scenario.num_tazs();
    if (!assignment.same_shape(nh, nt)) {
        out.push_back({Violation::Kind::Shape, -1, 0});
        return out;
    }
    std::vector<long long> column(nt, 0);
    for (std::size_t i = 0; i < nh; ++i) {
        long long row = 0;
        for (std::size_t j = 0; j < nt; ++j) {
            const int a = assignment(i, j);
            if (a < 0) out.push_back({Violation::Kind::Negative, static_cast<int>(i), a});
            row += a;
            column[j] += a;
        }
        if (row > scenario.capacity[i])
            out.push_back({Violation::Kind::Capacity, static_cast<int>(i), row - scenario.capacity[i]});
    }
    for (std::size_t j = 0; j < nt; ++j)
        if (column[j] != scenario.demand[j])
            out.push_back({Violation::Kind::Demand, static_cast<int>(j), column[j] - scenario.demand[j]});
    return out;
}

bool dominates(const ObjectiveCosts& a, const ObjectiveCosts& b) noexcept {
    return a.f0 <= b.f0 && a.f1 <= b.f1 && (a.f0 < b.f0 || a.f1 < b.f1);
}

}  // namespace floodcare
