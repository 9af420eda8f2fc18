#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "floodcare/acs.hpp"
#include "floodcare/scenario.hpp"
#include "floodcare/synthetic.hpp"

namespace floodcare {

enum class InfeasiblePolicy { Resample, Skip };

// Mirrors the JSON config file. Relative paths in a config file are taken
// relative to the file's directory.
struct RunConfig {
    std::filesystem::path instance;          // bundle directory
    std::filesystem::path out = "out";
    int scenario_count = kDefaultScenarioCount;
    std::uint64_t seed = 1;
    AcsParams acs;
    std::string gamma_grid = "3x3";
    int jobs = 0;                            // 0: all cores
    InfeasiblePolicy infeasible = InfeasiblePolicy::Resample;
    int max_resample = 16;
    std::vector<int> scenarios;              // solve/report selection, empty = all
    std::optional<SyntheticSpec> synthetic;  // for the synth subcommand

    void validate() const;
    static RunConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
    nlohmann::json to_json() const;
};

RunConfig load_config(const std::filesystem::path& path);

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& doc);

// "3", "0-9", "1,4,7-9" -> ascending unique indices.
std::vector<int> parse_selector(const std::string& text);

struct Layout {
    std::filesystem::path root;
    std::filesystem::path scenario_dir() const { return root / "scenarios"; }
    std::filesystem::path archive_dir() const { return root / "archives"; }
    std::filesystem::path report_dir() const { return root / "report"; }
    std::filesystem::path manifest() const { return scenario_dir() / "manifest.json"; }
    std::filesystem::path scenario(int id) const;
    std::filesystem::path archive(int id) const;
    std::filesystem::path run_archive(int id, int run) const;
};

struct GeneratedScenario {
    int id = 0;
    std::uint64_t seed = 0;
    int attempt = 0;  // 0: seed = base + id, else derived resample seed
};

struct GenerateResult {
    std::vector<GeneratedScenario> written;
    std::vector<std::pair<int, std::string>> skipped;
};

struct SolveResult {
    std::vector<int> solved;
    std::vector<std::pair<int, std::string>> failed;
};

struct ReportResult {
    std::vector<int> scenarios;
    std::vector<std::filesystem::path> files;
};

// Seed used for a scenario index and resample attempt.
std::uint64_t scenario_seed(std::uint64_t base, int index, int attempt);

GenerateResult cmd_generate(const RunConfig& config);
SolveResult cmd_solve(const RunConfig& config);
ReportResult cmd_report(const RunConfig& config);
std::filesystem::path cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& out_dir);
nlohmann::json cmd_validate(const RunConfig& config);

}  // namespace floodcare
