// floodcare: generate flood scenarios, solve the displaced-patient
// reassignment per scenario, and report expected-case tables.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "floodcare/pipeline.hpp"

namespace fc = floodcare;
using nlohmann::json;

namespace {

int fail(const std::string& kind, const std::string& message, const json& extra = nullptr) {
    json err = {{"kind", kind}, {"message", message}};
    if (!extra.is_null()) err["details"] = extra;
    std::cerr << json{{"error", err}}.dump() << std::endl;
    return kind == "usage" ? 2 : 1;
}

struct Overrides {
    std::string config;
    std::string instance;
    std::string out;
    std::string scenarios;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::string gamma_grid;
    std::optional<int> candidate_list;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON run configuration");
    cmd->add_option("--instance", o.instance, "instance bundle directory (overrides config)");
    cmd->add_option("--out", o.out, "output directory (overrides config)");
    cmd->add_option("--jobs", o.jobs, "worker threads, 0 = all cores");
}

fc::RunConfig resolve(const Overrides& o) {
    fc::RunConfig c = o.config.empty() ? fc::RunConfig{} : fc::load_config(o.config);
    if (!o.instance.empty()) c.instance = o.instance;
    if (!o.out.empty()) c.out = o.out;
    if (o.seed) c.seed = *o.seed;
    if (o.jobs) c.jobs = *o.jobs;
    if (!o.gamma_grid.empty()) c.gamma_grid = o.gamma_grid;
    if (o.candidate_list) c.acs.candidate_list = *o.candidate_list;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_logger_mt("floodcare"));
    spdlog::set_pattern("[%l] %v");

    CLI::App app{"Flood-scenario healthcare access analysis"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

    Overrides o;

    auto* generate = app.add_subcommand("generate", "sample Monte Carlo flood scenarios");
    add_common(generate, o);
    std::optional<int> count;
    generate->add_option("--scenarios", count, "number of scenarios");
    generate->add_option("--seed", o.seed, "base seed; scenario i uses seed + i");

    auto* solve = app.add_subcommand("solve", "run the ACS solver over generated scenarios");
    add_common(solve, o);
    solve->add_option("--scenarios", o.scenarios, "selection such as 0-9,12 (default all)");
    solve->add_option("--gamma-grid", o.gamma_grid, "3x3 (default), 1x1, 1x3, 3x1 or a,b/c,d");
    solve->add_option("--candidate-list", o.candidate_list, "nearest open facilities per TAZ, 0 = off");

    auto* report = app.add_subcommand("report", "aggregate archives into tables and map layers");
    add_common(report, o);
    report->add_option("--scenarios", o.scenarios, "selection such as 0-9,12 (default all)");

    auto* synth = app.add_subcommand("synth", "write a synthetic instance bundle");
    add_common(synth, o);
    fc::SyntheticSpec spec_flags;
    synth->add_option("--facilities", spec_flags.facilities, "facility count");
    synth->add_option("--tazs", spec_flags.tazs, "TAZ count");
    synth->add_option("--patients", spec_flags.patients, "patient count");
    synth->add_option("--facility-fp100", spec_flags.facility_fp100, "share of facilities in the 100-year floodplain");
    synth->add_option("--facility-fp500", spec_flags.facility_fp500, "share of facilities in the 500-year floodplain");
    synth->add_option("--edge-fp100", spec_flags.edge_fp100, "share of road segments in the 100-year floodplain");
    synth->add_option("--edge-fp500", spec_flags.edge_fp500, "share of road segments in the 500-year floodplain");
    synth->add_option("--seed", o.seed, "generator seed");

    auto* validate = app.add_subcommand("validate", "load an instance and print a summary");
    add_common(validate, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    const auto level = spdlog::level::from_str(log_level);
    spdlog::set_level(level);

    try {
        if (generate->parsed()) {
            auto c = resolve(o);
            if (count) c.scenario_count = *count;
            c.validate();
            const auto r = fc::cmd_generate(c);
            if (!r.skipped.empty()) {
                json skipped = json::array();
                for (const auto& [id, why] : r.skipped) skipped.push_back({{"id", id}, {"reason", why}});
                return fail("infeasible", fmt::format("{} scenario(s) could not be made feasible", r.skipped.size()),
                            skipped);
            }
        } else if (solve->parsed()) {
            auto c = resolve(o);
            if (!o.scenarios.empty()) c.scenarios = fc::parse_selector(o.scenarios);
            const auto r = fc::cmd_solve(c);
            if (!r.failed.empty()) {
                json failed = json::array();
                for (const auto& [id, why] : r.failed) failed.push_back({{"id", id}, {"reason", why}});
                return fail("solve", fmt::format("{} scenario(s) failed", r.failed.size()), failed);
            }
        } else if (report->parsed()) {
            auto c = resolve(o);
            if (!o.scenarios.empty()) c.scenarios = fc::parse_selector(o.scenarios);
            fc::cmd_report(c);
        } else if (synth->parsed()) {
            const auto c = resolve(o);
            fc::SyntheticSpec spec = c.synthetic.value_or(spec_flags);
            // flags given on the command line win over the config section
            for (const auto* opt : synth->get_options()) {
                if (opt->count() == 0) continue;
                const auto& n = opt->get_name();
                if (n == "--facilities") spec.facilities = spec_flags.facilities;
                if (n == "--tazs") spec.tazs = spec_flags.tazs;
                if (n == "--patients") spec.patients = spec_flags.patients;
                if (n == "--facility-fp100") spec.facility_fp100 = spec_flags.facility_fp100;
                if (n == "--facility-fp500") spec.facility_fp500 = spec_flags.facility_fp500;
                if (n == "--edge-fp100") spec.edge_fp100 = spec_flags.edge_fp100;
                if (n == "--edge-fp500") spec.edge_fp500 = spec_flags.edge_fp500;
            }
            if (o.seed) spec.seed = *o.seed;
            const auto dir = o.out.empty() ? (c.instance.empty() ? std::filesystem::path("instance") : c.instance)
                                           : std::filesystem::path(o.out);
            fc::cmd_synth(spec, dir);
        } else if (validate->parsed()) {
            std::cout << fc::cmd_validate(resolve(o)).dump(2) << std::endl;
        }
    } catch (const fc::Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
