#include "floodcare/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "floodcare/analytics.hpp"
#include "floodcare/parallel.hpp"
#include "floodcare/rng.hpp"

namespace floodcare {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& doc, std::initializer_list<const char*> allowed, const char* where) {
    if (!doc.is_object()) throw ConfigError(fmt::format("{} must be a JSON object", where));
    for (const auto& item : doc.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
        if (!known) throw ConfigError(fmt::format("unknown key '{}' in {}", item.key(), where));
    }
}

template <typename T>
void read_opt(const json& doc, const char* key, T& target) {
    if (doc.contains(key)) target = doc.at(key).get<T>();
}

fs::path resolve(const fs::path& base, const fs::path& p) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

json acs_to_json(const AcsParams& p) {
    return {{"iterations", p.iterations},   {"ants", p.ants},
            {"q0", p.q0},                   {"alpha_local", p.alpha_local},
            {"alpha_global", p.alpha_global}, {"beta", p.beta},
            {"min_heuristic", p.min_heuristic}, {"candidate_list", p.candidate_list}};
}

AcsParams acs_from_json(const json& doc) {
    check_keys(doc, {"iterations", "ants", "q0", "alpha_local", "alpha_global", "beta", "min_heuristic", "candidate_list"},
               "acs");
    AcsParams p;
    read_opt(doc, "iterations", p.iterations);
    read_opt(doc, "ants", p.ants);
    read_opt(doc, "q0", p.q0);
    read_opt(doc, "alpha_local", p.alpha_local);
    read_opt(doc, "alpha_global", p.alpha_global);
    read_opt(doc, "beta", p.beta);
    read_opt(doc, "min_heuristic", p.min_heuristic);
    read_opt(doc, "candidate_list", p.candidate_list);
    return p;
}

struct Manifest {
    std::vector<GeneratedScenario> scenarios;
};

Manifest read_manifest(const Layout& layout) {
    if (!fs::exists(layout.manifest()))
        throw ConfigError(fmt::format("{} not found; run generate first", layout.manifest().string()));
    Manifest m;
    try {
        const auto doc = json::parse(read_file(layout.manifest()));
        for (const auto& s : doc.at("scenarios"))
            m.scenarios.push_back({s.at("id").get<int>(), s.at("seed").get<std::uint64_t>(), s.at("attempt").get<int>()});
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", layout.manifest().string(), e.what()));
    }
    return m;
}

std::vector<int> selected_ids(const RunConfig& config, const Manifest& manifest) {
    std::vector<int> available;
    for (const auto& s : manifest.scenarios) available.push_back(s.id);
    if (config.scenarios.empty()) return available;
    for (int id : config.scenarios)
        if (!std::binary_search(available.begin(), available.end(), id))
            throw ConfigError(fmt::format("scenario {} was not generated", id));
    return config.scenarios;
}

LoadedInstance load_checked(const RunConfig& config) {
    if (config.instance.empty()) throw ConfigError("no instance given (config 'instance')");
    auto loaded = load_instance(config.instance);
    for (const auto& n : loaded.notices) spdlog::info("{}", n);
    return loaded;
}

}  // namespace

void RunConfig::validate() const {
    acs.validate();
    if (scenario_count < 0) throw ConfigError("scenario_count must be >= 0");
    if (max_resample < 0) throw ConfigError("max_resample must be >= 0");
    if (jobs < 0) throw ConfigError("jobs must be >= 0");
    GammaGrid::parse(gamma_grid);
    if (synthetic) synthetic->validate();
}

RunConfig RunConfig::from_json(const json& doc, const fs::path& base_dir) {
    check_keys(doc,
               {"schema_version", "instance", "out", "scenario_count", "seed", "acs", "gamma_grid", "jobs", "infeasible",
                "max_resample", "scenarios", "synthetic"},
               "config");
    RunConfig c;
    try {
        const int version = doc.value("schema_version", kSchemaVersion);
        if (version != kSchemaVersion) throw ConfigError(fmt::format("unsupported config schema_version {}", version));
        if (doc.contains("instance")) c.instance = resolve(base_dir, doc.at("instance").get<std::string>());
        if (doc.contains("out")) c.out = resolve(base_dir, doc.at("out").get<std::string>());
        read_opt(doc, "scenario_count", c.scenario_count);
        read_opt(doc, "seed", c.seed);
        if (doc.contains("acs")) c.acs = acs_from_json(doc.at("acs"));
        read_opt(doc, "gamma_grid", c.gamma_grid);
        read_opt(doc, "jobs", c.jobs);
        read_opt(doc, "max_resample", c.max_resample);
        if (doc.contains("infeasible")) {
            const auto policy = doc.at("infeasible").get<std::string>();
            if (policy == "resample")
                c.infeasible = InfeasiblePolicy::Resample;
            else if (policy == "skip")
                c.infeasible = InfeasiblePolicy::Skip;
            else
                throw ConfigError(fmt::format("infeasible must be 'resample' or 'skip', got '{}'", policy));
        }
        if (doc.contains("scenarios")) {
            const auto& s = doc.at("scenarios");
            c.scenarios = s.is_string() ? parse_selector(s.get<std::string>()) : s.get<std::vector<int>>();
            std::sort(c.scenarios.begin(), c.scenarios.end());
            c.scenarios.erase(std::unique(c.scenarios.begin(), c.scenarios.end()), c.scenarios.end());
        }
        if (doc.contains("synthetic")) c.synthetic = synthetic_spec_from_json(doc.at("synthetic"));
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config: {}", e.what()));
    }
    c.validate();
    return c;
}

json RunConfig::to_json() const {
    json doc = {{"schema_version", kSchemaVersion},
                {"instance", instance.string()},
                {"out", out.string()},
                {"scenario_count", scenario_count},
                {"seed", seed},
                {"acs", acs_to_json(acs)},
                {"gamma_grid", gamma_grid},
                {"jobs", jobs},
                {"infeasible", infeasible == InfeasiblePolicy::Resample ? "resample" : "skip"},
                {"max_resample", max_resample},
                {"scenarios", scenarios}};
    if (synthetic) doc["synthetic"] = synthetic_spec_to_json(*synthetic);
    return doc;
}

RunConfig load_config(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return RunConfig::from_json(doc, path.parent_path());
}

json synthetic_spec_to_json(const SyntheticSpec& s) {
    return {{"name", s.name},
            {"facilities", s.facilities},
            {"tazs", s.tazs},
            {"patients", s.patients},
            {"grid_width", s.grid_width},
            {"spacing_m", s.spacing_m},
            {"jitter", s.jitter},
            {"facility_fp100", s.facility_fp100},
            {"facility_fp500", s.facility_fp500},
            {"edge_fp100", s.edge_fp100},
            {"edge_fp500", s.edge_fp500},
            {"flood_centers", s.flood_centers},
            {"distance_scale_m", s.distance_scale_m},
            {"seed", s.seed},
            {"origin_lon", s.origin_lon},
            {"origin_lat", s.origin_lat}};
}

SyntheticSpec synthetic_spec_from_json(const json& doc) {
    check_keys(doc,
               {"name", "facilities", "tazs", "patients", "grid_width", "spacing_m", "jitter", "facility_fp100",
                "facility_fp500", "edge_fp100", "edge_fp500", "flood_centers", "distance_scale_m", "seed", "origin_lon",
                "origin_lat"},
               "synthetic");
    SyntheticSpec s;
    read_opt(doc, "name", s.name);
    read_opt(doc, "facilities", s.facilities);
    read_opt(doc, "tazs", s.tazs);
    read_opt(doc, "patients", s.patients);
    read_opt(doc, "grid_width", s.grid_width);
    read_opt(doc, "spacing_m", s.spacing_m);
    read_opt(doc, "jitter", s.jitter);
    read_opt(doc, "facility_fp100", s.facility_fp100);
    read_opt(doc, "facility_fp500", s.facility_fp500);
    read_opt(doc, "edge_fp100", s.edge_fp100);
    read_opt(doc, "edge_fp500", s.edge_fp500);
    read_opt(doc, "flood_centers", s.flood_centers);
    read_opt(doc, "distance_scale_m", s.distance_scale_m);
    read_opt(doc, "seed", s.seed);
    read_opt(doc, "origin_lon", s.origin_lon);
    read_opt(doc, "origin_lat", s.origin_lat);
    return s;
}

std::vector<int> parse_selector(const std::string& text) {
    std::set<int> ids;
    std::size_t pos = 0;
    auto number = [&](std::string_view s) {
        int v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || v < 0)
            throw ConfigError(fmt::format("bad scenario selector '{}'", text));
        return v;
    };
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string_view item(text.data() + pos, comma - pos);
        const auto dash = item.find('-');
        if (dash == std::string_view::npos) {
            ids.insert(number(item));
        } else {
            const int lo = number(item.substr(0, dash));
            const int hi = number(item.substr(dash + 1));
            if (hi < lo) throw ConfigError(fmt::format("bad scenario range '{}'", item));
            for (int v = lo; v <= hi; ++v) ids.insert(v);
        }
        pos = comma + 1;
    }
    return {ids.begin(), ids.end()};
}

fs::path Layout::scenario(int id) const { return scenario_dir() / fmt::format("scenario_{:03d}.json", id); }
fs::path Layout::archive(int id) const { return archive_dir() / fmt::format("scenario_{:03d}.json", id); }
fs::path Layout::run_archive(int id, int run) const {
    return archive_dir() / fmt::format("scenario_{:03d}.run_{}.json", id, run);
}

std::uint64_t scenario_seed(std::uint64_t base, int index, int attempt) {
    const std::uint64_t seed = base + static_cast<std::uint64_t>(index);
    return attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt));
}

GenerateResult cmd_generate(const RunConfig& config) {
    config.validate();
    GenerateResult result;
    if (config.scenario_count == 0) {
        spdlog::info("scenario_count is 0; nothing to generate");
        return result;
    }
    const auto loaded = load_checked(config);
    const Layout layout{config.out};
    fs::create_directories(layout.scenario_dir());

    const auto n = static_cast<std::size_t>(config.scenario_count);
    std::vector<std::optional<GeneratedScenario>> done(n);
    std::vector<std::string> reasons(n);
    const int attempts = config.infeasible == InfeasiblePolicy::Resample ? config.max_resample + 1 : 1;
    parallel_for(n, config.jobs, [&](std::size_t idx) {
        const int id = static_cast<int>(idx);
        for (int attempt = 0; attempt < attempts; ++attempt) {
            const auto seed = scenario_seed(config.seed, id, attempt);
            try {
                const auto s = build_scenario(loaded.instance, loaded.graph, id, seed);
                write_scenario(layout.scenario(id), s, loaded.instance);
                done[idx] = GeneratedScenario{id, seed, attempt};
                if (attempt > 0) spdlog::warn("scenario {}: feasible after {} resample(s), seed {}", id, attempt, seed);
                return;
            } catch (const InfeasibleScenarioError& e) {
                reasons[idx] = e.what();
                spdlog::warn("scenario {} attempt {} (seed {}) infeasible: {}", id, attempt, seed, e.what());
            }
        }
        spdlog::error("scenario {} skipped: {}", id, reasons[idx]);
    });

    json entries = json::array(), skipped = json::array();
    for (std::size_t idx = 0; idx < n; ++idx) {
        if (done[idx]) {
            const auto& g = *done[idx];
            result.written.push_back(g);
            entries.push_back({{"id", g.id},
                               {"seed", g.seed},
                               {"attempt", g.attempt},
                               {"file", layout.scenario(g.id).filename().string()}});
        } else {
            result.skipped.emplace_back(static_cast<int>(idx), reasons[idx]);
            skipped.push_back({{"id", idx}, {"reason", reasons[idx]}});
        }
    }
    const json manifest = {{"schema_version", kSchemaVersion},
                           {"instance", loaded.instance.graph_ref},
                           {"base_seed", config.seed},
                           {"scenario_count", config.scenario_count},
                           {"scenarios", entries},
                           {"skipped", skipped}};
    write_file_atomic(layout.manifest(), manifest.dump(1) + "\n");
    spdlog::info("generated {} scenario(s), skipped {}", result.written.size(), result.skipped.size());
    return result;
}

SolveResult cmd_solve(const RunConfig& config) {
    config.validate();
    const Layout layout{config.out};
    const auto manifest = read_manifest(layout);
    const auto ids = selected_ids(config, manifest);
    const auto loaded = load_checked(config);
    const auto grid = GammaGrid::parse(config.gamma_grid);
    const auto combos = grid.combinations();

    std::vector<std::optional<Scenario>> scenarios(ids.size());
    std::vector<std::string> errors(ids.size());
    for (std::size_t s = 0; s < ids.size(); ++s) {
        try {
            scenarios[s] = read_scenario(layout.scenario(ids[s]), &loaded.instance);
        } catch (const Error& e) {
            errors[s] = e.what();
        }
    }

    // Work units are (scenario, gamma run); run r of a scenario uses seed
    // rng_seed + r, matching run_scenario(S, params, S.rng_seed, grid).
    const std::size_t runs = combos.size();
    std::vector<std::optional<ParetoArchive>> archives(ids.size() * runs);
    std::vector<std::string> unit_errors(ids.size() * runs);
    parallel_for(ids.size() * runs, config.jobs, [&](std::size_t unit) {
        const auto s = unit / runs;
        const auto r = unit % runs;
        if (!scenarios[s]) return;
        AcsParams p = config.acs;
        p.gamma0 = combos[r].first;
        p.gamma1 = combos[r].second;
        try {
            archives[unit] = run_acs(*scenarios[s], p, scenarios[s]->rng_seed + r, static_cast<int>(r));
        } catch (const Error& e) {
            unit_errors[unit] = e.what();
        }
    });

    fs::create_directories(layout.archive_dir());
    SolveResult result;
    for (std::size_t s = 0; s < ids.size(); ++s) {
        const int id = ids[s];
        for (std::size_t r = 0; r < runs && errors[s].empty(); ++r)
            if (!unit_errors[s * runs + r].empty()) errors[s] = fmt::format("run {}: {}", r, unit_errors[s * runs + r]);
        if (!errors[s].empty()) {
            std::error_code ec;
            fs::remove(layout.archive(id), ec);
            spdlog::error("scenario {} failed: {}", id, errors[s]);
            result.failed.emplace_back(id, errors[s]);
            continue;
        }
        std::vector<ParetoArchive> per_run;
        std::vector<RunInfo> info;
        for (std::size_t r = 0; r < runs; ++r) {
            const RunInfo ri{static_cast<int>(r), combos[r].first, combos[r].second, scenarios[s]->rng_seed + r};
            write_archive(layout.run_archive(id, static_cast<int>(r)), *archives[s * runs + r], {ri});
            per_run.push_back(std::move(*archives[s * runs + r]));
            info.push_back(ri);
        }
        const auto merged = merge_pareto(per_run);
        write_archive(layout.archive(id), merged, info);
        spdlog::info("scenario {}: {} residual patients, {} Pareto solutions", id, scenarios[s]->displaced_patients.size(),
                     merged.size());
        result.solved.push_back(id);
    }
    return result;
}

ReportResult cmd_report(const RunConfig& config) {
    config.validate();
    const Layout layout{config.out};
    const auto manifest = read_manifest(layout);
    const auto ids = selected_ids(config, manifest);
    if (ids.empty()) throw ConfigError("no scenarios to report");

    std::vector<std::string> missing;
    for (int id : ids)
        if (!fs::exists(layout.archive(id))) missing.push_back(layout.archive(id).string());
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += "\n  " + m;
        throw ConfigError(fmt::format("{} archive(s) missing; run solve first:{}", missing.size(), list));
    }

    const auto loaded = load_checked(config);
    const auto& inst = loaded.instance;
    const auto baseline = baseline_taz_costs(inst, baseline_distance_matrix(loaded.graph, inst, config.jobs));

    std::vector<AggregateSolution> per_scenario(ids.size());
    std::vector<ParetoArchive> archives(ids.size());
    parallel_for(ids.size(), config.jobs, [&](std::size_t s) {
        const auto scenario = read_scenario(layout.scenario(ids[s]), &inst);
        archives[s] = read_archive(layout.archive(ids[s]));
        if (archives[s].scenario_id() != scenario.id)
            throw ConfigError(fmt::format("{}: archive belongs to scenario {}", layout.archive(ids[s]).string(),
                                          archives[s].scenario_id()));
        per_scenario[s] = aggregate_scenario(archives[s], scenario, inst, baseline);
    });
    const auto total = aggregate_all(per_scenario);
    const auto tables = build_report(total, inst);

    ReportResult result;
    result.scenarios = ids;
    const auto dir = layout.report_dir();
    auto emit = [&](const fs::path& path, const std::string& text) {
        write_file_atomic(path, text);
        result.files.push_back(path);
    };
    for (std::size_t s = 0; s < ids.size(); ++s) {
        emit(dir / "scenarios" / fmt::format("scenario_{:03d}.json", ids[s]),
             aggregate_to_json(per_scenario[s], inst).dump(1) + "\n");
        emit(dir / "pareto" / fmt::format("scenario_{:03d}.csv", ids[s]), pareto_front_csv(archives[s]));
    }
    emit(dir / "aggregate.json", aggregate_to_json(total, inst).dump(1) + "\n");
    emit(dir / "occupancy.csv", occupancy_csv(tables, inst));
    emit(dir / "stress.csv", stress_csv(tables, inst));
    emit(dir / "reassignment.csv", reassignment_csv(tables, inst));
    emit(dir / "closure_importance.csv", closure_importance_csv(tables, inst));
    emit(dir / "demand_increase.csv", demand_increase_csv(tables, inst));
    emit(dir / "taz_travel.csv", taz_travel_csv(tables, inst));
    emit(dir / "facilities.geojson", facilities_geojson(total, inst).dump(1) + "\n");
    emit(dir / "tazs.geojson", tazs_geojson(total, inst).dump(1) + "\n");
    spdlog::info("report over {} scenario(s) written to {}", ids.size(), dir.string());
    return result;
}

fs::path cmd_synth(const SyntheticSpec& spec, const fs::path& out_dir) {
    const auto bundle = generate_synthetic(spec);
    write_bundle(bundle, out_dir);
    spdlog::info("synthetic instance '{}' ({} facilities, {} TAZs, {} patients) written to {}", spec.name,
                 spec.facilities, spec.tazs, spec.patients, out_dir.string());
    return out_dir;
}

json cmd_validate(const RunConfig& config) {
    const auto loaded = load_checked(config);
    const auto& inst = loaded.instance;
    std::map<std::string, int> facility_classes, edge_classes;
    long fp100_visits = 0, spare_elsewhere = 0;
    for (const auto& f : inst.facilities) {
        ++facility_classes[to_string(f.flood_class)];
        if (f.flood_class == FloodClass::FP100)
            fp100_visits += f.weekly_visits;
        else
            spare_elsewhere += f.capacity - f.weekly_visits;
    }
    for (const auto& e : loaded.graph.edges()) ++edge_classes[to_string(e.flood_class)];
    long capacity = 0;
    for (const auto& f : inst.facilities) capacity += f.capacity;
    return {{"instance", inst.graph_ref},
            {"nodes", loaded.graph.num_nodes()},
            {"edges", loaded.graph.num_edges()},
            {"facilities", inst.facilities.size()},
            {"tazs", inst.tazs.size()},
            {"patients", inst.patients.size()},
            {"total_capacity", capacity},
            {"facility_flood_classes", facility_classes},
            {"edge_flood_classes", edge_classes},
            {"always_displaced_patients", fp100_visits},
            {"spare_capacity_outside_fp100", spare_elsewhere},
            {"notices", loaded.notices}};
}

}  // namespace floodcare
