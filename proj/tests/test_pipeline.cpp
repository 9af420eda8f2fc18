#include <doctest.h>

#include <filesystem>

#include "floodcare/pipeline.hpp"
#include "support.hpp"
#include "tempdir.hpp"

using namespace floodcare;
namespace fs = std::filesystem;

namespace {

RunConfig quick_config(const fs::path& instance, const fs::path& out, int count) {
    RunConfig c;
    c.instance = instance;
    c.out = out;
    c.scenario_count = count;
    c.seed = 11;
    c.acs.iterations = 4;
    c.acs.ants = 8;
    c.gamma_grid = "1x3";
    c.jobs = 1;
    return c;
}

std::vector<std::string> listing(const fs::path& root) {
    std::vector<std::string> out;
    if (!fs::exists(root)) return out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).string());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("selectors and seeds") {
    CHECK(parse_selector("3") == std::vector<int>{3});
    CHECK(parse_selector("1,4,7-9") == std::vector<int>{1, 4, 7, 8, 9});
    CHECK(parse_selector("5,1-2,2") == std::vector<int>{1, 2, 5});
    CHECK_THROWS_AS(parse_selector("3-1"), ConfigError);
    CHECK_THROWS_AS(parse_selector("a"), ConfigError);
    CHECK(scenario_seed(100, 5, 0) == 105);
    CHECK(scenario_seed(100, 5, 1) != scenario_seed(100, 5, 2));
    CHECK(scenario_seed(100, 5, 1) != 105);
}

TEST_CASE("config json") {
    fct::TempDir tmp("cfg");
    const auto doc = nlohmann::json::parse(R"({
        "instance": "inst", "out": "run", "scenario_count": 7, "seed": 3,
        "acs": {"iterations": 5, "q0": 0.9}, "gamma_grid": "1x1", "infeasible": "skip"})");
    const auto c = RunConfig::from_json(doc, tmp.path());
    CHECK(c.instance == tmp.path() / "inst");
    CHECK(c.out == tmp.path() / "run");
    CHECK(c.scenario_count == 7);
    CHECK(c.acs.iterations == 5);
    CHECK(c.acs.q0 == 0.9);
    CHECK(c.acs.ants == 30);
    CHECK(c.infeasible == InfeasiblePolicy::Skip);
    const auto again = RunConfig::from_json(c.to_json());
    CHECK(again.to_json() == c.to_json());

    CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"bogus": 1})")), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"acs": {"q0": 2}})")), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"infeasible": "maybe"})")), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"schema_version": 9})")), ConfigError);

    const auto spec = fct::small_spec(5);
    const auto back = synthetic_spec_from_json(synthetic_spec_to_json(spec));
    CHECK(back.facilities == spec.facilities);
    CHECK(back.edge_fp500 == spec.edge_fp500);
    CHECK(back.seed == spec.seed);
}

TEST_CASE("zero scenarios writes nothing") {
    fct::TempDir tmp("pipe_zero");
    cmd_synth(fct::small_spec(1), tmp.path() / "inst");
    const auto config = quick_config(tmp.path() / "inst", tmp.path() / "out", 0);
    const auto result = cmd_generate(config);
    CHECK(result.written.empty());
    CHECK(listing(tmp.path() / "out").empty());
}

TEST_CASE("generate, solve and report") {
    fct::TempDir tmp("pipe_full");
    const auto inst_dir = tmp.path() / "inst";
    cmd_synth(fct::small_spec(1), inst_dir);
    auto config = quick_config(inst_dir, tmp.path() / "a", 3);

    const auto gen = cmd_generate(config);
    REQUIRE(gen.written.size() == 3);
    CHECK(gen.skipped.empty());
    const auto solve = cmd_solve(config);
    CHECK(solve.solved == std::vector<int>{0, 1, 2});
    CHECK(solve.failed.empty());
    const auto report = cmd_report(config);
    CHECK(report.scenarios == std::vector<int>{0, 1, 2});

    const Layout layout{config.out};
    const auto loaded = load_instance(inst_dir);
    const auto& inst = loaded.instance;

    SUBCASE("rerun into another directory gives identical files") {
        auto other = config;
        other.out = tmp.path() / "b";
        other.jobs = 2;
        cmd_generate(other);
        cmd_solve(other);
        cmd_report(other);
        const auto files = listing(config.out);
        REQUIRE(files == listing(other.out));
        for (const auto& f : files) {
            if (f.ends_with("manifest.json")) continue;  // records the instance path
            CHECK_MESSAGE(read_file(config.out / f) == read_file(other.out / f), f);
        }
    }

    SUBCASE("merged archive equals run_scenario on the stored scenario") {
        for (int id : {0, 1, 2}) {
            const auto s = read_scenario(layout.scenario(id), &inst);
            CHECK(s.rng_seed == scenario_seed(config.seed, id, gen.written[id].attempt));
            const auto direct = run_scenario(s, config.acs, s.rng_seed, GammaGrid::parse(config.gamma_grid));
            const auto stored = read_archive(layout.archive(id));
            REQUIRE(stored.size() == direct.size());
            for (std::size_t n = 0; n < stored.size(); ++n) {
                CHECK(stored.entries()[n].costs == direct.entries()[n].costs);
                CHECK(stored.entries()[n].trace == direct.entries()[n].trace);
            }
            for (int r = 0; r < 3; ++r) CHECK(fs::exists(layout.run_archive(id, r)));
        }
    }

    SUBCASE("single-scenario report equals that scenario's aggregate") {
        auto one = config;
        one.scenarios = {1};
        cmd_report(one);
        const auto s = read_scenario(layout.scenario(1), &inst);
        const auto base = baseline_taz_costs(inst, baseline_distance_matrix(loaded.graph, inst));
        const auto g = aggregate_scenario(read_archive(layout.archive(1)), s, inst, base);
        const auto agg = nlohmann::json::parse(read_file(layout.report_dir() / "aggregate.json"));
        CHECK(agg == nlohmann::json::parse(aggregate_to_json(g, inst).dump(1)));
    }

    SUBCASE("report is idempotent") {
        const auto before = read_file(layout.report_dir() / "aggregate.json");
        const auto occ = read_file(layout.report_dir() / "occupancy.csv");
        cmd_report(config);
        CHECK(read_file(layout.report_dir() / "aggregate.json") == before);
        CHECK(read_file(layout.report_dir() / "occupancy.csv") == occ);
    }

    SUBCASE("missing archives are named") {
        fs::remove(layout.archive(2));
        try {
            cmd_report(config);
            FAIL("report should fail");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("scenario_002") != std::string::npos);
        }
    }

    SUBCASE("unknown scenario selection") {
        auto bad = config;
        bad.scenarios = {9};
        CHECK_THROWS_AS(cmd_solve(bad), ConfigError);
    }
}

TEST_CASE("1x1 grid reduces to a single run") {
    fct::TempDir tmp("pipe_1x1");
    cmd_synth(fct::small_spec(2), tmp.path() / "inst");
    auto config = quick_config(tmp.path() / "inst", tmp.path() / "out", 1);
    config.gamma_grid = "1x1";
    cmd_generate(config);
    cmd_solve(config);
    const Layout layout{config.out};
    const auto loaded = load_instance(tmp.path() / "inst");
    const auto s = read_scenario(layout.scenario(0), &loaded.instance);
    const auto single = run_acs(s, config.acs, s.rng_seed, 0);
    const auto stored = read_archive(layout.archive(0));
    REQUIRE(stored.size() == single.size());
    for (std::size_t n = 0; n < stored.size(); ++n) CHECK(stored.entries()[n].costs == single.entries()[n].costs);
    CHECK_FALSE(fs::exists(layout.run_archive(0, 1)));
}

TEST_CASE("infeasible scenarios are resampled or skipped") {
    fct::TempDir tmp("pipe_infeasible");
    // FP500 facilities hold most of the demand; closing all of them cannot be absorbed.
    auto spec = fct::small_spec(3);
    spec.facility_fp100 = 0.0;
    spec.facility_fp500 = 0.8;
    cmd_synth(spec, tmp.path() / "inst");
    auto config = quick_config(tmp.path() / "inst", tmp.path() / "out", 20);
    const auto resampled = cmd_generate(config);
    for (const auto& g : resampled.written) {
        CHECK(g.seed == scenario_seed(config.seed, g.id, g.attempt));
        CHECK(fs::exists(Layout{config.out}.scenario(g.id)));
    }
    CHECK(resampled.written.size() + resampled.skipped.size() == 20);

    config.infeasible = InfeasiblePolicy::Skip;
    config.out = tmp.path() / "skip";
    const auto skipped = cmd_generate(config);
    for (const auto& g : skipped.written) CHECK(g.attempt == 0);
    CHECK(skipped.written.size() + skipped.skipped.size() == 20);
    CHECK(skipped.skipped.size() >= resampled.skipped.size());
}
