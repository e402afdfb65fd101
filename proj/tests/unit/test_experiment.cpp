#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mecsim/experiment.hpp"

using namespace mecsim;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = fs::path(MECSIM_SOURCE_DIR) / "configs";

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream b;
    b << in.rdbuf();
    return b.str();
}

json tiny_json()
{
    return json::parse(R"({
      "name": "tiny",
      "topology": {"kind": "generated", "n_servers": 3, "capacity_set_mips": [2e5, 4e5], "link_rate_bps": 1e10},
      "workload": {"n_tasks": 8, "app_mix": "default",
                   "radio": {"tx_power_w": 1.5, "noise_db": -60},
                   "channel": {"pathloss_exponent": 2, "reference_gain": 1}},
      "slot": {"slot_s": 2.0, "bandwidth_hz": 1e9},
      "sweep": {"variable": "n_tasks", "values": [4, 8]},
      "oracle": {"enabled": true},
      "repetitions": 4,
      "seed": 17
    })");
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Config, ConvenienceUnitsBecomeSi)
{
    auto j = tiny_json();
    j["workload"]["app_mix"] = json::parse(R"([
        {"name": "ar", "deadline_ms": 75, "size_mb": [1, 7], "weight": 3},
        {"name": "bulk", "deadline_s": [0.2, 0.9], "size_bits": [8e5, 8e6], "weight": 1}])");
    const auto cfg = config_from_json(j);
    ASSERT_EQ(cfg.workload.app_mix.size(), 2u);
    EXPECT_DOUBLE_EQ(cfg.workload.app_mix[0].deadline_min_s, 0.075);
    EXPECT_DOUBLE_EQ(cfg.workload.app_mix[0].size_max_bits, 5.6e7);
    EXPECT_DOUBLE_EQ(cfg.workload.app_mix[0].weight, 0.75);
    EXPECT_NEAR(cfg.workload.radio.noise_w, 1e-6, 1e-20);
    EXPECT_DOUBLE_EQ(cfg.workload.channel.bandwidth_hz, 1e9);

    const auto back = config_from_json(config_to_json(cfg));
    EXPECT_EQ(config_to_json(back).dump(), config_to_json(cfg).dump());
    EXPECT_EQ(config_hash(back), config_hash(cfg));
}

TEST(Config, HashIsStableAndSensitive)
{
    const auto a = config_from_json(tiny_json());
    const auto h = config_hash(a);
    EXPECT_EQ(h.size(), 16u);
    EXPECT_EQ(config_hash(config_from_json(tiny_json())), h);
    auto j = tiny_json();
    j["seed"] = 18;
    EXPECT_NE(config_hash(config_from_json(j)), h);
}

TEST(Config, Rejections)
{
    auto bad = [](auto mutate) {
        auto j = tiny_json();
        mutate(j);
        return j;
    };
    EXPECT_THROW(config_from_json(bad([](json& j) { j.erase("name"); })), ConfigError);
    EXPECT_THROW(config_from_json(bad([](json& j) { j["sweep"]["variable"] = "weather"; })), ConfigError);
    EXPECT_THROW(config_from_json(bad([](json& j) { j["sweep"]["values"] = json::array(); })), ConfigError);
    EXPECT_THROW(config_from_json(bad([](json& j) { j["schedulers"] = {"fifo"}; })), ConfigError);
    EXPECT_THROW(config_from_json(bad([](json& j) { j["repetitions"] = 0; })), ConfigError);
    EXPECT_THROW(config_from_json(bad([](json& j) { j["repetitions"] = "many"; })), ConfigError);
    EXPECT_THROW(config_from_json(bad([](json& j) { j["sweep"]["values"] = {-3}; })), ConfigError);
    EXPECT_THROW(config_from_json(bad([](json& j) { j["slot"]["slot_s"] = -1; })), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, ShippedPresetsLoad)
{
    int n = 0;
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        if (entry.path().extension() == ".json") {
            EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
            ++n;
        }
    }
    EXPECT_GE(n, 8);
}

TEST(Experiment, RepetitionSeedsArePaired)
{
    EXPECT_EQ(repetition_seed(1, 0), repetition_seed(1, 0));
    EXPECT_NE(repetition_seed(1, 0), repetition_seed(1, 1));
    EXPECT_NE(repetition_seed(1, 0), repetition_seed(2, 0));
    const auto rs = run_experiment(config_from_json(tiny_json()));
    ASSERT_EQ(rs.points.size(), 8u);
    // Same repetition, different sweep value: same seed and topology.
    EXPECT_EQ(rs.points[0].seed, rs.points[4].seed);
    EXPECT_EQ(rs.points[0].capacities_mips, rs.points[4].capacities_mips);
}

TEST(Experiment, RecordsAndOracleSeries)
{
    const auto rs = run_experiment(config_from_json(tiny_json()));
    // Two values times mesa, no-migration, random and oracle.
    ASSERT_EQ(rs.records.size(), 8u);
    EXPECT_TRUE(rs.warnings.empty());
    for (const auto& r : rs.records) {
        EXPECT_EQ(r.repetitions.size(), 4u);
        EXPECT_LE(r.min, r.mean);
        EXPECT_LE(r.mean, r.max);
        if (r.scheduler == "mesa") {
            EXPECT_EQ(r.oracle_gap_pct.size(), 4u);
            for (double g : r.oracle_gap_pct) {
                EXPECT_GE(g, 0.0);
            }
        }
    }
    EXPECT_EQ(rs.records[3].scheduler, "oracle");
}

TEST(Experiment, OracleSkippedAboveLimits)
{
    auto j = tiny_json();
    j["sweep"]["values"] = {8, 20};
    const auto rs = run_experiment(config_from_json(j));
    int oracle_series = 0;
    for (const auto& r : rs.records) {
        oracle_series += r.scheduler == "oracle";
    }
    EXPECT_EQ(oracle_series, 1);
    ASSERT_FALSE(rs.warnings.empty());
    EXPECT_NE(rs.warnings[0].find("n_tasks=20"), std::string::npos) << rs.warnings[0];
}

TEST(Experiment, WorkerCountDoesNotChangeResults)
{
    const auto cfg = config_from_json(tiny_json());
    const auto one = run_experiment(cfg, {1, std::nullopt});
    const auto four = run_experiment(cfg, {4, std::nullopt});
    EXPECT_EQ(format_table(one), format_table(four));
}

TEST(Experiment, SeedOverride)
{
    const auto cfg = config_from_json(tiny_json());
    const auto a = run_experiment(cfg, {1, 99});
    EXPECT_EQ(a.config.seed, 99u);
    EXPECT_NE(a.config_hash, config_hash(cfg));
    EXPECT_NE(format_table(a).substr(0, 80), format_table(run_experiment(cfg)).substr(0, 80));
}

TEST(Experiment, TableFormat)
{
    const auto rs = run_experiment(config_from_json(tiny_json()));
    const auto table = format_table(rs);
    std::istringstream in(table);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("# experiment=tiny config_hash=" + rs.config_hash + " seed=17", 0), 0u) << line;
    std::getline(in, line);
    EXPECT_EQ(line, "sweep_value,scheduler,mean,min,max");
    std::getline(in, line);
    EXPECT_EQ(line.rfind("4,mesa,", 0), 0u) << line;
}

TEST(Experiment, EmitReplayRoundTrip)
{
    TempDir dir("mecsim_emit_test");
    const auto rs = run_experiment(config_from_json(tiny_json()));
    const auto paths = emit_outputs(rs, dir.path / "nested");
    for (const auto& p : {paths.results_json, paths.table_csv, paths.runtime_csv, paths.plot_manifest}) {
        EXPECT_TRUE(fs::exists(p)) << p;
    }
    EXPECT_EQ(slurp(paths.table_csv), format_table(rs));
    const auto manifest = json::parse(slurp(paths.plot_manifest));
    EXPECT_EQ(manifest["series"].size(), 4u);
    EXPECT_EQ(manifest["table"], "tiny.csv");

    const auto loaded = load_results(paths.results_json);
    EXPECT_EQ(format_table(loaded), format_table(rs));
    EXPECT_EQ(loaded.points.size(), rs.points.size());
    const auto again = replay(loaded, {2, std::nullopt});
    EXPECT_TRUE(again.identical);
    EXPECT_EQ(format_table(again.rerun), format_table(rs));
}

TEST(Experiment, ReplayDetectsTampering)
{
    auto rs = run_experiment(config_from_json(tiny_json()));
    rs.records[0].repetitions[1].violations += 1;
    const auto out = replay(rs);
    EXPECT_FALSE(out.identical);
    ASSERT_FALSE(out.differences.empty());
    EXPECT_NE(out.differences[0].find("repetition 1"), std::string::npos);
}

TEST(Experiment, OutputGuards)
{
    ResultSet empty;
    empty.config = config_from_json(tiny_json());
    EXPECT_THROW(emit_outputs(empty, fs::temp_directory_path()), InvalidInput);

    TempDir dir("mecsim_guard_test");
    fs::create_directories(dir.path);
    std::ofstream(dir.path / "file") << "x";
    const auto rs = run_experiment(config_from_json(tiny_json()));
    try {
        emit_outputs(rs, dir.path / "file" / "sub");
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("file"), std::string::npos);
    }
    EXPECT_THROW(load_results(dir.path / "missing.json"), InvalidInput);
    std::ofstream(dir.path / "junk.json") << "{\"format\": \"other\"}";
    EXPECT_THROW(load_results(dir.path / "junk.json"), InvalidInput);
}

TEST(Experiment, TopologySweepResolvesRelativePaths)
{
    const auto cfg = load_config(kConfigs / "fig9_topologies.json");
    auto small = cfg;
    small.repetitions = 2;
    small.workload.n_tasks = 30;
    const auto rs = run_experiment(small);
    ASSERT_EQ(rs.points.size(), 6u);
    EXPECT_EQ(rs.points[0].topology, "Renam");
    EXPECT_EQ(rs.points[2].topology, "Cesnet");
    EXPECT_EQ(rs.points[4].capacities_mips.size(), 15u);
}

TEST(VerifyGap, SmallInstances)
{
    auto cfg = config_from_json(tiny_json());
    cfg.sweep_values = {json(8)};
    cfg.repetitions = 20;
    const auto g = verify_gap(cfg);
    EXPECT_EQ(g.instances, 20);
    EXPECT_EQ(g.skipped, 0);
    EXPECT_TRUE(g.all_proved);
    EXPECT_GE(g.max_abs_pct, g.mean_abs_pct);
    EXPECT_GE(g.mean_abs_pct, 0.0);
    EXPECT_LE(g.max_rel, 1.0);
}
