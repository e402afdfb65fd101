#pragma once

// Configuration-driven experiment runner: sweeps one variable, runs every
// scheduler on identical seeded workloads, and writes replayable results.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mecsim/oracle.hpp"
#include "mecsim/topology.hpp"
#include "mecsim/workload.hpp"

#include "json.hpp"

namespace mecsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TopologySource {
    /// "generated" or a path to a topology document (relative to the config).
    std::string kind = "generated";
    std::string path;
    GeneratedTopologySpec generated;
};

enum class SweepVariable { n_servers, n_tasks, slot_s, placement, topology };

std::string to_string(SweepVariable v);
SweepVariable sweep_variable_from(const std::string& name);

struct ExperimentConfig {
    std::string name;
    std::string description;
    TopologySource topology;
    WorkloadSpec workload;
    SlotConfig slot;
    std::vector<std::string> schedulers{"mesa", "no-migration", "random"};
    SweepVariable sweep = SweepVariable::n_tasks;
    /// Kept as JSON scalars: numbers for numeric sweeps, strings otherwise.
    std::vector<nlohmann::json> sweep_values;
    int repetitions = 20;
    std::uint64_t seed = 1;
    bool oracle = false;
    OracleLimits oracle_limits;
    bool deferral = true;
    double gap_mean_threshold_pct = 15.0;
    double gap_max_threshold_pct = 25.0;
    /// Where `mecsim run` writes outputs unless --out is given. Relative
    /// paths resolve against the working directory.
    std::string output_dir = "results";
    /// Directory that relative topology paths resolve against.
    std::filesystem::path base_dir;

    void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// 16 hex digits of FNV-1a over the canonical JSON form of the config.
std::string config_hash(const ExperimentConfig& cfg);

/// Seed of repetition `rep` (shared by every sweep value and scheduler so
/// the series are paired).
std::uint64_t repetition_seed(std::uint64_t base, int rep);

struct RepetitionResult {
    int repetition = 0;
    std::uint64_t seed = 0;
    int tasks = 0;
    int violations = 0;
    double violation_pct = 0.0;
    int migrations = 0;
    double scheduler_ms = 0.0;
    bool proved_optimal = true;
};

struct ResultRecord {
    std::string config_hash;
    std::string sweep_value;
    std::string scheduler;
    std::vector<RepetitionResult> repetitions;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double runtime_mean_ms = 0.0;
    double runtime_min_ms = 0.0;
    double runtime_max_ms = 0.0;
    /// Per-repetition gap to the oracle in percentage points (mesa only,
    /// when the oracle ran).
    std::vector<double> oracle_gap_pct;
};

/// Inputs actually used at one (sweep value, repetition) point.
struct PointInfo {
    std::string sweep_value;
    int repetition = 0;
    std::uint64_t seed = 0;
    std::string topology;
    std::vector<double> capacities_mips;
    int tasks = 0;
};

struct ResultSet {
    ExperimentConfig config;
    std::string config_hash;
    std::vector<ResultRecord> records;
    std::vector<PointInfo> points;
    std::vector<std::string> warnings;
};

struct RunOptions {
    int workers = 1;
    std::optional<std::uint64_t> seed_override;
};

ResultSet run_experiment(ExperimentConfig cfg, const RunOptions& options = {});

struct OutputPaths {
    std::filesystem::path results_json;
    std::filesystem::path table_csv;
    std::filesystem::path runtime_csv;
    std::filesystem::path plot_manifest;
};

/// Writes <name>.results.json, <name>.csv, <name>.runtime.csv and
/// <name>.plot.json. Throws std::runtime_error naming the path when the
/// directory cannot be written and InvalidInput on an empty result set.
OutputPaths emit_outputs(const ResultSet& results, const std::filesystem::path& out_dir);

/// The figure table: sweep_value,scheduler,mean,min,max. Byte-stable for a
/// given config and seed.
std::string format_table(const ResultSet& results);
std::string format_runtime_table(const ResultSet& results);

nlohmann::json results_to_json(const ResultSet& results);
ResultSet results_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ResultSet load_results(const std::filesystem::path& path);

struct ReplayOutcome {
    ResultSet rerun;
    bool identical = false;
    std::vector<std::string> differences;
};

/// Re-runs the embedded config and compares per-repetition violation data.
ReplayOutcome replay(const ResultSet& recorded, const RunOptions& options = {});

struct GapSummary {
    int instances = 0;
    double mean_abs_pct = 0.0;
    double max_abs_pct = 0.0;
    double mean_rel = 0.0;
    double max_rel = 0.0;
    int skipped = 0;
    bool all_proved = true;
    bool within_thresholds = false;
};

/// Runs mesa and the oracle on every point of the config. Throws
/// std::logic_error when mesa beats a proved oracle result on a point where
/// every task is decided in one slot. Elsewhere the oracle only optimizes
/// each slot, so mesa can legitimately come out ahead.
GapSummary verify_gap(ExperimentConfig cfg, const RunOptions& options = {});

}  // namespace mecsim
