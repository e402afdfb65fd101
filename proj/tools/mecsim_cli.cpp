// mecsim: run experiment configs, replay recorded results, check the
// heuristic against the oracle, and convert Topology Zoo graphs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mecsim/experiment.hpp"
#include "mecsim/topology.hpp"

namespace fs = std::filesystem;
using namespace mecsim;

namespace {

std::string slurp(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Common {
    std::string out;
    int workers = 0;
    std::optional<std::uint64_t> seed;

    RunOptions options() const
    {
        RunOptions o;
        o.workers = workers > 0 ? workers : std::max(1u, std::thread::hardware_concurrency());
        o.seed_override = seed;
        return o;
    }
};

void print_warnings(const ResultSet& rs)
{
    for (const auto& w : rs.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
}

int cmd_run(const std::string& config_path, const Common& common)
{
    const auto cfg = load_config(config_path);
    const auto rs = run_experiment(cfg, common.options());
    const fs::path out = common.out.empty() ? fs::path(cfg.output_dir) : fs::path(common.out);
    const auto paths = emit_outputs(rs, out);
    print_warnings(rs);
    std::cout << format_table(rs);
    std::cout << "wrote " << paths.table_csv.string() << ", " << paths.runtime_csv.string() << ", "
              << paths.results_json.string() << ", " << paths.plot_manifest.string() << "\n";
    return 0;
}

int cmd_replay(const std::string& results_path, const Common& common)
{
    const auto recorded = load_results(results_path);
    if (common.seed) {
        std::cerr << "note: --seed is ignored by replay; the recorded seed is used\n";
    }
    auto opts = common.options();
    opts.seed_override.reset();
    const auto outcome = replay(recorded, opts);
    if (!common.out.empty()) {
        emit_outputs(outcome.rerun, common.out);
    }
    if (outcome.identical) {
        std::cout << "replay identical: " << recorded.config.name << " config_hash=" << recorded.config_hash << "\n";
        return 0;
    }
    std::cout << "replay differs: " << outcome.differences.size() << " difference(s)\n";
    for (const auto& d : outcome.differences) {
        std::cout << "  " << d << "\n";
    }
    return 1;
}

int cmd_gap(const std::string& config_path, const Common& common)
{
    const auto cfg = load_config(config_path);
    const auto g = verify_gap(cfg, common.options());
    std::printf("instances %d (skipped %d)\n", g.instances, g.skipped);
    std::printf("absolute gap: mean %.2f pts, max %.2f pts (thresholds %.1f / %.1f)\n", g.mean_abs_pct, g.max_abs_pct,
                cfg.gap_mean_threshold_pct, cfg.gap_max_threshold_pct);
    std::printf("relative gap: mean %.3f, max %.3f\n", g.mean_rel, g.max_rel);
    if (!g.all_proved) {
        std::printf("note: some oracle runs hit the time budget; their values are best-found\n");
    }
    std::printf("%s\n", g.within_thresholds ? "within thresholds" : "OUTSIDE thresholds");
    return g.within_thresholds ? 0 : 3;
}

int cmd_convert(const std::string& graphml, const std::string& sidecar, const std::string& out)
{
    const auto topo = convert_graphml(slurp(graphml), slurp(sidecar));
    if (out.empty() || out == "-") {
        std::cout << format_topology(topo);
    } else {
        save_topology(topo, out);
        std::cerr << "wrote " << out << " (" << topo.size() << " nodes, " << topo.links().size() << " links)\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Deadline-aware MEC workload migration simulator"};
    app.require_subcommand(1);
    Common common;
    std::uint64_t seed = 0;
    app.add_option("-o,--out", common.out, "Output directory (convert-topology: output file)");
    app.add_option("-j,--workers", common.workers, "Worker threads (default: hardware concurrency)")
        ->check(CLI::NonNegativeNumber);
    auto* seed_opt = app.add_option("-s,--seed", seed, "Override the config's base seed");

    std::string config_path, results_path, graphml, sidecar;
    auto* run = app.add_subcommand("run", "Run an experiment config and write its outputs")->fallthrough();
    run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    auto* rep = app.add_subcommand("replay", "Re-run a results file and compare")->fallthrough();
    rep->add_option("results", results_path, "<name>.results.json")->required()->check(CLI::ExistingFile);
    auto* gap = app.add_subcommand("gap", "Compare mesa with the oracle on every point")->fallthrough();
    gap->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    auto* conv = app.add_subcommand("convert-topology", "GraphML plus sidecar to a topology document")->fallthrough();
    conv->add_option("graphml", graphml, "Topology Zoo GraphML file")->required()->check(CLI::ExistingFile);
    conv->add_option("sidecar", sidecar, "JSON with capacities and link rates")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    if (seed_opt->count() > 0) {
        common.seed = seed;
    }

    try {
        if (run->parsed()) {
            return cmd_run(config_path, common);
        }
        if (rep->parsed()) {
            return cmd_replay(results_path, common);
        }
        if (gap->parsed()) {
            return cmd_gap(config_path, common);
        }
        return cmd_convert(graphml, sidecar, common.out);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        // A broken scheduling invariant, not a user error.
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
