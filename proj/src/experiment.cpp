#include "mecsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "mecsim/sim.hpp"

namespace mecsim {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

std::uint64_t name_tag(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h = (h ^ c) * 0x100000001b3ULL;
    }
    return h;
}

std::string label_of(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

std::string fmt(double v, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

constexpr const char* kOracle = "oracle";

/// Everything computed at one (sweep value, repetition) point.
struct PointResult {
    PointInfo info;
    std::map<std::string, RepetitionResult> by_scheduler;
    bool oracle_ran = false;
    std::string warning;
};

struct PointInputs {
    std::shared_ptr<const Topology> topology;
    WorkloadSpec workload;
    SlotConfig slot;
};

class TopologyCache {
public:
    std::shared_ptr<const Topology> get(const std::filesystem::path& path)
    {
        std::lock_guard lock(mu_);
        auto& slot = cache_[path.string()];
        if (!slot) {
            slot = std::make_shared<const Topology>(load_topology(path));
        }
        return slot;
    }

private:
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<const Topology>> cache_;
};

std::filesystem::path resolve(const ExperimentConfig& cfg, const std::string& p)
{
    std::filesystem::path path(p);
    return path.is_absolute() || cfg.base_dir.empty() ? path : cfg.base_dir / path;
}

PointInputs inputs_for(const ExperimentConfig& cfg, const json& value, std::uint64_t seed, TopologyCache& cache)
{
    PointInputs in;
    in.workload = cfg.workload;
    in.slot = cfg.slot;
    TopologySource topo = cfg.topology;
    switch (cfg.sweep) {
    case SweepVariable::n_servers: topo.generated.n_servers = value.get<int>(); break;
    case SweepVariable::n_tasks: in.workload.n_tasks = value.get<int>(); break;
    case SweepVariable::slot_s: in.slot.slot_s = value.get<double>(); break;
    case SweepVariable::placement:
        in.workload.placement = value == "hotspot" ? MuPlacement::hotspot : MuPlacement::uniform;
        break;
    case SweepVariable::topology:
        topo.kind = "file";
        topo.path = value.get<std::string>();
        break;
    }
    if (topo.kind == "generated") {
        auto spec = topo.generated;
        spec.seed = mix(seed, 0x70706f6c6f6779ULL);
        in.topology = std::make_shared<const Topology>(generate_topology(spec));
    } else {
        in.topology = cache.get(resolve(cfg, topo.path));
    }
    in.workload.seed = mix(seed, 0x776f726b6c6f6164ULL);
    in.workload.channel.bandwidth_hz = in.slot.bandwidth_hz;
    return in;
}

RepetitionResult to_repetition(int rep, std::uint64_t seed, const ViolationReport& r)
{
    RepetitionResult out;
    out.repetition = rep;
    out.seed = seed;
    out.tasks = r.total_tasks;
    out.violations = r.violations;
    out.violation_pct = r.violation_pct;
    out.migrations = r.migrations;
    out.scheduler_ms = r.scheduler_ms;
    out.proved_optimal = r.proved_optimal;
    return out;
}

bool oracle_fits(const std::vector<Task>& tasks, const Topology& topo, const OracleLimits& limits, std::string& why)
{
    if (static_cast<int>(topo.size()) > limits.max_servers) {
        why = std::to_string(topo.size()) + " servers > max_servers " + std::to_string(limits.max_servers);
        return false;
    }
    std::map<int, int> per_slot;
    for (const auto& t : tasks) {
        ++per_slot[t.arrival_slot];
    }
    for (const auto& [slot, n] : per_slot) {
        if (n > limits.max_tasks) {
            why = std::to_string(n) + " tasks in slot " + std::to_string(slot) + " > max_tasks " +
                  std::to_string(limits.max_tasks);
            return false;
        }
    }
    return true;
}

PointResult run_point(const ExperimentConfig& cfg, std::size_t value_index, int rep, TopologyCache& cache)
{
    const json& value = cfg.sweep_values[value_index];
    const std::uint64_t seed = repetition_seed(cfg.seed, rep);
    const PointInputs in = inputs_for(cfg, value, seed, cache);
    const auto tasks = generate(in.workload, *in.topology, in.slot.slot_s);

    PointResult out;
    out.info.sweep_value = label_of(value);
    out.info.repetition = rep;
    out.info.seed = seed;
    out.info.topology = in.topology->name();
    out.info.capacities_mips = in.topology->capacities();
    out.info.tasks = static_cast<int>(tasks.size());

    SimRun sim;
    sim.cfg = in.slot;
    sim.topology = in.topology;
    sim.tasks = tasks;
    sim.horizon_slots = horizon_for(tasks);
    sim.deferral = cfg.deferral;
    sim.oracle_limits = cfg.oracle_limits;
    for (const auto& name : cfg.schedulers) {
        sim.scheduler = name;
        sim.seed = mix(seed, name_tag(name));
        out.by_scheduler[name] = to_repetition(rep, seed, run(sim));
    }
    if (cfg.oracle) {
        std::string why;
        if (oracle_fits(tasks, *in.topology, cfg.oracle_limits, why)) {
            sim.scheduler = kOracle;
            sim.seed = seed;
            try {
                out.by_scheduler[kOracle] = to_repetition(rep, seed, run(sim));
                out.oracle_ran = true;
            } catch (const InvalidInput& e) {
                out.warning = e.what();
            }
        } else {
            out.warning = why;
        }
        if (!out.oracle_ran) {
            out.warning = "oracle skipped at " + to_string(cfg.sweep) + "=" + out.info.sweep_value + ": " + out.warning;
        }
    }
    return out;
}

void summarize(ResultRecord& r)
{
    if (r.repetitions.empty()) {
        return;
    }
    double sum = 0.0, tsum = 0.0;
    r.min = r.max = r.repetitions.front().violation_pct;
    r.runtime_min_ms = r.runtime_max_ms = r.repetitions.front().scheduler_ms;
    for (const auto& x : r.repetitions) {
        sum += x.violation_pct;
        tsum += x.scheduler_ms;
        r.min = std::min(r.min, x.violation_pct);
        r.max = std::max(r.max, x.violation_pct);
        r.runtime_min_ms = std::min(r.runtime_min_ms, x.scheduler_ms);
        r.runtime_max_ms = std::max(r.runtime_max_ms, x.scheduler_ms);
    }
    r.mean = sum / r.repetitions.size();
    r.runtime_mean_ms = tsum / r.repetitions.size();
}

json repetition_to_json(const RepetitionResult& r)
{
    return {{"repetition", r.repetition},     {"seed", r.seed},
            {"tasks", r.tasks},               {"violations", r.violations},
            {"violation_pct", r.violation_pct}, {"migrations", r.migrations},
            {"scheduler_ms", r.scheduler_ms}, {"proved_optimal", r.proved_optimal}};
}

RepetitionResult repetition_from_json(const json& j)
{
    RepetitionResult r;
    r.repetition = j.at("repetition").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.tasks = j.at("tasks").get<int>();
    r.violations = j.at("violations").get<int>();
    r.violation_pct = j.at("violation_pct").get<double>();
    r.migrations = j.value("migrations", 0);
    r.scheduler_ms = j.value("scheduler_ms", 0.0);
    r.proved_optimal = j.value("proved_optimal", true);
    return r;
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

std::string seed_line(const ResultSet& rs)
{
    return "# experiment=" + rs.config.name + " config_hash=" + rs.config_hash +
           " seed=" + std::to_string(rs.config.seed) + " repetitions=" + std::to_string(rs.config.repetitions) +
           " sweep=" + to_string(rs.config.sweep) + "\n";
}

}  // namespace

std::uint64_t repetition_seed(std::uint64_t base, int rep) { return mix(base, static_cast<std::uint64_t>(rep) + 1); }

ResultSet run_experiment(ExperimentConfig cfg, const RunOptions& options)
{
    if (options.seed_override) {
        cfg.seed = *options.seed_override;
    }
    cfg.validate();
    ResultSet rs;
    rs.config = cfg;
    rs.config_hash = config_hash(cfg);

    const std::size_t n_values = cfg.sweep_values.size();
    const std::size_t n_jobs = n_values * static_cast<std::size_t>(cfg.repetitions);
    std::vector<PointResult> results(n_jobs);
    std::vector<std::exception_ptr> errors(n_jobs);
    TopologyCache cache;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job = next++; job < n_jobs; job = next++) {
            try {
                results[job] = run_point(cfg, job / cfg.repetitions, static_cast<int>(job % cfg.repetitions), cache);
            } catch (...) {
                errors[job] = std::current_exception();
            }
        }
    };
    const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(n_jobs)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    std::vector<std::string> series = cfg.schedulers;
    if (cfg.oracle) {
        series.push_back(kOracle);
    }
    for (std::size_t v = 0; v < n_values; ++v) {
        const auto begin = results.begin() + static_cast<std::ptrdiff_t>(v * cfg.repetitions);
        const auto end = begin + cfg.repetitions;
        const bool oracle_everywhere =
            cfg.oracle && std::all_of(begin, end, [](const PointResult& p) { return p.oracle_ran; });
        for (auto it = begin; it != end; ++it) {
            rs.points.push_back(it->info);
            if (!it->warning.empty()) {
                rs.warnings.push_back(it->warning + " (repetition " + std::to_string(it->info.repetition) + ")");
            }
        }
        for (const auto& name : series) {
            if (name == kOracle && !oracle_everywhere) {
                continue;
            }
            ResultRecord rec;
            rec.config_hash = rs.config_hash;
            rec.sweep_value = label_of(cfg.sweep_values[v]);
            rec.scheduler = name;
            for (auto it = begin; it != end; ++it) {
                rec.repetitions.push_back(it->by_scheduler.at(name));
                if (name == "mesa" && oracle_everywhere) {
                    rec.oracle_gap_pct.push_back(it->by_scheduler.at("mesa").violation_pct -
                                                 it->by_scheduler.at(kOracle).violation_pct);
                }
            }
            summarize(rec);
            rs.records.push_back(std::move(rec));
        }
    }
    return rs;
}

std::string format_table(const ResultSet& rs)
{
    std::string out = seed_line(rs);
    out += "sweep_value,scheduler,mean,min,max\n";
    for (const auto& r : rs.records) {
        out += r.sweep_value + "," + r.scheduler + "," + fmt(r.mean) + "," + fmt(r.min) + "," + fmt(r.max) + "\n";
    }
    return out;
}

std::string format_runtime_table(const ResultSet& rs)
{
    std::string out = seed_line(rs);
    out += "sweep_value,scheduler,mean_ms,min_ms,max_ms\n";
    for (const auto& r : rs.records) {
        out += r.sweep_value + "," + r.scheduler + "," + fmt(r.runtime_mean_ms) + "," + fmt(r.runtime_min_ms) + "," +
               fmt(r.runtime_max_ms) + "\n";
    }
    return out;
}

json results_to_json(const ResultSet& rs)
{
    json records = json::array();
    for (const auto& r : rs.records) {
        json reps = json::array();
        for (const auto& x : r.repetitions) {
            reps.push_back(repetition_to_json(x));
        }
        json rec{{"config_hash", r.config_hash}, {"sweep_value", r.sweep_value}, {"scheduler", r.scheduler},
                 {"repetitions", reps},          {"mean", r.mean},               {"min", r.min},
                 {"max", r.max},                 {"runtime_mean_ms", r.runtime_mean_ms}};
        if (!r.oracle_gap_pct.empty()) {
            rec["oracle_gap_pct"] = r.oracle_gap_pct;
        }
        records.push_back(std::move(rec));
    }
    json points = json::array();
    for (const auto& p : rs.points) {
        points.push_back({{"sweep_value", p.sweep_value},
                          {"repetition", p.repetition},
                          {"seed", p.seed},
                          {"topology", p.topology},
                          {"capacities_mips", p.capacities_mips},
                          {"tasks", p.tasks}});
    }
    return {{"format", "mecsim-results/1"},
            {"config_hash", rs.config_hash},
            {"base_dir", rs.config.base_dir.string()},
            {"config", config_to_json(rs.config)},
            {"points", points},
            {"records", records},
            {"warnings", rs.warnings}};
}

ResultSet results_from_json(const json& j, const std::filesystem::path& base_dir)
{
    ResultSet rs;
    try {
        if (j.value("format", std::string{}) != "mecsim-results/1") {
            throw InvalidInput("results: unknown format");
        }
        std::filesystem::path dir = j.value("base_dir", std::string{});
        if (dir.empty()) {
            dir = base_dir;
        }
        rs.config = config_from_json(j.at("config"), dir);
        rs.config_hash = j.at("config_hash").get<std::string>();
        for (const auto& p : j.at("points")) {
            PointInfo info;
            info.sweep_value = p.at("sweep_value").get<std::string>();
            info.repetition = p.at("repetition").get<int>();
            info.seed = p.at("seed").get<std::uint64_t>();
            info.topology = p.value("topology", std::string{});
            info.capacities_mips = p.value("capacities_mips", std::vector<double>{});
            info.tasks = p.value("tasks", 0);
            rs.points.push_back(std::move(info));
        }
        for (const auto& r : j.at("records")) {
            ResultRecord rec;
            rec.config_hash = r.at("config_hash").get<std::string>();
            rec.sweep_value = r.at("sweep_value").get<std::string>();
            rec.scheduler = r.at("scheduler").get<std::string>();
            for (const auto& x : r.at("repetitions")) {
                rec.repetitions.push_back(repetition_from_json(x));
            }
            rec.oracle_gap_pct = r.value("oracle_gap_pct", std::vector<double>{});
            summarize(rec);
            rs.records.push_back(std::move(rec));
        }
        rs.warnings = j.value("warnings", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("results: ") + e.what());
    }
    return rs;
}

ResultSet load_results(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open results file " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidInput("results " + path.string() + ": " + e.what());
    }
    return results_from_json(j, std::filesystem::absolute(path).parent_path());
}

OutputPaths emit_outputs(const ResultSet& rs, const std::filesystem::path& out_dir)
{
    if (rs.records.empty()) {
        throw InvalidInput("emit_outputs: no results to write");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw std::runtime_error("cannot create output directory " + out_dir.string());
    }
    OutputPaths paths;
    const std::string stem = rs.config.name;
    paths.results_json = out_dir / (stem + ".results.json");
    paths.table_csv = out_dir / (stem + ".csv");
    paths.runtime_csv = out_dir / (stem + ".runtime.csv");
    paths.plot_manifest = out_dir / (stem + ".plot.json");

    // Plot manifest: one series per scheduler, x in sweep order.
    std::vector<std::string> order;
    std::map<std::string, json> series;
    for (const auto& r : rs.records) {
        if (!series.count(r.scheduler)) {
            order.push_back(r.scheduler);
            series[r.scheduler] = {{"scheduler", r.scheduler},
                                   {"x", json::array()},
                                   {"mean", json::array()},
                                   {"min", json::array()},
                                   {"max", json::array()}};
        }
        auto& s = series[r.scheduler];
        s["x"].push_back(r.sweep_value);
        s["mean"].push_back(r.mean);
        s["min"].push_back(r.min);
        s["max"].push_back(r.max);
    }
    json manifest{{"experiment", rs.config.name},
                  {"config_hash", rs.config_hash},
                  {"seed", rs.config.seed},
                  {"repetitions", rs.config.repetitions},
                  {"table", paths.table_csv.filename().string()},
                  {"x_axis", {{"name", to_string(rs.config.sweep)}, {"column", "sweep_value"}}},
                  {"y_axis", {{"name", "violation_pct"}, {"label", "Deadline violation (%)"}, {"column", "mean"}}},
                  {"series", json::array()}};
    for (const auto& name : order) {
        manifest["series"].push_back(series[name]);
    }

    write_file(paths.table_csv, format_table(rs));
    write_file(paths.runtime_csv, format_runtime_table(rs));
    write_file(paths.plot_manifest, manifest.dump(2) + "\n");
    write_file(paths.results_json, results_to_json(rs).dump(1) + "\n");
    return paths;
}

ReplayOutcome replay(const ResultSet& recorded, const RunOptions& options)
{
    RunOptions opts = options;
    opts.seed_override.reset();
    ReplayOutcome out;
    out.rerun = run_experiment(recorded.config, opts);
    if (out.rerun.config_hash != recorded.config_hash) {
        out.differences.push_back("config hash " + out.rerun.config_hash + " != recorded " + recorded.config_hash);
    }
    if (out.rerun.records.size() != recorded.records.size()) {
        out.differences.push_back("record count differs");
    } else {
        for (std::size_t i = 0; i < recorded.records.size(); ++i) {
            const auto& a = recorded.records[i];
            const auto& b = out.rerun.records[i];
            const std::string where = a.sweep_value + "/" + a.scheduler;
            if (a.sweep_value != b.sweep_value || a.scheduler != b.scheduler ||
                a.repetitions.size() != b.repetitions.size()) {
                out.differences.push_back(where + ": layout differs");
                continue;
            }
            for (std::size_t k = 0; k < a.repetitions.size(); ++k) {
                const auto& x = a.repetitions[k];
                const auto& y = b.repetitions[k];
                if (x.seed != y.seed || x.tasks != y.tasks || x.violations != y.violations ||
                    x.violation_pct != y.violation_pct || x.migrations != y.migrations) {
                    out.differences.push_back(where + " repetition " + std::to_string(x.repetition) + " differs");
                }
            }
        }
    }
    out.identical = out.differences.empty();
    return out;
}

namespace {

// True when every task is decided in its arrival slot, so the oracle and
// mesa see the same single problem and the oracle cannot lose.
bool single_slot(const ExperimentConfig& cfg, const std::string& sweep_value)
{
    const auto& w = cfg.workload;
    if (w.arrival.mode != ArrivalMode::batch || w.arrival.arrival_slots != 1) {
        return false;
    }
    if (!cfg.deferral) {
        return true;
    }
    const double slot_s = cfg.sweep == SweepVariable::slot_s ? std::stod(sweep_value) : cfg.slot.slot_s;
    double longest = 0.0;
    for (const auto& p : w.app_mix) {
        longest = std::max(longest, p.deadline_max_s);
    }
    return longest - slot_s <= cfg.slot.decision_s;
}

}  // namespace

GapSummary verify_gap(ExperimentConfig cfg, const RunOptions& options)
{
    cfg.oracle = true;
    cfg.schedulers = {"mesa"};
    const ResultSet rs = run_experiment(cfg, options);
    GapSummary g;
    std::map<std::string, const ResultRecord*> oracle_at;
    for (const auto& r : rs.records) {
        if (r.scheduler == kOracle) {
            oracle_at[r.sweep_value] = &r;
        }
    }
    double abs_sum = 0.0, rel_sum = 0.0;
    for (const auto& r : rs.records) {
        if (r.scheduler != "mesa") {
            continue;
        }
        auto it = oracle_at.find(r.sweep_value);
        if (it == oracle_at.end()) {
            g.skipped += static_cast<int>(r.repetitions.size());
            continue;
        }
        const bool comparable = single_slot(cfg, r.sweep_value);
        for (std::size_t k = 0; k < r.repetitions.size(); ++k) {
            const auto& m = r.repetitions[k];
            const auto& o = it->second->repetitions[k];
            if (comparable && o.proved_optimal && m.violations < o.violations) {
                throw std::logic_error("dominance breach at " + to_string(cfg.sweep) + "=" + r.sweep_value +
                                       " repetition " + std::to_string(m.repetition) + ": mesa " +
                                       std::to_string(m.violations) + " < oracle " + std::to_string(o.violations));
            }
            const double abs_gap = m.violation_pct - o.violation_pct;
            const double rel = m.violations > 0 ? double(m.violations - o.violations) / m.violations : 0.0;
            abs_sum += abs_gap;
            rel_sum += rel;
            g.max_abs_pct = std::max(g.max_abs_pct, abs_gap);
            g.max_rel = std::max(g.max_rel, rel);
            g.all_proved = g.all_proved && o.proved_optimal;
            ++g.instances;
        }
    }
    if (g.instances > 0) {
        g.mean_abs_pct = abs_sum / g.instances;
        g.mean_rel = rel_sum / g.instances;
    }
    g.within_thresholds =
        g.instances > 0 && g.mean_abs_pct <= cfg.gap_mean_threshold_pct && g.max_abs_pct <= cfg.gap_max_threshold_pct;
    return g;
}

}  // namespace mecsim
