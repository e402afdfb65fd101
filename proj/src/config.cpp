// Experiment configuration: JSON <-> ExperimentConfig. Convenience units
// (ms, MB, dB) are accepted on input; the canonical form written back is
// SI so that a replayed config is bit-identical to the one that ran.

#include <fstream>
#include <sstream>

#include "mecsim/experiment.hpp"
#include "mecsim/radio.hpp"

namespace mecsim {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& why) { throw ConfigError("config: " + why); }

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        config_fail(std::string("field '") + key + "' has the wrong type");
    }
}

std::pair<double, double> range_of(const json& j, const char* key, double scale)
{
    const auto& v = j.at(key);
    if (v.is_number()) {
        return {v.get<double>() * scale, v.get<double>() * scale};
    }
    if (!v.is_array() || v.size() != 2) {
        config_fail(std::string("'") + key + "' must be a number or a [min, max] pair");
    }
    return {v[0].get<double>() * scale, v[1].get<double>() * scale};
}

AppProfile profile_from_json(const json& j)
{
    AppProfile p;
    p.name = get_or<std::string>(j, "name", "app");
    if (j.contains("deadline_s")) {
        std::tie(p.deadline_min_s, p.deadline_max_s) = range_of(j, "deadline_s", 1.0);
    } else if (j.contains("deadline_ms")) {
        std::tie(p.deadline_min_s, p.deadline_max_s) = range_of(j, "deadline_ms", 1e-3);
    } else {
        config_fail("profile '" + p.name + "' needs deadline_s or deadline_ms");
    }
    if (j.contains("size_bits")) {
        std::tie(p.size_min_bits, p.size_max_bits) = range_of(j, "size_bits", 1.0);
    } else if (j.contains("size_mb")) {
        std::tie(p.size_min_bits, p.size_max_bits) = range_of(j, "size_mb", kBitsPerMegabyte);
    } else {
        config_fail("profile '" + p.name + "' needs size_bits or size_mb");
    }
    p.alpha = get_or(j, "alpha", 0.1);
    p.weight = get_or(j, "weight", 1.0);
    return p;
}

json profile_to_json(const AppProfile& p)
{
    return {{"name", p.name},
            {"deadline_s", {p.deadline_min_s, p.deadline_max_s}},
            {"size_bits", {p.size_min_bits, p.size_max_bits}},
            {"alpha", p.alpha},
            {"weight", p.weight}};
}

WorkloadSpec workload_from_json(const json& j)
{
    WorkloadSpec w;
    w.n_tasks = get_or(j, "n_tasks", 0);
    w.width_m = get_or(j, "width_m", w.width_m);
    w.height_m = get_or(j, "height_m", w.height_m);
    w.instr_mean_mi = get_or(j, "instr_mean_mi", w.instr_mean_mi);
    w.instr_stddev_mi = get_or(j, "instr_stddev_mi", w.instr_stddev_mi);
    w.instr_floor_mi = get_or(j, "instr_floor_mi", w.instr_floor_mi);
    if (j.contains("app_mix") && !(j.at("app_mix").is_string() && j.at("app_mix") == "default")) {
        w.app_mix.clear();
        for (const auto& p : j.at("app_mix")) {
            w.app_mix.push_back(profile_from_json(p));
        }
        // Unnormalized weights are accepted on input.
        double total = 0.0;
        for (const auto& p : w.app_mix) {
            total += p.weight;
        }
        if (total > 0.0 && std::abs(total - 1.0) > 1e-12) {
            for (auto& p : w.app_mix) {
                p.weight /= total;
            }
        }
    }
    const auto placement = get_or<std::string>(j, "placement", "uniform");
    if (placement == "uniform") {
        w.placement = MuPlacement::uniform;
    } else if (placement == "hotspot") {
        w.placement = MuPlacement::hotspot;
    } else {
        config_fail("placement must be 'uniform' or 'hotspot'");
    }
    if (j.contains("hotspot")) {
        const auto& h = j.at("hotspot");
        if (h.contains("centers")) {
            for (const auto& c : h.at("centers")) {
                w.hotspot.centers.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
            }
        }
        w.hotspot.n_centers = get_or(h, "n_centers", w.hotspot.n_centers);
        w.hotspot.concentration = get_or(h, "concentration", w.hotspot.concentration);
        w.hotspot.spread_m = get_or(h, "spread_m", w.hotspot.spread_m);
    }
    if (j.contains("arrival")) {
        const auto& a = j.at("arrival");
        const auto mode = get_or<std::string>(a, "mode", "batch");
        if (mode == "batch") {
            w.arrival.mode = ArrivalMode::batch;
        } else if (mode == "continuous") {
            w.arrival.mode = ArrivalMode::continuous;
        } else {
            config_fail("arrival.mode must be 'batch' or 'continuous'");
        }
        w.arrival.arrival_slots = get_or(a, "slots", w.arrival.arrival_slots);
        w.arrival.window_s = get_or(a, "window_s", w.arrival.window_s);
    }
    if (j.contains("radio")) {
        const auto& r = j.at("radio");
        w.radio.tx_power_w = get_or(r, "tx_power_w", w.radio.tx_power_w);
        w.radio.interference_w = get_or(r, "interference_w", w.radio.interference_w);
        if (r.contains("noise_w")) {
            w.radio.noise_w = r.at("noise_w").get<double>();
        } else if (r.contains("noise_db")) {
            w.radio.noise_w = db_to_watts(r.at("noise_db").get<double>());
        }
    }
    if (j.contains("channel")) {
        const auto& c = j.at("channel");
        w.channel.pathloss_exponent = get_or(c, "pathloss_exponent", w.channel.pathloss_exponent);
        w.channel.reference_gain = get_or(c, "reference_gain", w.channel.reference_gain);
    }
    return w;
}

json workload_to_json(const WorkloadSpec& w)
{
    json mix = json::array();
    for (const auto& p : w.app_mix) {
        mix.push_back(profile_to_json(p));
    }
    json hotspot{{"n_centers", w.hotspot.n_centers},
                 {"concentration", w.hotspot.concentration},
                 {"spread_m", w.hotspot.spread_m}};
    if (!w.hotspot.centers.empty()) {
        json centers = json::array();
        for (const auto& [x, y] : w.hotspot.centers) {
            centers.push_back({x, y});
        }
        hotspot["centers"] = centers;
    }
    return {{"n_tasks", w.n_tasks},
            {"width_m", w.width_m},
            {"height_m", w.height_m},
            {"instr_mean_mi", w.instr_mean_mi},
            {"instr_stddev_mi", w.instr_stddev_mi},
            {"instr_floor_mi", w.instr_floor_mi},
            {"app_mix", mix},
            {"placement", w.placement == MuPlacement::hotspot ? "hotspot" : "uniform"},
            {"hotspot", hotspot},
            {"arrival",
             {{"mode", w.arrival.mode == ArrivalMode::batch ? "batch" : "continuous"},
              {"slots", w.arrival.arrival_slots},
              {"window_s", w.arrival.window_s}}},
            {"radio",
             {{"tx_power_w", w.radio.tx_power_w},
              {"interference_w", w.radio.interference_w},
              {"noise_w", w.radio.noise_w}}},
            {"channel",
             {{"pathloss_exponent", w.channel.pathloss_exponent},
              {"reference_gain", w.channel.reference_gain}}}};
}

}  // namespace

std::string to_string(SweepVariable v)
{
    switch (v) {
    case SweepVariable::n_servers: return "n_servers";
    case SweepVariable::n_tasks: return "n_tasks";
    case SweepVariable::slot_s: return "slot_s";
    case SweepVariable::placement: return "placement";
    case SweepVariable::topology: return "topology";
    }
    return "?";
}

SweepVariable sweep_variable_from(const std::string& name)
{
    for (auto v : {SweepVariable::n_servers, SweepVariable::n_tasks, SweepVariable::slot_s, SweepVariable::placement,
                   SweepVariable::topology}) {
        if (to_string(v) == name) {
            return v;
        }
    }
    config_fail("unknown sweep variable '" + name + "'");
}

void ExperimentConfig::validate() const
{
    if (name.empty()) {
        config_fail("name is required");
    }
    if (repetitions < 1) {
        config_fail("repetitions must be >= 1");
    }
    if (sweep_values.empty()) {
        config_fail("sweep.values must not be empty");
    }
    if (schedulers.empty()) {
        config_fail("at least one scheduler is required");
    }
    for (const auto& s : schedulers) {
        if (s != "mesa" && s != "no-migration" && s != "random") {
            config_fail("unknown scheduler '" + s + "'");
        }
    }
    for (const auto& v : sweep_values) {
        const bool numeric = v.is_number();
        switch (sweep) {
        case SweepVariable::n_servers:
        case SweepVariable::n_tasks:
            if (!v.is_number_integer() || v.get<long long>() < (sweep == SweepVariable::n_servers ? 1 : 0)) {
                config_fail("sweep values for " + to_string(sweep) + " must be non-negative integers");
            }
            break;
        case SweepVariable::slot_s:
            if (!numeric || !(v.get<double>() > 0.0)) {
                config_fail("sweep values for slot_s must be positive numbers");
            }
            break;
        case SweepVariable::placement:
            if (!v.is_string() || (v != "uniform" && v != "hotspot")) {
                config_fail("sweep values for placement must be 'uniform' or 'hotspot'");
            }
            break;
        case SweepVariable::topology:
            if (!v.is_string()) {
                config_fail("sweep values for topology must be file paths");
            }
            break;
        }
    }
    if (sweep == SweepVariable::n_servers && topology.kind != "generated") {
        config_fail("an n_servers sweep needs a generated topology");
    }
    if (topology.kind != "generated" && topology.kind != "file") {
        config_fail("topology.kind must be 'generated' or 'file'");
    }
    if (topology.kind == "file" && topology.path.empty() && sweep != SweepVariable::topology) {
        config_fail("topology.path is required for a file topology");
    }
    try {
        mecsim::validate(slot);
        mecsim::validate(workload);
    } catch (const InvalidInput& e) {
        config_fail(e.what());
    }
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir)
{
    ExperimentConfig c;
    c.base_dir = base_dir;
    try {
        c.name = j.at("name").get<std::string>();
        c.description = get_or<std::string>(j, "description", "");
        if (j.contains("topology")) {
            const auto& t = j.at("topology");
            c.topology.kind = get_or<std::string>(t, "kind", "generated");
            c.topology.path = get_or<std::string>(t, "path", "");
            auto& g = c.topology.generated;
            g.n_servers = get_or(t, "n_servers", g.n_servers);
            g.width_m = get_or(t, "width_m", g.width_m);
            g.height_m = get_or(t, "height_m", g.height_m);
            g.capacity_set_mips = get_or(t, "capacity_set_mips", g.capacity_set_mips);
            g.fixed_total_mips = get_or(t, "fixed_total_mips", g.fixed_total_mips);
            g.link_rate_bps = get_or(t, "link_rate_bps", g.link_rate_bps);
            g.extra_links = get_or(t, "extra_links", g.extra_links);
        }
        if (j.contains("workload")) {
            c.workload = workload_from_json(j.at("workload"));
        }
        if (j.contains("slot")) {
            const auto& s = j.at("slot");
            c.slot.slot_s = get_or(s, "slot_s", c.slot.slot_s);
            c.slot.decision_s = get_or(s, "decision_s", c.slot.decision_s);
            c.slot.alpha = get_or(s, "alpha", c.slot.alpha);
            c.slot.v_c_mps = get_or(s, "v_c_mps", c.slot.v_c_mps);
            c.slot.bandwidth_hz = get_or(s, "bandwidth_hz", c.slot.bandwidth_hz);
            c.slot.big_m_s = get_or(s, "big_m_s", c.slot.big_m_s);
        }
        c.workload.channel.bandwidth_hz = c.slot.bandwidth_hz;
        if (j.contains("schedulers")) {
            c.schedulers = j.at("schedulers").get<std::vector<std::string>>();
        }
        const auto& sw = j.at("sweep");
        c.sweep = sweep_variable_from(sw.at("variable").get<std::string>());
        c.sweep_values = sw.at("values").get<std::vector<json>>();
        c.repetitions = get_or(j, "repetitions", c.repetitions);
        c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
        if (j.contains("oracle")) {
            const auto& o = j.at("oracle");
            c.oracle = get_or(o, "enabled", false);
            c.oracle_limits.max_tasks = get_or(o, "max_tasks", c.oracle_limits.max_tasks);
            c.oracle_limits.max_servers = get_or(o, "max_servers", c.oracle_limits.max_servers);
            c.oracle_limits.time_budget_s = get_or(o, "time_budget_s", c.oracle_limits.time_budget_s);
        }
        c.deferral = get_or(j, "deferral", c.deferral);
        c.output_dir = get_or(j, "output_dir", c.output_dir);
        if (j.contains("gap_thresholds")) {
            const auto& g = j.at("gap_thresholds");
            c.gap_mean_threshold_pct = get_or(g, "mean_pct", c.gap_mean_threshold_pct);
            c.gap_max_threshold_pct = get_or(g, "max_pct", c.gap_max_threshold_pct);
        }
    } catch (const json::exception& e) {
        config_fail(e.what());
    }
    c.validate();
    return c;
}

json config_to_json(const ExperimentConfig& c)
{
    const auto& g = c.topology.generated;
    json topo{{"kind", c.topology.kind}};
    if (c.topology.kind == "generated") {
        topo.update({{"n_servers", g.n_servers},
                     {"width_m", g.width_m},
                     {"height_m", g.height_m},
                     {"capacity_set_mips", g.capacity_set_mips},
                     {"fixed_total_mips", g.fixed_total_mips},
                     {"link_rate_bps", g.link_rate_bps},
                     {"extra_links", g.extra_links}});
    } else {
        topo["path"] = c.topology.path;
    }
    return {{"name", c.name},
            {"description", c.description},
            {"topology", topo},
            {"workload", workload_to_json(c.workload)},
            {"slot",
             {{"slot_s", c.slot.slot_s},
              {"decision_s", c.slot.decision_s},
              {"alpha", c.slot.alpha},
              {"v_c_mps", c.slot.v_c_mps},
              {"bandwidth_hz", c.slot.bandwidth_hz},
              {"big_m_s", c.slot.big_m_s}}},
            {"schedulers", c.schedulers},
            {"sweep", {{"variable", to_string(c.sweep)}, {"values", c.sweep_values}}},
            {"repetitions", c.repetitions},
            {"seed", c.seed},
            {"oracle",
             {{"enabled", c.oracle},
              {"max_tasks", c.oracle_limits.max_tasks},
              {"max_servers", c.oracle_limits.max_servers},
              {"time_budget_s", c.oracle_limits.time_budget_s}}},
            {"deferral", c.deferral},
            {"gap_thresholds", {{"mean_pct", c.gap_mean_threshold_pct}, {"max_pct", c.gap_max_threshold_pct}}}};
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path.string());
    }
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j, std::filesystem::absolute(path).parent_path());
}

std::string config_hash(const ExperimentConfig& cfg)
{
    const std::string text = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

}  // namespace mecsim
