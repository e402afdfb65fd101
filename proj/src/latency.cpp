#include "mecsim/latency.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mecsim {

namespace {

double transfer_time(double bits, ServerId from, ServerId to, const Topology& topo, const SlotConfig& cfg)
{
    if (from == to) {
        topo.server(from);
        return 0.0;
    }
    if (!topo.reachable(from, to)) {
        throw NoPath("no path between servers " + std::to_string(from) + " and " + std::to_string(to));
    }
    return bits / topo.effective_rate(from, to) + topo.distance(from, to) / cfg.v_c_mps;
}

}  // namespace

double response_ratio(const Task& task, const SlotConfig& cfg) { return task.response_ratio.value_or(cfg.alpha); }

double upload_time(const Task& task, double rate_bps, const SlotConfig& cfg)
{
    if (!(rate_bps > 0.0)) {
        throw InvalidInput("upload_time: channel rate must be > 0 (task " + std::to_string(task.id) + ")");
    }
    return task.data_size_bits / rate_bps + task.mu_distance_m / cfg.v_c_mps;
}

double migration_time(const Task& task, ServerId from, ServerId to, const Topology& topo, const SlotConfig& cfg)
{
    return transfer_time(task.data_size_bits, from, to, topo, cfg);
}

double response_time(const Task& task, ServerId exec, const Topology& topo, double rate_bps, const SlotConfig& cfg)
{
    if (!(rate_bps > 0.0)) {
        throw InvalidInput("response_time: channel rate must be > 0 (task " + std::to_string(task.id) + ")");
    }
    const double bits = response_ratio(task, cfg) * task.data_size_bits;
    return transfer_time(bits, task.host, exec, topo, cfg) + bits / rate_bps;
}

double process_budget(const Task& task, ServerId exec, const Topology& topo, double rate_bps, const SlotConfig& cfg)
{
    return std::min(task.deadline_s, cfg.slot_s) - cfg.decision_s - upload_time(task, rate_bps, cfg) -
           migration_time(task, task.host, exec, topo, cfg) - response_time(task, exec, topo, rate_bps, cfg);
}

double required_mips(const Task& task, double budget_s)
{
    if (!(budget_s > 0.0)) {
        throw InfeasibleBudget("task " + std::to_string(task.id) + ": processing budget " +
                               std::to_string(budget_s) + " s is not positive");
    }
    return task.instr_millions / budget_s;
}

double total_response_time(const Task& task, std::optional<ServerId> server, const Topology& topo, double rate_bps,
                           const SlotConfig& cfg)
{
    const double prefix = cfg.decision_s + (rate_bps > 0.0 ? upload_time(task, rate_bps, cfg) : 0.0);
    if (!server) {
        return prefix + cfg.big_m_s;
    }
    const double migration = migration_time(task, task.host, *server, topo, cfg);
    const double response = response_time(task, *server, topo, rate_bps, cfg);
    const double process = process_budget(task, *server, topo, rate_bps, cfg);
    return prefix + migration + process + response;
}

Placement evaluate_placement(const Task& task, ServerId exec, const Topology& topo, double rate_bps,
                             const SlotConfig& cfg)
{
    Placement p;
    if (!(rate_bps > 0.0) || !std::isfinite(rate_bps) || (exec != task.host && !topo.reachable(task.host, exec))) {
        return p;
    }
    p.budget_s = process_budget(task, exec, topo, rate_bps, cfg);
    if (p.budget_s > 0.0) {
        p.mips = task.instr_millions / p.budget_s;
        p.feasible = std::isfinite(p.mips);
    }
    return p;
}

}  // namespace mecsim
