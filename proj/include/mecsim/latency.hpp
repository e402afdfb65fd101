#pragma once

// Response-time and allocation model. Every scheduler and the exact solver
// go through these functions, so feasibility is computed in one place.

#include <optional>

#include "mecsim/topology.hpp"
#include "mecsim/types.hpp"

namespace mecsim {

/// Slack used when comparing a constructed TRT against its deadline.
inline constexpr double kTimeTolerance = 1e-9;

/// s / r + d_mu / v_c. Throws InvalidInput when rate_bps <= 0.
double upload_time(const Task& task, double rate_bps, const SlotConfig& cfg);

/// s / R + D / v_c between two servers; exactly 0 when from == to.
/// Throws NoPath when the servers are not connected.
double migration_time(const Task& task, ServerId from, ServerId to, const Topology& topo,
                      const SlotConfig& cfg);

/// Response of size alpha * s back to the host and then over the radio link.
double response_time(const Task& task, ServerId exec, const Topology& topo, double rate_bps,
                     const SlotConfig& cfg);

/// min(deadline, slot) - decision - upload - migration - response.
/// A non-positive result marks the server as infeasible for this task.
double process_budget(const Task& task, ServerId exec, const Topology& topo, double rate_bps,
                      const SlotConfig& cfg);

/// c / budget. Throws InfeasibleBudget when budget_s <= 0.
double required_mips(const Task& task, double budget_s);

/// TRT of a task under an assignment. Assigned tasks take their processing
/// time from process_budget; unassigned ones pay the big-M penalty instead.
double total_response_time(const Task& task, std::optional<ServerId> server, const Topology& topo,
                           double rate_bps, const SlotConfig& cfg);

/// trt > deadline, with an optional slack for rounding.
constexpr bool violation_flag(double trt_s, double deadline_s, double slack_s = 0.0)
{
    return trt_s > deadline_s + slack_s;
}

double response_ratio(const Task& task, const SlotConfig& cfg);

/// Budget and allocation of one (task, server) pair.
struct Placement {
    double budget_s = 0.0;
    double mips = 0.0;
    bool feasible = false;
};

/// Never throws for valid servers: an unreachable server, a zero channel
/// rate or a non-positive budget all yield feasible == false.
Placement evaluate_placement(const Task& task, ServerId exec, const Topology& topo, double rate_bps,
                             const SlotConfig& cfg);

}  // namespace mecsim
