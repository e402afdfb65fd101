#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mecsim/topology.hpp"
#include "mecsim/types.hpp"

namespace mecsim {

/// Everything a scheduler needs for one slot. Task deadlines are the
/// remaining deadlines at this slot's decision boundary.
struct SlotProblem {
    int slot = 0;
    std::vector<Task> tasks;
    std::shared_ptr<const Topology> topology;
    /// Channel rate r_i, parallel to tasks.
    std::vector<double> rates_bps;
    SlotConfig cfg;

    void validate() const;
    const Topology& topo() const { return *topology; }
};

struct SchedulerStats {
    std::int64_t comparisons = 0;
    std::int64_t servers_probed = 0;
};

struct SchedulerResult {
    Schedule schedule;
    std::vector<TaskId> unassigned;
    SchedulerStats stats;

    int violations() const { return schedule.violations(); }
};

/// c / min(deadline, slot): an approximate MIPS demand.
double priority(const Task& task, const SlotConfig& cfg);

/// Greedy migration-enabled scheduler: tasks by ascending priority, each on
/// the nearest server (by path distance from its host) that can take it.
SchedulerResult mesa_schedule(const SlotProblem& problem);

/// Same as mesa_schedule with the host as the only candidate.
SchedulerResult no_migration_schedule(const SlotProblem& problem);

/// Each task, in arrival order, tries one uniformly drawn server.
SchedulerResult random_schedule(const SlotProblem& problem, std::uint64_t seed);

/// Builds a complete schedule from a per-task server choice (parallel to
/// problem.tasks). Throws InvalidInput if a chosen server is infeasible for
/// the task or the allocations overflow a server.
Schedule make_schedule(const SlotProblem& problem, const std::vector<std::optional<ServerId>>& choice);

/// Throws std::logic_error if the schedule breaks capacity, uniqueness or
/// deadline-by-construction.
void check_schedule(const SlotProblem& problem, const Schedule& schedule);

using SchedulerFn = std::function<SchedulerResult(const SlotProblem&)>;

/// "mesa" | "no-migration" | "random". Throws InvalidInput otherwise.
SchedulerFn scheduler_by_name(std::string_view name, std::uint64_t seed = 0);

}  // namespace mecsim
