#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mecsim/oracle.hpp"
#include "mecsim/schedulers.hpp"

namespace mecsim {

/// Per-server residual capacity within one slot. Every slot starts from
/// the full capacities since all tasks scheduled in a slot finish in it.
class CapacityLedger {
public:
    explicit CapacityLedger(std::vector<double> capacities_mips);

    /// Restores every residual to its capacity.
    void reset();
    /// Returns false (and leaves the ledger unchanged) when f does not fit.
    bool try_allocate(ServerId k, double mips);
    void commit(const Schedule& schedule);

    const std::vector<double>& residual() const { return residual_; }
    const std::vector<double>& capacity() const { return capacity_; }
    /// Allocated / capacity per server.
    std::vector<double> utilization() const;

private:
    std::vector<double> capacity_;
    std::vector<double> residual_;
};

struct SimRun {
    SlotConfig cfg;
    std::shared_ptr<const Topology> topology;
    /// "mesa" | "no-migration" | "random" | "oracle"
    std::string scheduler = "mesa";
    std::uint64_t seed = 0;
    std::vector<Task> tasks;
    /// Slots in which tasks may arrive; carried tasks may drain past it.
    int horizon_slots = 1;
    bool deferral = true;
    OracleLimits oracle_limits;
};

struct TaskOutcome {
    TaskId task_id = 0;
    bool served = false;
    /// Slot in which the task was finalized.
    int slot = 0;
    std::optional<ServerId> server;
    double alloc_mips = 0.0;
    /// Measured from submission: waiting time plus the in-slot TRT.
    double trt_s = 0.0;
    bool migrated = false;
};

struct SlotStats {
    int slot = 0;
    int arrivals = 0;
    int carried_in = 0;
    int scheduled = 0;
    int assigned = 0;
    int violations = 0;
    int carried_out = 0;
    double scheduler_ms = 0.0;
    std::vector<double> utilization;
};

struct ViolationReport {
    int total_tasks = 0;
    int violations = 0;
    int served = 0;
    int migrations = 0;
    double violation_pct = 0.0;
    double scheduler_ms = 0.0;
    /// True unless an oracle slot hit its time budget.
    bool proved_optimal = true;
    std::vector<SlotStats> slots;
    std::vector<TaskOutcome> outcomes;
};

/// Runs the slot loop. Throws InvalidInput for a horizon that ends before
/// the last arrival, and std::logic_error if a schedule breaks capacity or
/// deadline-by-construction.
ViolationReport run(const SimRun& sim);

/// Channel rate seen by a task under the slot's uplink bandwidth.
double task_rate(const Task& task, const SlotConfig& cfg);

}  // namespace mecsim
