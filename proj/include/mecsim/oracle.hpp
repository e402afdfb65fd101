#pragma once

#include <string>

#include "mecsim/schedulers.hpp"

namespace mecsim {

struct OracleLimits {
    int max_tasks = 12;
    int max_servers = 4;
    double time_budget_s = 60.0;
};

struct OracleOptions {
    /// Disable to enumerate every assignment (soundness checks only).
    bool pruning = true;
    /// Seed the incumbent with the greedy schedule, so a search cut short
    /// by the time budget never reports worse than mesa.
    bool warm_start = true;
};

struct OracleResult {
    SchedulerResult result;
    /// False when the time budget expired before the search finished; the
    /// result is then the best assignment found so far.
    bool proved_optimal = false;
    std::int64_t nodes = 0;
    int migrations = 0;
};

/// Exact minimizer of the violation count over all assignments that
/// respect capacity and single-server placement. Ties are broken by fewer
/// migrations, then by search order: tasks by descending demand on their
/// host (then id), each task's servers by ascending demand (then id), with
/// unassigned last. Throws InvalidInput when the instance exceeds the limits.
OracleResult optimal_schedule(const SlotProblem& problem, const OracleLimits& limits = {},
                              const OracleOptions& options = {});

struct GapRecord {
    int tasks = 0;
    int heuristic_violations = 0;
    int optimal_violations = 0;
    double heuristic_pct = 0.0;
    double optimal_pct = 0.0;
    /// Percentage points.
    double absolute_gap = 0.0;
    /// (heuristic - optimal) / heuristic; 0 when the heuristic has none.
    double relative_gap = 0.0;
};

/// Throws InvalidInput when the results cover different tasks, and
/// std::logic_error when the heuristic beats the optimum.
GapRecord gap_report(const SchedulerResult& heuristic, const SchedulerResult& optimal);

}  // namespace mecsim
