#include "mecsim/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mecsim/latency.hpp"

namespace mecsim {

namespace {

struct Option {
    ServerId server;
    double mips;
};

// Depth-first branch and bound over tasks in canonical order. Among leaves
// with equal (violations, migrations) the first one reached wins, which
// makes the tie-break the lexicographic order of (task rank, option rank).
class Search {
public:
    Search(const SlotProblem& p, const OracleLimits& limits, const OracleOptions& opts)
        : p_(p), limits_(limits), opts_(opts), residual_(p.topo().capacities())
    {
        const std::size_t n = p.tasks.size();
        std::vector<double> host_mips(n, std::numeric_limits<double>::infinity());
        options_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Task& t = p.tasks[i];
            for (ServerId k = 0; k < static_cast<ServerId>(p.topo().size()); ++k) {
                const Placement pl = evaluate_placement(t, k, p.topo(), p.rates_bps[i], p.cfg);
                if (pl.feasible && pl.mips <= p.topo().server(k).capacity_mips) {
                    options_[i].push_back({k, pl.mips});
                    if (k == t.host) {
                        host_mips[i] = pl.mips;
                    }
                }
            }
            std::sort(options_[i].begin(), options_[i].end(), [](const Option& a, const Option& b) {
                return a.mips != b.mips ? a.mips < b.mips : a.server < b.server;
            });
        }
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), 0);
        std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            if (host_mips[a] != host_mips[b]) {
                return host_mips[a] > host_mips[b];
            }
            return p.tasks[a].id < p.tasks[b].id;
        });
        current_.assign(n, std::nullopt);
        best_violations_ = static_cast<int>(n) + 1;
        best_migrations_ = std::numeric_limits<int>::max();
        start_ = std::chrono::steady_clock::now();
    }

    /// Starts from a known feasible assignment. Leaves that only tie it
    /// still replace it, so the canonical tie-break is unaffected.
    void warm_start(const std::vector<std::optional<ServerId>>& choice, int violations, int migrations)
    {
        best_ = choice;
        best_violations_ = violations;
        best_migrations_ = migrations;
        seeded_ = true;
    }

    void run() { descend(0, 0, 0); }

    bool timed_out() const { return timed_out_; }
    std::int64_t nodes() const { return nodes_; }
    int best_migrations() const { return best_migrations_; }
    const std::vector<std::optional<ServerId>>& best() const { return best_; }

private:
    bool budget_exhausted()
    {
        if (timed_out_) {
            return true;
        }
        if ((nodes_ & 0xFFF) == 0) {
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
            timed_out_ = elapsed.count() > limits_.time_budget_s;
        }
        return timed_out_;
    }

    /// Remaining tasks that cannot all be placed given current residuals.
    int violation_lower_bound(std::size_t depth)
    {
        scratch_.clear();
        int hopeless = 0;
        for (std::size_t d = depth; d < order_.size(); ++d) {
            double cheapest = std::numeric_limits<double>::infinity();
            for (const auto& o : options_[order_[d]]) {
                if (o.mips <= residual_[o.server]) {
                    cheapest = o.mips;
                    break;  // options are sorted by mips
                }
            }
            if (std::isinf(cheapest)) {
                ++hopeless;
            } else {
                scratch_.push_back(cheapest);
            }
        }
        std::sort(scratch_.begin(), scratch_.end());
        double room = std::accumulate(residual_.begin(), residual_.end(), 0.0);
        int fit = 0;
        for (double f : scratch_) {
            if (f > room) {
                break;
            }
            room -= f;
            ++fit;
        }
        return hopeless + static_cast<int>(scratch_.size()) - fit;
    }

    bool dominated(int violations, int migrations) const
    {
        if (seeded_) {
            return violations > best_violations_ ||
                   (violations == best_violations_ && migrations > best_migrations_);
        }
        return violations > best_violations_ ||
               (violations == best_violations_ && migrations >= best_migrations_);
    }

    void descend(std::size_t depth, int violations, int migrations)
    {
        ++nodes_;
        if (budget_exhausted()) {
            return;
        }
        if (opts_.pruning) {
            if (dominated(violations + violation_lower_bound(depth), migrations)) {
                return;
            }
        }
        if (depth == order_.size()) {
            if (!dominated(violations, migrations)) {
                best_violations_ = violations;
                best_migrations_ = migrations;
                best_ = current_;
                seeded_ = false;
            }
            return;
        }
        const std::size_t i = order_[depth];
        const ServerId host = p_.tasks[i].host;
        for (const auto& o : options_[i]) {
            if (o.mips > residual_[o.server]) {
                continue;
            }
            residual_[o.server] -= o.mips;
            current_[i] = o.server;
            descend(depth + 1, violations, migrations + (o.server != host ? 1 : 0));
            current_[i].reset();
            residual_[o.server] += o.mips;
            if (timed_out_) {
                return;
            }
        }
        descend(depth + 1, violations + 1, migrations);
    }

    const SlotProblem& p_;
    OracleLimits limits_;
    OracleOptions opts_;
    std::vector<double> residual_;
    std::vector<std::vector<Option>> options_;
    std::vector<std::size_t> order_;
    std::vector<std::optional<ServerId>> current_;
    std::vector<std::optional<ServerId>> best_;
    std::vector<double> scratch_;
    int best_violations_ = 0;
    int best_migrations_ = 0;
    std::int64_t nodes_ = 0;
    bool timed_out_ = false;
    bool seeded_ = false;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

OracleResult optimal_schedule(const SlotProblem& problem, const OracleLimits& limits, const OracleOptions& options)
{
    problem.validate();
    const int n_tasks = static_cast<int>(problem.tasks.size());
    const int n_servers = static_cast<int>(problem.topo().size());
    if (n_tasks > limits.max_tasks) {
        throw InvalidInput("oracle: instance has " + std::to_string(n_tasks) + " tasks; max_tasks must be at least " +
                           std::to_string(n_tasks));
    }
    if (n_servers > limits.max_servers) {
        throw InvalidInput("oracle: instance has " + std::to_string(n_servers) +
                           " servers; max_servers must be at least " + std::to_string(n_servers));
    }
    Search search(problem, limits, options);
    if (options.warm_start) {
        const auto greedy = mesa_schedule(problem);
        std::vector<std::optional<ServerId>> choice;
        for (const auto& a : greedy.schedule.assignments) {
            choice.push_back(a.server);
        }
        search.warm_start(choice, greedy.violations(), greedy.schedule.migrations(problem.tasks));
    }
    search.run();
    OracleResult out;
    out.proved_optimal = !search.timed_out();
    out.nodes = search.nodes();
    auto choice = search.best();
    if (choice.empty()) {
        // Timed out before the first leaf: leave everything unassigned.
        choice.assign(problem.tasks.size(), std::nullopt);
    }
    out.result.schedule = make_schedule(problem, choice);
    out.result.stats.servers_probed = out.nodes;
    for (std::size_t i = 0; i < choice.size(); ++i) {
        if (!choice[i]) {
            out.result.unassigned.push_back(problem.tasks[i].id);
        }
    }
    out.migrations = out.result.schedule.migrations(problem.tasks);
    return out;
}

GapRecord gap_report(const SchedulerResult& heuristic, const SchedulerResult& optimal)
{
    std::multiset<TaskId> a, b;
    for (const auto& x : heuristic.schedule.assignments) {
        a.insert(x.task_id);
    }
    for (const auto& x : optimal.schedule.assignments) {
        b.insert(x.task_id);
    }
    if (a != b) {
        throw InvalidInput("gap_report: results cover different task sets");
    }
    GapRecord g;
    g.tasks = static_cast<int>(a.size());
    g.heuristic_violations = heuristic.violations();
    g.optimal_violations = optimal.violations();
    if (g.heuristic_violations < g.optimal_violations) {
        throw std::logic_error("gap_report: heuristic (" + std::to_string(g.heuristic_violations) +
                               ") beats the optimum (" + std::to_string(g.optimal_violations) + ")");
    }
    if (g.tasks > 0) {
        g.heuristic_pct = 100.0 * g.heuristic_violations / g.tasks;
        g.optimal_pct = 100.0 * g.optimal_violations / g.tasks;
    }
    g.absolute_gap = g.heuristic_pct - g.optimal_pct;
    g.relative_gap = g.heuristic_violations > 0
                         ? static_cast<double>(g.heuristic_violations - g.optimal_violations) / g.heuristic_violations
                         : 0.0;
    return g;
}

}  // namespace mecsim
