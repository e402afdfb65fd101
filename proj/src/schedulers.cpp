#include "mecsim/schedulers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "mecsim/latency.hpp"

namespace mecsim {

namespace {

// Allocations may sum to the capacity up to float drift.
constexpr double kCapacitySlack = 1e-9;

std::vector<double> initial_residual(const Topology& topo) { return topo.capacities(); }

Schedule finalize(const SlotProblem& p, const std::vector<std::optional<ServerId>>& choice,
                  const std::vector<double>& alloc, std::vector<double> residual)
{
    Schedule s;
    s.slot = p.slot;
    s.residual_mips = std::move(residual);
    s.assignments.reserve(p.tasks.size());
    for (std::size_t i = 0; i < p.tasks.size(); ++i) {
        const Task& t = p.tasks[i];
        Assignment a;
        a.task_id = t.id;
        a.server = choice[i];
        a.alloc_mips = choice[i] ? alloc[i] : 0.0;
        a.trt_s = total_response_time(t, choice[i], p.topo(), p.rates_bps[i], p.cfg);
        a.violated = !choice[i] || violation_flag(a.trt_s, t.deadline_s, kTimeTolerance);
        s.assignments.push_back(a);
    }
    return s;
}

/// Host first, then the other reachable servers by path distance (ties by id).
std::vector<std::vector<ServerId>> candidate_lists(const Topology& topo, bool migrate)
{
    const auto n = static_cast<ServerId>(topo.size());
    std::vector<std::vector<ServerId>> out(n);
    for (ServerId h = 0; h < n; ++h) {
        out[h].push_back(h);
        if (!migrate) {
            continue;
        }
        std::vector<ServerId> others;
        for (ServerId k = 0; k < n; ++k) {
            if (k != h && topo.reachable(h, k)) {
                others.push_back(k);
            }
        }
        std::stable_sort(others.begin(), others.end(), [&](ServerId a, ServerId b) {
            const double da = topo.distance(h, a);
            const double db = topo.distance(h, b);
            return da != db ? da < db : a < b;
        });
        out[h].insert(out[h].end(), others.begin(), others.end());
    }
    return out;
}

SchedulerResult greedy(const SlotProblem& p, bool migrate)
{
    p.validate();
    const std::size_t n = p.tasks.size();
    std::vector<double> phi(n);
    for (std::size_t i = 0; i < n; ++i) {
        phi[i] = priority(p.tasks[i], p.cfg);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SchedulerResult r;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        ++r.stats.comparisons;
        return phi[a] != phi[b] ? phi[a] < phi[b] : p.tasks[a].id < p.tasks[b].id;
    });
    const auto candidates = candidate_lists(p.topo(), migrate);
    auto residual = initial_residual(p.topo());
    std::vector<std::optional<ServerId>> choice(n);
    std::vector<double> alloc(n, 0.0);
    for (std::size_t i : order) {
        const Task& t = p.tasks[i];
        for (ServerId k : candidates[t.host]) {
            ++r.stats.servers_probed;
            const Placement pl = evaluate_placement(t, k, p.topo(), p.rates_bps[i], p.cfg);
            // Exact fill is allowed: residual >= f rather than residual > f.
            if (pl.feasible && residual[k] >= pl.mips) {
                choice[i] = k;
                alloc[i] = pl.mips;
                residual[k] -= pl.mips;
                break;
            }
        }
        if (!choice[i]) {
            r.unassigned.push_back(t.id);
        }
    }
    r.schedule = finalize(p, choice, alloc, std::move(residual));
    return r;
}

}  // namespace

void SlotProblem::validate() const
{
    if (!topology) {
        throw InvalidInput("slot problem: topology is missing");
    }
    if (rates_bps.size() != tasks.size()) {
        throw InvalidInput("slot problem: one channel rate per task is required");
    }
    mecsim::validate(cfg);
    std::unordered_set<TaskId> ids;
    for (const auto& t : tasks) {
        mecsim::validate(t);
        if (!topology->contains(t.host)) {
            throw InvalidInput("task " + std::to_string(t.id) + ": host " + std::to_string(t.host) +
                               " is not in the topology");
        }
        if (!ids.insert(t.id).second) {
            throw InvalidInput("slot problem: duplicate task id " + std::to_string(t.id));
        }
        if (!(cfg.big_m_s > t.deadline_s)) {
            throw InvalidInput("slot config: big_m_s must exceed every deadline");
        }
    }
}

double priority(const Task& task, const SlotConfig& cfg) { return task.instr_millions / std::min(task.deadline_s, cfg.slot_s); }

SchedulerResult mesa_schedule(const SlotProblem& problem) { return greedy(problem, true); }

SchedulerResult no_migration_schedule(const SlotProblem& problem) { return greedy(problem, false); }

SchedulerResult random_schedule(const SlotProblem& p, std::uint64_t seed)
{
    p.validate();
    const std::size_t n = p.tasks.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p.tasks[a].arrival_slot < p.tasks[b].arrival_slot; });
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<ServerId> pick(0, static_cast<ServerId>(p.topo().size()) - 1);
    auto residual = initial_residual(p.topo());
    std::vector<std::optional<ServerId>> choice(n);
    std::vector<double> alloc(n, 0.0);
    SchedulerResult r;
    for (std::size_t i : order) {
        const Task& t = p.tasks[i];
        const ServerId k = pick(rng);
        ++r.stats.servers_probed;
        const Placement pl = evaluate_placement(t, k, p.topo(), p.rates_bps[i], p.cfg);
        if (pl.feasible && residual[k] >= pl.mips) {
            choice[i] = k;
            alloc[i] = pl.mips;
            residual[k] -= pl.mips;
        } else {
            r.unassigned.push_back(t.id);
        }
    }
    r.schedule = finalize(p, choice, alloc, std::move(residual));
    return r;
}

Schedule make_schedule(const SlotProblem& p, const std::vector<std::optional<ServerId>>& choice)
{
    if (choice.size() != p.tasks.size()) {
        throw InvalidInput("make_schedule: one choice per task is required");
    }
    auto residual = initial_residual(p.topo());
    std::vector<double> alloc(p.tasks.size(), 0.0);
    for (std::size_t i = 0; i < p.tasks.size(); ++i) {
        if (!choice[i]) {
            continue;
        }
        const ServerId k = *choice[i];
        p.topo().server(k);
        const Placement pl = evaluate_placement(p.tasks[i], k, p.topo(), p.rates_bps[i], p.cfg);
        if (!pl.feasible) {
            throw InvalidInput("make_schedule: server " + std::to_string(k) + " is infeasible for task " +
                               std::to_string(p.tasks[i].id));
        }
        alloc[i] = pl.mips;
        residual[k] -= pl.mips;
        if (residual[k] < -kCapacitySlack * p.topo().server(k).capacity_mips) {
            throw InvalidInput("make_schedule: server " + std::to_string(k) + " is over capacity");
        }
    }
    return finalize(p, choice, alloc, std::move(residual));
}

void check_schedule(const SlotProblem& p, const Schedule& s)
{
    const auto n = p.topo().size();
    std::vector<double> used(n, 0.0);
    std::unordered_set<TaskId> seen;
    std::unordered_set<TaskId> expected;
    for (const auto& t : p.tasks) {
        expected.insert(t.id);
    }
    for (std::size_t i = 0; i < s.assignments.size(); ++i) {
        const auto& a = s.assignments[i];
        if (!seen.insert(a.task_id).second) {
            throw std::logic_error("task " + std::to_string(a.task_id) + " is scheduled twice");
        }
        if (!expected.count(a.task_id)) {
            throw std::logic_error("task " + std::to_string(a.task_id) + " is not part of the slot");
        }
        if (!a.assigned()) {
            continue;
        }
        if (!(a.alloc_mips > 0.0)) {
            throw std::logic_error("task " + std::to_string(a.task_id) + " is assigned without an allocation");
        }
        used.at(static_cast<std::size_t>(*a.server)) += a.alloc_mips;
        const auto it = std::find_if(p.tasks.begin(), p.tasks.end(), [&](const Task& t) { return t.id == a.task_id; });
        // Recomputed from the allocation rather than trusting trt_s.
        const std::size_t idx = static_cast<std::size_t>(it - p.tasks.begin());
        const double rate = p.rates_bps[idx];
        const double trt = p.cfg.decision_s + upload_time(*it, rate, p.cfg) +
                           migration_time(*it, it->host, *a.server, p.topo(), p.cfg) + it->instr_millions / a.alloc_mips +
                           response_time(*it, *a.server, p.topo(), rate, p.cfg);
        if (violation_flag(trt, it->deadline_s, kTimeTolerance) || violation_flag(a.trt_s, it->deadline_s, kTimeTolerance) ||
            a.violated) {
            throw std::logic_error("assigned task " + std::to_string(a.task_id) + " misses its deadline");
        }
    }
    if (seen.size() != expected.size()) {
        throw std::logic_error("schedule does not cover every task of the slot");
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double cap = p.topo().servers()[k].capacity_mips;
        if (used[k] > cap * (1.0 + kCapacitySlack)) {
            throw std::logic_error("server " + std::to_string(k) + " is over capacity: " + std::to_string(used[k]) +
                                   " > " + std::to_string(cap) + " MIPS");
        }
    }
}

SchedulerFn scheduler_by_name(std::string_view name, std::uint64_t seed)
{
    if (name == "mesa") {
        return [](const SlotProblem& p) { return mesa_schedule(p); };
    }
    if (name == "no-migration") {
        return [](const SlotProblem& p) { return no_migration_schedule(p); };
    }
    if (name == "random") {
        return [seed](const SlotProblem& p) { return random_schedule(p, seed); };
    }
    throw InvalidInput("unknown scheduler '" + std::string(name) + "' (expected mesa, no-migration or random)");
}

}  // namespace mecsim
