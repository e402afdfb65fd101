#include "mecsim/sim.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "mecsim/latency.hpp"
#include "mecsim/radio.hpp"

namespace mecsim {

CapacityLedger::CapacityLedger(std::vector<double> capacities_mips)
    : capacity_(std::move(capacities_mips)), residual_(capacity_)
{
}

void CapacityLedger::reset() { residual_ = capacity_; }

bool CapacityLedger::try_allocate(ServerId k, double mips)
{
    if (k < 0 || static_cast<std::size_t>(k) >= residual_.size()) {
        throw InvalidInput("capacity ledger: unknown server " + std::to_string(k));
    }
    auto& r = residual_[static_cast<std::size_t>(k)];
    if (!(mips > 0.0) || mips > r) {
        return false;
    }
    r -= mips;
    return true;
}

void CapacityLedger::commit(const Schedule& schedule)
{
    for (const auto& a : schedule.assignments) {
        if (!a.assigned()) {
            continue;
        }
        // A float residual can undershoot an exact fill by an ulp.
        const auto k = static_cast<std::size_t>(*a.server);
        if (!try_allocate(*a.server, a.alloc_mips)) {
            if (a.alloc_mips > residual_.at(k) + 1e-9 * capacity_.at(k)) {
                throw std::logic_error("capacity ledger: server " + std::to_string(k) + " overflows");
            }
            residual_[k] = 0.0;
        }
    }
}

std::vector<double> CapacityLedger::utilization() const
{
    std::vector<double> u(capacity_.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        u[k] = std::clamp((capacity_[k] - residual_[k]) / capacity_[k], 0.0, 1.0);
    }
    return u;
}

double task_rate(const Task& task, const SlotConfig& cfg)
{
    ChannelModel model;
    model.bandwidth_hz = cfg.bandwidth_hz;
    return channel_rate(task.radio, model);
}

namespace {

struct Pending {
    Task task;
    double waited_s = 0.0;
    bool carried = false;
};

}  // namespace

ViolationReport run(const SimRun& sim)
{
    if (!sim.topology) {
        throw InvalidInput("simulation: topology is missing");
    }
    validate(sim.cfg);
    if (sim.horizon_slots < 1) {
        throw InvalidInput("simulation: horizon_slots must be >= 1");
    }
    std::vector<std::vector<Task>> arrivals(static_cast<std::size_t>(sim.horizon_slots));
    for (const auto& t : sim.tasks) {
        validate(t);
        if (t.arrival_slot >= sim.horizon_slots) {
            throw InvalidInput("simulation: horizon of " + std::to_string(sim.horizon_slots) +
                               " slots ends before task " + std::to_string(t.id) + " arrives in slot " +
                               std::to_string(t.arrival_slot));
        }
        arrivals[static_cast<std::size_t>(t.arrival_slot)].push_back(t);
    }

    SchedulerFn scheduler;
    bool proved = true;
    std::uint64_t slot_seed = 0;
    if (sim.scheduler == "oracle") {
        scheduler = [&](const SlotProblem& p) {
            auto r = optimal_schedule(p, sim.oracle_limits);
            proved = proved && r.proved_optimal;
            return r.result;
        };
    } else if (sim.scheduler == "random") {
        scheduler = [&](const SlotProblem& p) { return random_schedule(p, slot_seed); };
    } else {
        scheduler = scheduler_by_name(sim.scheduler, sim.seed);
    }

    ViolationReport report;
    report.total_tasks = static_cast<int>(sim.tasks.size());
    CapacityLedger ledger(sim.topology->capacities());
    std::vector<Pending> carried;
    const SlotConfig& cfg = sim.cfg;

    for (int slot = 0; slot < sim.horizon_slots || !carried.empty(); ++slot) {
        SlotStats stats;
        stats.slot = slot;
        std::vector<Pending> pending = std::move(carried);
        carried.clear();
        stats.carried_in = static_cast<int>(pending.size());
        if (slot < sim.horizon_slots) {
            for (const auto& t : arrivals[static_cast<std::size_t>(slot)]) {
                pending.push_back({t, t.release_wait_s, false});
            }
            stats.arrivals = static_cast<int>(arrivals[static_cast<std::size_t>(slot)].size());
        }

        auto finalize_violated = [&](const Pending& pd, double slot_trt) {
            TaskOutcome o;
            o.task_id = pd.task.id;
            o.slot = slot;
            o.trt_s = pd.waited_s + slot_trt;
            report.outcomes.push_back(o);
            ++report.violations;
            ++stats.violations;
        };

        SlotProblem problem;
        problem.slot = slot;
        problem.topology = sim.topology;
        problem.cfg = cfg;
        std::vector<const Pending*> scheduled;
        for (const auto& pd : pending) {
            const double remaining = pd.task.deadline_s - pd.waited_s;
            if (remaining <= cfg.decision_s) {
                finalize_violated(pd, cfg.big_m_s);
                continue;
            }
            Task t = pd.task;
            t.deadline_s = remaining;
            problem.rates_bps.push_back(task_rate(t, cfg));
            problem.tasks.push_back(std::move(t));
            scheduled.push_back(&pd);
        }
        stats.scheduled = static_cast<int>(problem.tasks.size());

        ledger.reset();
        if (!problem.tasks.empty()) {
            slot_seed = sim.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(slot + 1));
            const auto t0 = std::chrono::steady_clock::now();
            SchedulerResult result = scheduler(problem);
            const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
            stats.scheduler_ms = dt.count();
            report.scheduler_ms += dt.count();

            check_schedule(problem, result.schedule);
            ledger.commit(result.schedule);

            for (std::size_t i = 0; i < problem.tasks.size(); ++i) {
                const Pending& pd = *scheduled[i];
                const Assignment& a = result.schedule.assignments[i];
                if (a.assigned()) {
                    TaskOutcome o;
                    o.task_id = pd.task.id;
                    o.served = true;
                    o.slot = slot;
                    o.server = a.server;
                    o.alloc_mips = a.alloc_mips;
                    o.trt_s = pd.waited_s + a.trt_s;
                    o.migrated = *a.server != pd.task.host;
                    report.outcomes.push_back(o);
                    ++report.served;
                    ++stats.assigned;
                    report.migrations += o.migrated ? 1 : 0;
                    continue;
                }
                const double remaining = problem.tasks[i].deadline_s;
                // Optimistic: the next slot must still leave room for some
                // processing with zero transfer time.
                if (sim.deferral && remaining - cfg.slot_s > cfg.decision_s) {
                    carried.push_back({pd.task, pd.waited_s + cfg.slot_s, true});
                    ++stats.carried_out;
                } else {
                    finalize_violated(pd, a.trt_s);
                }
            }
        }
        stats.utilization = ledger.utilization();
        report.slots.push_back(std::move(stats));
    }
    ledger.reset();

    report.proved_optimal = proved;
    if (report.served + report.violations != report.total_tasks) {
        throw std::logic_error("simulation: served + violated != total tasks");
    }
    report.violation_pct = report.total_tasks > 0 ? 100.0 * report.violations / report.total_tasks : 0.0;
    return report;
}

}  // namespace mecsim
