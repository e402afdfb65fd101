#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "mecsim/latency.hpp"
#include "mecsim/oracle.hpp"
#include "mecsim/sim.hpp"
#include "test_helpers.hpp"

using namespace mecsim;
using namespace mecsim::testing;

namespace {

SimRun base_run(std::vector<Task> tasks, std::shared_ptr<const Topology> topo)
{
    SimRun sim;
    sim.cfg.slot_s = 2.0;
    sim.cfg.decision_s = 0.0;
    sim.cfg.alpha = 0.0;
    sim.topology = std::move(topo);
    sim.tasks = std::move(tasks);
    sim.horizon_slots = horizon_for(sim.tasks);
    return sim;
}

}  // namespace

TEST(CapacityLedger, AllocateResetCommit)
{
    CapacityLedger l({10, 5});
    EXPECT_TRUE(l.try_allocate(0, 6));
    EXPECT_FALSE(l.try_allocate(0, 4.5));
    EXPECT_TRUE(l.try_allocate(0, 4));
    EXPECT_EQ(l.residual()[0], 0.0);
    EXPECT_DOUBLE_EQ(l.utilization()[0], 1.0);
    EXPECT_DOUBLE_EQ(l.utilization()[1], 0.0);
    l.reset();
    EXPECT_EQ(l.residual(), (std::vector<double>{10, 5}));
    EXPECT_THROW(l.try_allocate(2, 1), InvalidInput);

    Schedule s;
    s.assignments.push_back({1, 1, 3.0, 0.5, false});
    s.assignments.push_back({2, std::nullopt, 0.0, 1e4, true});
    l.commit(s);
    EXPECT_DOUBLE_EQ(l.residual()[1], 2.0);
    s.assignments.push_back({3, 1, 2.5, 0.5, false});
    l.reset();
    EXPECT_THROW(l.commit(s), std::logic_error);
}

// One server fits two of the four slot-0 arrivals. The two left over are
// deferred with one second of deadline left, which doubles their demand,
// so only one of them fits in slot 1.
TEST(Sim, TwoSlotHandTrace)
{
    auto topo = line_topology({1.0}, {});
    std::vector<Task> tasks;
    for (int i = 0; i < 4; ++i) {
        tasks.push_back(make_task(i, 0, 1e-300, 1.0, 3.0));
    }
    auto sim = base_run(tasks, topo);
    const auto r = run(sim);
    EXPECT_EQ(r.total_tasks, 4);
    EXPECT_EQ(r.served, 3);
    EXPECT_EQ(r.violations, 1);
    ASSERT_EQ(r.slots.size(), 2u);
    EXPECT_EQ(r.slots[0].assigned, 2);
    EXPECT_EQ(r.slots[0].carried_out, 2);
    EXPECT_EQ(r.slots[1].carried_in, 2);
    EXPECT_EQ(r.slots[1].assigned, 1);
    EXPECT_EQ(r.slots[1].violations, 1);

    std::map<TaskId, TaskOutcome> by_id;
    for (const auto& o : r.outcomes) {
        by_id[o.task_id] = o;
    }
    EXPECT_DOUBLE_EQ(by_id[0].alloc_mips, 0.5);
    EXPECT_EQ(by_id[0].slot, 0);
    EXPECT_DOUBLE_EQ(by_id[2].alloc_mips, 1.0);
    EXPECT_EQ(by_id[2].slot, 1);
    EXPECT_NEAR(by_id[2].trt_s, 3.0, 1e-12);
    EXPECT_FALSE(by_id[3].served);
    EXPECT_EQ(by_id[3].slot, 1);

    sim.deferral = false;
    const auto off = run(sim);
    EXPECT_EQ(off.violations, 2);
    EXPECT_EQ(off.slots.size(), 1u);
}

TEST(Sim, SingleSlotMatchesScheduler)
{
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const auto p = small_instance(seed, 3, 20);
        SimRun sim;
        sim.cfg = p.cfg;
        sim.topology = p.topology;
        sim.tasks = p.tasks;
        sim.deferral = false;
        sim.scheduler = "mesa";
        EXPECT_EQ(run(sim).violations, mesa_schedule(p).violations());
        sim.scheduler = "no-migration";
        EXPECT_EQ(run(sim).violations, no_migration_schedule(p).violations());
    }
}

TEST(Sim, OracleSchedulerMatchesOptimum)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto p = small_instance(seed);
        SimRun sim;
        sim.cfg = p.cfg;
        sim.topology = p.topology;
        sim.tasks = p.tasks;
        sim.scheduler = "oracle";
        const auto r = run(sim);
        EXPECT_EQ(r.violations, optimal_schedule(p).result.violations());
        EXPECT_TRUE(r.proved_optimal);
    }
}

TEST(Sim, ConservationAcrossModes)
{
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        GeneratedTopologySpec ts;
        ts.n_servers = 4;
        ts.capacity_set_mips = {4e4, 6e4};
        ts.link_rate_bps = 1e10;
        ts.seed = seed;
        auto topo = std::make_shared<const Topology>(generate_topology(ts));
        auto w = preset_workload(80, seed);
        w.app_mix = {{"tolerant", 1.0, 6.0, 8e5, 8e6, 0.1, 1.0}};
        w.arrival.mode = seed % 2 ? ArrivalMode::continuous : ArrivalMode::batch;
        w.arrival.window_s = 9.0;
        w.arrival.arrival_slots = 4;
        SimRun sim;
        sim.cfg = preset_slot_config();
        sim.cfg.slot_s = 1.0;
        sim.topology = topo;
        sim.tasks = generate(w, *topo, sim.cfg.slot_s);
        sim.horizon_slots = horizon_for(sim.tasks);
        for (const char* s : {"mesa", "no-migration", "random"}) {
            sim.scheduler = s;
            sim.seed = seed;
            const auto r = run(sim);
            EXPECT_EQ(r.served + r.violations, r.total_tasks);
            EXPECT_EQ(r.outcomes.size(), sim.tasks.size());
            int carried = 0;
            for (const auto& st : r.slots) {
                EXPECT_EQ(st.carried_in, carried);
                EXPECT_EQ(st.scheduled + (st.carried_in + st.arrivals - st.scheduled), st.carried_in + st.arrivals);
                carried = st.carried_out;
                for (double u : st.utilization) {
                    EXPECT_LE(u, 1.0 + 1e-12);
                }
            }
            EXPECT_EQ(carried, 0);
            for (const auto& o : r.outcomes) {
                if (o.served) {
                    const auto& t = *std::find_if(sim.tasks.begin(), sim.tasks.end(),
                                                  [&](const Task& x) { return x.id == o.task_id; });
                    EXPECT_LE(o.trt_s, t.deadline_s + kTimeTolerance);
                }
            }
        }
    }
}

TEST(Sim, ReleaseWaitCountsAgainstDeadline)
{
    auto topo = line_topology({100.0}, {});
    auto t = make_task(1, 0, 1e-300, 1.0, 1.5);
    t.release_wait_s = 1.0;
    auto sim = base_run({t}, topo);
    const auto r = run(sim);
    ASSERT_EQ(r.served, 1);
    // Remaining 0.5 s: f = 2 MIPS, TRT from submission = 1.5 s.
    EXPECT_DOUBLE_EQ(r.outcomes[0].alloc_mips, 2.0);
    EXPECT_NEAR(r.outcomes[0].trt_s, 1.5, 1e-12);

    t.release_wait_s = 1.5;
    sim.tasks = {t};
    const auto late = run(sim);
    EXPECT_EQ(late.violations, 1);
    EXPECT_EQ(late.slots[0].scheduled, 0);
}

TEST(Sim, RandomIsSeeded)
{
    const auto p = small_instance(4, 3, 12);
    SimRun sim;
    sim.cfg = p.cfg;
    sim.topology = p.topology;
    sim.tasks = p.tasks;
    sim.scheduler = "random";
    sim.seed = 99;
    const auto a = run(sim);
    const auto b = run(sim);
    ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
        EXPECT_EQ(a.outcomes[i].task_id, b.outcomes[i].task_id);
        EXPECT_EQ(a.outcomes[i].server, b.outcomes[i].server);
    }
}

TEST(Sim, DeferralRarelyHurts)
{
    // Deferral is not a guaranteed improvement for greedy scheduling, since
    // a carried task competes with the next slot's arrivals. On average it
    // should help when deadlines exceed the slot.
    int helped = 0, hurt = 0;
    double on_total = 0, off_total = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        GeneratedTopologySpec ts;
        ts.n_servers = 3;
        ts.capacity_set_mips = {3e4, 5e4};
        ts.link_rate_bps = 1e10;
        ts.seed = seed;
        auto topo = std::make_shared<const Topology>(generate_topology(ts));
        auto w = preset_workload(40, seed);
        w.app_mix = {{"tolerant", 2.0, 6.0, 8e5, 8e6, 0.1, 1.0}};
        w.arrival.arrival_slots = 3;
        SimRun sim;
        sim.cfg = preset_slot_config();
        sim.cfg.slot_s = 1.0;
        sim.topology = topo;
        sim.tasks = generate(w, *topo, 1.0);
        sim.horizon_slots = horizon_for(sim.tasks);
        const int on = run(sim).violations;
        sim.deferral = false;
        const int off = run(sim).violations;
        helped += on < off;
        hurt += on > off;
        on_total += on;
        off_total += off;
    }
    EXPECT_LT(on_total, off_total);
    EXPECT_GT(helped, hurt);
}

TEST(Sim, Validation)
{
    auto topo = line_topology({10.0}, {});
    auto t = make_task(1, 0, 1, 1, 1.0);
    t.arrival_slot = 3;
    auto sim = base_run({t}, topo);
    sim.horizon_slots = 2;
    try {
        run(sim);
        FAIL();
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("slot 3"), std::string::npos);
    }
    sim.horizon_slots = 0;
    EXPECT_THROW(run(sim), InvalidInput);
    sim.horizon_slots = 4;
    sim.topology.reset();
    EXPECT_THROW(run(sim), InvalidInput);
    sim.topology = topo;
    sim.scheduler = "fifo";
    EXPECT_THROW(run(sim), InvalidInput);
}

TEST(Sim, EmptyWorkload)
{
    auto sim = base_run({}, line_topology({10.0}, {}));
    const auto r = run(sim);
    EXPECT_EQ(r.total_tasks, 0);
    EXPECT_EQ(r.violation_pct, 0.0);
}
