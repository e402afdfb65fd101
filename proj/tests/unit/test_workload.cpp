#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "mecsim/workload.hpp"
#include "test_helpers.hpp"

using namespace mecsim;
using namespace mecsim::testing;

namespace {

Topology grid5()
{
    GeneratedTopologySpec ts;
    ts.n_servers = 5;
    ts.capacity_set_mips = {1e6};
    ts.seed = 3;
    return generate_topology(ts);
}

}  // namespace

TEST(AppMix, DefaultProfiles)
{
    const auto mix = default_app_mix();
    ASSERT_EQ(mix.size(), 5u);
    EXPECT_EQ(mix[0].name, "augmented-reality");
    EXPECT_DOUBLE_EQ(mix[0].deadline_min_s, 0.075);
    EXPECT_DOUBLE_EQ(mix[0].deadline_max_s, 0.075);
    EXPECT_DOUBLE_EQ(mix[1].size_max_bits, 8e7);
    EXPECT_DOUBLE_EQ(mix[2].size_min_bits, 7.2e5);
    EXPECT_DOUBLE_EQ(mix[3].deadline_max_s, 0.8);
    EXPECT_DOUBLE_EQ(mix[4].size_min_bits, 8e5);
    EXPECT_DOUBLE_EQ(mix[4].size_max_bits, 8e6);
    for (const auto& p : mix) {
        EXPECT_DOUBLE_EQ(p.alpha, 0.1);
        EXPECT_DOUBLE_EQ(p.weight, 0.2);
    }
}

TEST(AppMix, SamplesStayInRange)
{
    std::mt19937_64 rng(1);
    const auto mix = default_app_mix();
    std::map<std::string, int> counts;
    for (int i = 0; i < 10000; ++i) {
        const auto s = app_profile_sample(mix, rng);
        ++counts[s.profile];
        const auto& p = *std::find_if(mix.begin(), mix.end(), [&](const AppProfile& x) { return x.name == s.profile; });
        EXPECT_GE(s.deadline_s, p.deadline_min_s);
        EXPECT_LE(s.deadline_s, p.deadline_max_s);
        EXPECT_GE(s.size_bits, p.size_min_bits);
        EXPECT_LE(s.size_bits, p.size_max_bits);
        if (s.profile == "augmented-reality") {
            EXPECT_EQ(s.deadline_s, 0.075);
        }
    }
    for (const auto& [name, n] : counts) {
        // Binomial(1e4, 0.2): sd = 40.
        EXPECT_NEAR(n, 2000, 200) << name;
    }
}

TEST(Workload, DeterministicPerSeed)
{
    const auto topo = grid5();
    const auto a = generate(preset_workload(200, 5), topo);
    const auto b = generate(preset_workload(200, 5), topo);
    EXPECT_EQ(tasks_to_json(a), tasks_to_json(b));
    EXPECT_NE(tasks_to_json(generate(preset_workload(200, 6), topo)), tasks_to_json(a));
}

TEST(Workload, GainFollowsHostDistance)
{
    const auto topo = grid5();
    const auto w = preset_workload(500, 9);
    for (const auto& t : generate(w, topo)) {
        EXPECT_GE(t.mu_distance_m, 0.0);
        EXPECT_NEAR(t.radio.gain, gain_from_distance(t.mu_distance_m, w.channel), 1e-15);
        EXPECT_TRUE(t.response_ratio.has_value());
    }
}

TEST(Workload, NearestServerBruteForce)
{
    const auto topo = grid5();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1000);
    for (int i = 0; i < 2000; ++i) {
        const double x = u(rng), y = u(rng) / 2;
        const ServerId k = nearest_server(topo, x, y);
        for (const auto& s : topo.servers()) {
            EXPECT_LE(std::hypot(topo.server(k).x_m - x, topo.server(k).y_m - y), std::hypot(s.x_m - x, s.y_m - y));
        }
    }
}

TEST(Workload, InstructionMeanWithinThreeStandardErrors)
{
    const auto topo = grid5();
    const auto tasks = generate(preset_workload(10000, 11), topo);
    double sum = 0, sq = 0;
    for (const auto& t : tasks) {
        sum += t.instr_millions;
        sq += t.instr_millions * t.instr_millions;
        EXPECT_GE(t.instr_millions, 1.0);
    }
    const double mean = sum / 1e4;
    EXPECT_NEAR(mean, 23000.0, 3.0 * 3500.0 / 100.0);
    EXPECT_NEAR(std::sqrt(sq / 1e4 - mean * mean), 3500.0, 150.0);
}

TEST(Workload, TruncationKeepsTheFloor)
{
    auto w = preset_workload(2000, 4);
    w.instr_mean_mi = 10.0;
    w.instr_stddev_mi = 20.0;
    w.instr_floor_mi = 5.0;
    for (const auto& t : generate(w, grid5())) {
        EXPECT_GE(t.instr_millions, 5.0);
    }
}

TEST(Workload, HotspotConcentrates)
{
    const auto topo = grid5();
    auto w = preset_workload(4000, 8);
    w.placement = MuPlacement::hotspot;
    w.hotspot.n_centers = 2;
    w.hotspot.concentration = 0.8;
    w.hotspot.spread_m = 20.0;
    int near_centers = 0;
    std::map<ServerId, int> per_host;
    for (const auto& t : generate(w, topo)) {
        ++per_host[t.host];
        for (ServerId c : {0, 1}) {
            if (t.host == c && t.mu_distance_m < 80.0) {
                ++near_centers;
                break;
            }
        }
    }
    // 80% clustered plus a little uniform spill-over.
    EXPECT_GT(near_centers, static_cast<int>(0.78 * 4000));
    EXPECT_GT(per_host[0] + per_host[1], 3200);

    w.placement = MuPlacement::uniform;
    std::map<ServerId, int> uniform_host;
    for (const auto& t : generate(w, topo)) {
        ++uniform_host[t.host];
    }
    EXPECT_LT(uniform_host[0] + uniform_host[1], 2400);
}

TEST(Workload, ExplicitHotspotCenters)
{
    auto w = preset_workload(500, 8);
    w.placement = MuPlacement::hotspot;
    w.hotspot.centers = {{990.0, 490.0}};
    w.hotspot.concentration = 1.0;
    w.hotspot.spread_m = 5.0;
    for (const auto& t : generate(w, grid5())) {
        EXPECT_EQ(t.host, nearest_server(grid5(), 990.0, 490.0));
    }
}

TEST(Workload, BatchArrivalsSpreadOverSlots)
{
    auto w = preset_workload(3000, 1);
    w.arrival.arrival_slots = 3;
    std::map<int, int> per_slot;
    for (const auto& t : generate(w, grid5())) {
        ++per_slot[t.arrival_slot];
        EXPECT_EQ(t.release_wait_s, 0.0);
    }
    ASSERT_EQ(per_slot.size(), 3u);
    for (const auto& [slot, n] : per_slot) {
        EXPECT_NEAR(n, 1000, 120);
    }
}

TEST(Workload, ContinuousArrivalsWaitForTheNextBoundary)
{
    auto w = preset_workload(2000, 2);
    w.arrival.mode = ArrivalMode::continuous;
    w.arrival.window_s = 10.0;
    const double tau = 1.5;
    const auto tasks = generate(w, grid5(), tau);
    double wait_sum = 0;
    for (const auto& t : tasks) {
        EXPECT_GE(t.release_wait_s, 0.0);
        EXPECT_LT(t.release_wait_s, tau);
        const double submitted = t.arrival_slot * tau - t.release_wait_s;
        EXPECT_GE(submitted, -1e-12);
        EXPECT_LE(submitted, 10.0 + 1e-12);
        wait_sum += t.release_wait_s;
    }
    EXPECT_NEAR(wait_sum / 2000, tau / 2, 0.05);
    EXPECT_EQ(horizon_for(tasks), 8);
}

TEST(Workload, JsonRoundTrip)
{
    auto w = preset_workload(50, 3);
    w.arrival.mode = ArrivalMode::continuous;
    w.arrival.window_s = 4.0;
    const auto tasks = generate(w, grid5());
    const auto text = tasks_to_json(tasks);
    EXPECT_EQ(tasks_to_json(tasks_from_json(text)), text);
    const auto path = std::filesystem::temp_directory_path() / "mecsim_tasks_roundtrip.json";
    save_tasks(tasks, path);
    EXPECT_EQ(tasks_to_json(load_tasks(path)), text);
    std::filesystem::remove(path);
    EXPECT_THROW(tasks_from_json("{\"tasks\": [{\"id\": 1}]}"), InvalidInput);
}

TEST(Workload, Validation)
{
    const auto topo = grid5();
    auto w = preset_workload(10, 1);
    w.app_mix[0].weight = 0.5;
    EXPECT_THROW(generate(w, topo), InvalidInput);
    w = preset_workload(10, 1);
    w.n_tasks = -1;
    EXPECT_THROW(generate(w, topo), InvalidInput);
    w = preset_workload(10, 1);
    w.placement = MuPlacement::hotspot;
    w.hotspot.concentration = 1.5;
    EXPECT_THROW(generate(w, topo), InvalidInput);
    w = preset_workload(10, 1);
    w.arrival.mode = ArrivalMode::continuous;
    w.arrival.window_s = 0.0;
    EXPECT_THROW(generate(w, topo), InvalidInput);
    w = preset_workload(10, 1);
    EXPECT_THROW(generate(w, topo, 0.0), InvalidInput);
    EXPECT_TRUE(generate(preset_workload(0, 1), topo).empty());
}
