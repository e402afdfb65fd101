#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mecsim/radio.hpp"
#include "mecsim/topology.hpp"
#include "mecsim/types.hpp"

namespace mecsim {

inline constexpr double kBitsPerMegabyte = 8e6;

struct AppProfile {
    std::string name;
    double deadline_min_s = 0.1;
    double deadline_max_s = 0.1;
    double size_min_bits = 1e6;
    double size_max_bits = 1e6;
    double alpha = 0.1;
    double weight = 1.0;
};

/// Latency-sensitive application classes: augmented reality, online gaming,
/// face recognition, web acceleration and big-data analysis.
std::vector<AppProfile> default_app_mix();

struct AppSample {
    std::string profile;
    double deadline_s = 0.0;
    double size_bits = 0.0;
    double alpha = 0.0;
};

/// Draws a profile by weight, then deadline and size uniformly in range.
AppSample app_profile_sample(const std::vector<AppProfile>& mix, std::mt19937_64& rng);

enum class MuPlacement { uniform, hotspot };

struct HotspotSpec {
    /// Explicit centers; when empty, the first n_centers servers are used.
    std::vector<std::pair<double, double>> centers;
    int n_centers = 2;
    /// Fraction of MUs drawn around a center.
    double concentration = 0.8;
    /// Standard deviation of the radial scatter around a center.
    double spread_m = 60.0;
};

enum class ArrivalMode {
    /// Tasks land on slot boundaries, uniformly over arrival_slots slots.
    batch,
    /// Submission times uniform over window_s; each waits for the next
    /// decision boundary of the slot grid.
    continuous,
};

struct ArrivalSpec {
    ArrivalMode mode = ArrivalMode::batch;
    int arrival_slots = 1;
    double window_s = 0.0;
};

struct WorkloadSpec {
    int n_tasks = 0;
    double width_m = 1000.0;
    double height_m = 500.0;
    double instr_mean_mi = 23000.0;
    double instr_stddev_mi = 3500.0;
    double instr_floor_mi = 1.0;
    std::vector<AppProfile> app_mix = default_app_mix();
    MuPlacement placement = MuPlacement::uniform;
    HotspotSpec hotspot;
    ArrivalSpec arrival;
    RadioParams radio;  ///< gain is replaced by the path-loss model
    ChannelModel channel;
    std::uint64_t seed = 1;
};

void validate(const WorkloadSpec& spec);

/// Deterministic given (spec, topo, slot_s). slot_s only matters for
/// continuous arrivals, where it maps submission times to slots.
std::vector<Task> generate(const WorkloadSpec& spec, const Topology& topo, double slot_s = 2.0);

/// Number of slots needed to cover every arrival of a generated workload.
int horizon_for(const std::vector<Task>& tasks);

/// Nearest server by Euclidean distance, ties by lower id.
ServerId nearest_server(const Topology& topo, double x_m, double y_m);

std::string tasks_to_json(const std::vector<Task>& tasks);
std::vector<Task> tasks_from_json(const std::string& json);
void save_tasks(const std::vector<Task>& tasks, const std::filesystem::path& path);
std::vector<Task> load_tasks(const std::filesystem::path& path);

}  // namespace mecsim
