#pragma once

// Domain types shared by every module: tasks, servers, slot constants and
// the per-slot schedule produced by a scheduler.
//
// Units are fixed throughout the library: bits, bits/s, million
// instructions (MI), MIPS, meters and seconds.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mecsim {

using TaskId = std::int64_t;
using ServerId = int;

/// Raised when an input violates a documented precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a processing budget is not strictly positive.
class InfeasibleBudget : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when two servers lie in different connected components.
class NoPath : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RadioParams {
    double tx_power_w = 1.5;
    double gain = 1.0;
    double interference_w = 0.0;
    double noise_w = 1e-6;
};

struct Task {
    TaskId id = 0;
    ServerId host = 0;
    double data_size_bits = 0.0;
    double instr_millions = 0.0;
    /// Relative to the moment the task reaches its first decision boundary
    /// minus release_wait_s; see remaining_deadline().
    double deadline_s = 0.0;
    int arrival_slot = 0;
    double mu_distance_m = 0.0;
    RadioParams radio;
    /// Response/input size ratio for this task's application. Falls back to
    /// SlotConfig::alpha when absent.
    std::optional<double> response_ratio;
    /// Time already spent between submission and the first decision boundary.
    double release_wait_s = 0.0;
};

struct MecServer {
    ServerId id = 0;
    double x_m = 0.0;
    double y_m = 0.0;
    double capacity_mips = 0.0;
};

struct SlotConfig {
    double slot_s = 2.0;
    double decision_s = 0.0;
    double alpha = 0.1;
    double v_c_mps = 3e8;
    double bandwidth_hz = 2e7;
    double big_m_s = 1e4;
};

struct Assignment {
    TaskId task_id = 0;
    std::optional<ServerId> server;
    double alloc_mips = 0.0;
    double trt_s = 0.0;
    bool violated = false;

    bool assigned() const { return server.has_value(); }
};

struct Schedule {
    int slot = 0;
    std::vector<Assignment> assignments;
    /// Indexed by server id.
    std::vector<double> residual_mips;

    int violations() const;
    int assigned_count() const;
    /// Tasks executed away from their host server.
    int migrations(const std::vector<Task>& tasks) const;
};

void validate(const RadioParams& radio);
void validate(const Task& task);
void validate(const MecServer& server);
void validate(const SlotConfig& cfg);

}  // namespace mecsim
