#include "mecsim/types.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

namespace mecsim {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw InvalidInput(what);
    }
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

int Schedule::violations() const
{
    int n = 0;
    for (const auto& a : assignments) {
        n += a.violated ? 1 : 0;
    }
    return n;
}

int Schedule::assigned_count() const
{
    int n = 0;
    for (const auto& a : assignments) {
        n += a.assigned() ? 1 : 0;
    }
    return n;
}

int Schedule::migrations(const std::vector<Task>& tasks) const
{
    std::unordered_map<TaskId, ServerId> host;
    for (const auto& t : tasks) {
        host.emplace(t.id, t.host);
    }
    int n = 0;
    for (const auto& a : assignments) {
        auto it = host.find(a.task_id);
        if (a.assigned() && it != host.end() && *a.server != it->second) {
            ++n;
        }
    }
    return n;
}

void validate(const RadioParams& radio)
{
    require(finite_positive(radio.tx_power_w), "radio: tx_power_w must be > 0");
    require(finite_positive(radio.gain), "radio: gain must be > 0");
    require(std::isfinite(radio.interference_w) && radio.interference_w >= 0.0,
            "radio: interference_w must be >= 0");
    require(finite_positive(radio.noise_w), "radio: noise_w must be > 0");
}

void validate(const Task& task)
{
    const std::string id = "task " + std::to_string(task.id);
    require(finite_positive(task.data_size_bits), id + ": data_size_bits must be > 0");
    require(finite_positive(task.instr_millions), id + ": instr_millions must be > 0");
    require(finite_positive(task.deadline_s), id + ": deadline_s must be > 0");
    require(task.host >= 0, id + ": host must be a server id");
    require(task.arrival_slot >= 0, id + ": arrival_slot must be >= 0");
    require(std::isfinite(task.mu_distance_m) && task.mu_distance_m >= 0.0,
            id + ": mu_distance_m must be >= 0");
    require(std::isfinite(task.release_wait_s) && task.release_wait_s >= 0.0,
            id + ": release_wait_s must be >= 0");
    if (task.response_ratio) {
        require(std::isfinite(*task.response_ratio) && *task.response_ratio >= 0.0,
                id + ": response_ratio must be >= 0");
    }
    validate(task.radio);
}

void validate(const MecServer& server)
{
    require(finite_positive(server.capacity_mips),
            "server " + std::to_string(server.id) + ": capacity_mips must be > 0");
    require(std::isfinite(server.x_m) && std::isfinite(server.y_m),
            "server " + std::to_string(server.id) + ": position must be finite");
}

void validate(const SlotConfig& cfg)
{
    require(finite_positive(cfg.slot_s), "slot config: slot_s must be > 0");
    require(std::isfinite(cfg.decision_s) && cfg.decision_s >= 0.0,
            "slot config: decision_s must be >= 0");
    require(std::isfinite(cfg.alpha) && cfg.alpha >= 0.0, "slot config: alpha must be >= 0");
    require(finite_positive(cfg.v_c_mps), "slot config: v_c_mps must be > 0");
    require(finite_positive(cfg.bandwidth_hz), "slot config: bandwidth_hz must be > 0");
    require(finite_positive(cfg.big_m_s), "slot config: big_m_s must be > 0");
}

}  // namespace mecsim
