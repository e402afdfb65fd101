#include "mecsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace mecsim {

namespace {

double uniform_in(double lo, double hi, std::mt19937_64& rng)
{
    if (lo == hi) {
        return lo;
    }
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

std::vector<AppProfile> default_app_mix()
{
    constexpr double mb = kBitsPerMegabyte;
    return {
        {"augmented-reality", 0.075, 0.075, 1.0 * mb, 7.0 * mb, 0.1, 0.2},
        {"online-gaming", 0.100, 0.100, 1.0 * mb, 10.0 * mb, 0.1, 0.2},
        {"face-recognition", 0.100, 0.100, 0.09 * mb, 7.5 * mb, 0.1, 0.2},
        {"web-browser", 0.100, 0.800, 0.3 * mb, 5.0 * mb, 0.1, 0.2},
        {"big-data", 0.200, 0.900, 0.1 * mb, 1.0 * mb, 0.1, 0.2},
    };
}

AppSample app_profile_sample(const std::vector<AppProfile>& mix, std::mt19937_64& rng)
{
    if (mix.empty()) {
        throw InvalidInput("app mix is empty");
    }
    std::vector<double> weights;
    weights.reserve(mix.size());
    for (const auto& p : mix) {
        weights.push_back(p.weight);
    }
    const std::size_t pick = mix.size() == 1 ? 0 : std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng);
    const AppProfile& p = mix[pick];
    AppSample s;
    s.profile = p.name;
    s.deadline_s = uniform_in(p.deadline_min_s, p.deadline_max_s, rng);
    s.size_bits = uniform_in(p.size_min_bits, p.size_max_bits, rng);
    s.alpha = p.alpha;
    return s;
}

void validate(const WorkloadSpec& spec)
{
    auto fail = [](const std::string& why) { throw InvalidInput("workload: " + why); };
    if (spec.n_tasks < 0) {
        fail("n_tasks must be >= 0");
    }
    if (!(spec.width_m > 0.0) || !(spec.height_m > 0.0)) {
        fail("area must be positive");
    }
    if (!(spec.instr_stddev_mi >= 0.0) || !(spec.instr_floor_mi > 0.0)) {
        fail("instruction distribution needs stddev >= 0 and a positive floor");
    }
    if (spec.instr_stddev_mi == 0.0 && spec.instr_mean_mi < spec.instr_floor_mi) {
        fail("instruction mean is below the floor with zero spread");
    }
    if (spec.app_mix.empty()) {
        fail("app_mix is empty");
    }
    double total = 0.0;
    for (const auto& p : spec.app_mix) {
        if (!(p.weight >= 0.0)) {
            fail("profile '" + p.name + "' has a negative weight");
        }
        if (!(p.deadline_min_s > 0.0) || p.deadline_max_s < p.deadline_min_s) {
            fail("profile '" + p.name + "' has an invalid deadline range");
        }
        if (!(p.size_min_bits > 0.0) || p.size_max_bits < p.size_min_bits) {
            fail("profile '" + p.name + "' has an invalid size range");
        }
        if (!(p.alpha >= 0.0)) {
            fail("profile '" + p.name + "' has a negative alpha");
        }
        total += p.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        fail("app_mix weights must sum to 1 (got " + std::to_string(total) + ")");
    }
    if (spec.placement == MuPlacement::hotspot) {
        if (spec.hotspot.centers.empty() && spec.hotspot.n_centers < 1) {
            fail("hotspot placement needs at least one center");
        }
        if (!(spec.hotspot.concentration >= 0.0 && spec.hotspot.concentration <= 1.0)) {
            fail("hotspot concentration must be in [0, 1]");
        }
        if (!(spec.hotspot.spread_m >= 0.0)) {
            fail("hotspot spread_m must be >= 0");
        }
    }
    if (spec.arrival.mode == ArrivalMode::batch && spec.arrival.arrival_slots < 1) {
        fail("arrival_slots must be >= 1");
    }
    if (spec.arrival.mode == ArrivalMode::continuous && !(spec.arrival.window_s > 0.0)) {
        fail("continuous arrivals need window_s > 0");
    }
    validate(spec.channel);
}

ServerId nearest_server(const Topology& topo, double x_m, double y_m)
{
    ServerId best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& s : topo.servers()) {
        const double d = std::hypot(s.x_m - x_m, s.y_m - y_m);
        if (d < best_d) {
            best_d = d;
            best = s.id;
        }
    }
    return best;
}

std::vector<Task> generate(const WorkloadSpec& spec, const Topology& topo, double slot_s)
{
    validate(spec);
    if (!(slot_s > 0.0)) {
        throw InvalidInput("workload: slot_s must be > 0");
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> ux(0.0, spec.width_m);
    std::uniform_real_distribution<double> uy(0.0, spec.height_m);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> instr(spec.instr_mean_mi, spec.instr_stddev_mi);

    std::vector<std::pair<double, double>> centers = spec.hotspot.centers;
    if (spec.placement == MuPlacement::hotspot && centers.empty()) {
        const int n = std::min<int>(spec.hotspot.n_centers, static_cast<int>(topo.size()));
        for (int k = 0; k < n; ++k) {
            centers.emplace_back(topo.server(k).x_m, topo.server(k).y_m);
        }
    }

    std::vector<Task> tasks;
    tasks.reserve(static_cast<std::size_t>(spec.n_tasks));
    for (int i = 0; i < spec.n_tasks; ++i) {
        double x = 0.0, y = 0.0;
        const bool clustered = spec.placement == MuPlacement::hotspot && unit(rng) < spec.hotspot.concentration;
        if (clustered) {
            const auto& c = centers[std::uniform_int_distribution<std::size_t>(0, centers.size() - 1)(rng)];
            std::normal_distribution<double> scatter(0.0, spec.hotspot.spread_m);
            x = std::clamp(c.first + scatter(rng), 0.0, spec.width_m);
            y = std::clamp(c.second + scatter(rng), 0.0, spec.height_m);
        } else {
            x = ux(rng);
            y = uy(rng);
        }
        const AppSample app = app_profile_sample(spec.app_mix, rng);
        double c = instr(rng);
        while (c < spec.instr_floor_mi) {
            c = instr(rng);
        }

        Task t;
        t.id = i;
        t.host = nearest_server(topo, x, y);
        const auto& h = topo.server(t.host);
        t.mu_distance_m = std::hypot(h.x_m - x, h.y_m - y);
        t.data_size_bits = app.size_bits;
        t.instr_millions = c;
        t.deadline_s = app.deadline_s;
        t.response_ratio = app.alpha;
        t.radio = spec.radio;
        t.radio.gain = gain_from_distance(t.mu_distance_m, spec.channel);

        if (spec.arrival.mode == ArrivalMode::batch) {
            t.arrival_slot = std::uniform_int_distribution<int>(0, spec.arrival.arrival_slots - 1)(rng);
        } else {
            const double submitted = unit(rng) * spec.arrival.window_s;
            const double boundary = std::ceil(submitted / slot_s);
            t.arrival_slot = static_cast<int>(boundary);
            t.release_wait_s = std::max(0.0, boundary * slot_s - submitted);
        }
        tasks.push_back(t);
    }
    return tasks;
}

int horizon_for(const std::vector<Task>& tasks)
{
    int h = 1;
    for (const auto& t : tasks) {
        h = std::max(h, t.arrival_slot + 1);
    }
    return h;
}

std::string tasks_to_json(const std::vector<Task>& tasks)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : tasks) {
        nlohmann::json j{
            {"id", t.id},
            {"host", t.host},
            {"data_size_bits", t.data_size_bits},
            {"instr_millions", t.instr_millions},
            {"deadline_s", t.deadline_s},
            {"arrival_slot", t.arrival_slot},
            {"release_wait_s", t.release_wait_s},
            {"mu_distance_m", t.mu_distance_m},
            {"radio",
             {{"tx_power_w", t.radio.tx_power_w},
              {"gain", t.radio.gain},
              {"interference_w", t.radio.interference_w},
              {"noise_w", t.radio.noise_w}}},
        };
        if (t.response_ratio) {
            j["response_ratio"] = *t.response_ratio;
        }
        arr.push_back(std::move(j));
    }
    return nlohmann::json{{"tasks", arr}}.dump(1);
}

std::vector<Task> tasks_from_json(const std::string& text)
{
    std::vector<Task> out;
    try {
        const auto doc = nlohmann::json::parse(text);
        for (const auto& j : doc.at("tasks")) {
            Task t;
            t.id = j.at("id").get<TaskId>();
            t.host = j.at("host").get<ServerId>();
            t.data_size_bits = j.at("data_size_bits").get<double>();
            t.instr_millions = j.at("instr_millions").get<double>();
            t.deadline_s = j.at("deadline_s").get<double>();
            t.arrival_slot = j.value("arrival_slot", 0);
            t.release_wait_s = j.value("release_wait_s", 0.0);
            t.mu_distance_m = j.value("mu_distance_m", 0.0);
            const auto& r = j.at("radio");
            t.radio.tx_power_w = r.at("tx_power_w").get<double>();
            t.radio.gain = r.at("gain").get<double>();
            t.radio.interference_w = r.value("interference_w", 0.0);
            t.radio.noise_w = r.at("noise_w").get<double>();
            if (j.contains("response_ratio")) {
                t.response_ratio = j.at("response_ratio").get<double>();
            }
            validate(t);
            out.push_back(t);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("task file: ") + e.what());
    }
    return out;
}

void save_tasks(const std::vector<Task>& tasks, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write task file " + path.string());
    }
    out << tasks_to_json(tasks) << "\n";
}

std::vector<Task> load_tasks(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open task file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return tasks_from_json(buf.str());
}

}  // namespace mecsim
