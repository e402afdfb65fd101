// Python bindings for the mecsim core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mecsim/experiment.hpp"
#include "mecsim/latency.hpp"
#include "mecsim/oracle.hpp"
#include "mecsim/radio.hpp"
#include "mecsim/schedulers.hpp"
#include "mecsim/sim.hpp"
#include "mecsim/topology.hpp"
#include "mecsim/workload.hpp"

namespace py = pybind11;
using namespace mecsim;

namespace {

using TopologyPtr = std::shared_ptr<Topology>;

SlotProblem make_problem(const TopologyPtr& topo, std::vector<Task> tasks, const SlotConfig& cfg, int slot)
{
    SlotProblem p;
    p.slot = slot;
    p.topology = topo;
    p.cfg = cfg;
    for (const auto& t : tasks) {
        p.rates_bps.push_back(task_rate(t, cfg));
    }
    p.tasks = std::move(tasks);
    p.validate();
    return p;
}

py::dict gap_to_dict(const GapSummary& g)
{
    py::dict d;
    d["instances"] = g.instances;
    d["mean_abs_pct"] = g.mean_abs_pct;
    d["max_abs_pct"] = g.max_abs_pct;
    d["mean_rel"] = g.mean_rel;
    d["max_rel"] = g.max_rel;
    d["skipped"] = g.skipped;
    d["all_proved"] = g.all_proved;
    d["within_thresholds"] = g.within_thresholds;
    return d;
}

RunOptions run_options(int workers, std::optional<std::uint64_t> seed)
{
    RunOptions o;
    o.workers = workers;
    o.seed_override = seed;
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Slot-based MEC task scheduling simulator";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<InfeasibleBudget>(m, "InfeasibleBudget", PyExc_ValueError);
    py::register_exception<NoPath>(m, "NoPath", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<RadioParams>(m, "RadioParams")
        .def(py::init<>())
        .def_readwrite("tx_power_w", &RadioParams::tx_power_w)
        .def_readwrite("gain", &RadioParams::gain)
        .def_readwrite("interference_w", &RadioParams::interference_w)
        .def_readwrite("noise_w", &RadioParams::noise_w);

    py::class_<ChannelModel>(m, "ChannelModel")
        .def(py::init<>())
        .def_readwrite("bandwidth_hz", &ChannelModel::bandwidth_hz)
        .def_readwrite("pathloss_exponent", &ChannelModel::pathloss_exponent)
        .def_readwrite("reference_gain", &ChannelModel::reference_gain);

    py::class_<Task>(m, "Task")
        .def(py::init<>())
        .def(py::init([](TaskId id, ServerId host, double size_bits, double instr_mi, double deadline_s) {
                 Task t;
                 t.id = id;
                 t.host = host;
                 t.data_size_bits = size_bits;
                 t.instr_millions = instr_mi;
                 t.deadline_s = deadline_s;
                 return t;
             }),
             py::arg("id"), py::arg("host"), py::arg("data_size_bits"), py::arg("instr_millions"),
             py::arg("deadline_s"))
        .def_readwrite("id", &Task::id)
        .def_readwrite("host", &Task::host)
        .def_readwrite("data_size_bits", &Task::data_size_bits)
        .def_readwrite("instr_millions", &Task::instr_millions)
        .def_readwrite("deadline_s", &Task::deadline_s)
        .def_readwrite("arrival_slot", &Task::arrival_slot)
        .def_readwrite("mu_distance_m", &Task::mu_distance_m)
        .def_readwrite("radio", &Task::radio)
        .def_readwrite("response_ratio", &Task::response_ratio)
        .def_readwrite("release_wait_s", &Task::release_wait_s)
        .def("__repr__", [](const Task& t) {
            return "<Task id=" + std::to_string(t.id) + " host=" + std::to_string(t.host) + ">";
        });

    py::class_<MecServer>(m, "MecServer")
        .def(py::init<>())
        .def(py::init([](ServerId id, double x, double y, double cap) { return MecServer{id, x, y, cap}; }),
             py::arg("id"), py::arg("x_m"), py::arg("y_m"), py::arg("capacity_mips"))
        .def_readwrite("id", &MecServer::id)
        .def_readwrite("x_m", &MecServer::x_m)
        .def_readwrite("y_m", &MecServer::y_m)
        .def_readwrite("capacity_mips", &MecServer::capacity_mips);

    py::class_<Link>(m, "Link")
        .def(py::init<>())
        .def(py::init([](ServerId a, ServerId b, double rate, double dist) { return Link{a, b, rate, dist}; }),
             py::arg("a"), py::arg("b"), py::arg("rate_bps"), py::arg("distance_m"))
        .def_readwrite("a", &Link::a)
        .def_readwrite("b", &Link::b)
        .def_readwrite("rate_bps", &Link::rate_bps)
        .def_readwrite("distance_m", &Link::distance_m);

    py::class_<SlotConfig>(m, "SlotConfig")
        .def(py::init<>())
        .def_readwrite("slot_s", &SlotConfig::slot_s)
        .def_readwrite("decision_s", &SlotConfig::decision_s)
        .def_readwrite("alpha", &SlotConfig::alpha)
        .def_readwrite("v_c_mps", &SlotConfig::v_c_mps)
        .def_readwrite("bandwidth_hz", &SlotConfig::bandwidth_hz)
        .def_readwrite("big_m_s", &SlotConfig::big_m_s);

    py::class_<Topology, TopologyPtr>(m, "Topology")
        .def_static(
            "build",
            [](std::string name, std::vector<MecServer> servers, std::vector<Link> links, bool allow_disconnected) {
                return std::make_shared<Topology>(
                    Topology::build(std::move(name), std::move(servers), std::move(links), allow_disconnected));
            },
            py::arg("name"), py::arg("servers"), py::arg("links"), py::arg("allow_disconnected") = false)
        .def_property_readonly("name", &Topology::name)
        .def_property_readonly("servers", &Topology::servers)
        .def_property_readonly("links", &Topology::links)
        .def_property_readonly("connected", &Topology::connected)
        .def("__len__", &Topology::size)
        .def("effective_rate", &Topology::effective_rate)
        .def("distance", &Topology::distance)
        .def("route", &Topology::route)
        .def("capacities", &Topology::capacities)
        .def("to_text", [](const Topology& t) { return format_topology(t); })
        .def("save", [](const Topology& t, const std::filesystem::path& p) { save_topology(t, p); });

    m.def("load_topology", [](const std::filesystem::path& p) { return std::make_shared<Topology>(load_topology(p)); });
    m.def("parse_topology", [](const std::string& doc) { return std::make_shared<Topology>(parse_topology(doc)); });
    m.def(
        "convert_graphml",
        [](const std::string& graphml, const std::string& sidecar) {
            return std::make_shared<Topology>(convert_graphml(graphml, sidecar));
        },
        py::arg("graphml"), py::arg("sidecar_json"), "Convert GraphML text plus a JSON sidecar.");

    py::class_<GeneratedTopologySpec>(m, "GeneratedTopologySpec")
        .def(py::init<>())
        .def_readwrite("n_servers", &GeneratedTopologySpec::n_servers)
        .def_readwrite("width_m", &GeneratedTopologySpec::width_m)
        .def_readwrite("height_m", &GeneratedTopologySpec::height_m)
        .def_readwrite("capacity_set_mips", &GeneratedTopologySpec::capacity_set_mips)
        .def_readwrite("fixed_total_mips", &GeneratedTopologySpec::fixed_total_mips)
        .def_readwrite("link_rate_bps", &GeneratedTopologySpec::link_rate_bps)
        .def_readwrite("extra_links", &GeneratedTopologySpec::extra_links)
        .def_readwrite("seed", &GeneratedTopologySpec::seed);
    m.def("generate_topology",
          [](const GeneratedTopologySpec& s) { return std::make_shared<Topology>(generate_topology(s)); });

    m.def("channel_rate", &channel_rate, py::arg("radio"), py::arg("model") = ChannelModel{});
    m.def("gain_from_distance", &gain_from_distance, py::arg("distance_m"), py::arg("model") = ChannelModel{});
    m.def("db_to_watts", &db_to_watts);

    m.def(
        "total_response_time",
        [](const Task& t, std::optional<ServerId> server, const Topology& topo, double rate, const SlotConfig& cfg) {
            return total_response_time(t, server, topo, rate, cfg);
        },
        py::arg("task"), py::arg("server"), py::arg("topology"), py::arg("rate_bps"), py::arg("cfg"));
    m.def(
        "required_mips",
        [](const Task& t, ServerId exec, const Topology& topo, double rate, const SlotConfig& cfg) -> std::optional<double> {
            const auto pl = evaluate_placement(t, exec, topo, rate, cfg);
            return pl.feasible ? std::optional<double>(pl.mips) : std::nullopt;
        },
        py::arg("task"), py::arg("server"), py::arg("topology"), py::arg("rate_bps"), py::arg("cfg"),
        "Allocation needed to finish exactly at min(deadline, slot); None if infeasible.");

    py::enum_<MuPlacement>(m, "MuPlacement").value("uniform", MuPlacement::uniform).value("hotspot", MuPlacement::hotspot);
    py::enum_<ArrivalMode>(m, "ArrivalMode").value("batch", ArrivalMode::batch).value("continuous", ArrivalMode::continuous);

    py::class_<HotspotSpec>(m, "HotspotSpec")
        .def(py::init<>())
        .def_readwrite("centers", &HotspotSpec::centers)
        .def_readwrite("n_centers", &HotspotSpec::n_centers)
        .def_readwrite("concentration", &HotspotSpec::concentration)
        .def_readwrite("spread_m", &HotspotSpec::spread_m);

    py::class_<ArrivalSpec>(m, "ArrivalSpec")
        .def(py::init<>())
        .def_readwrite("mode", &ArrivalSpec::mode)
        .def_readwrite("arrival_slots", &ArrivalSpec::arrival_slots)
        .def_readwrite("window_s", &ArrivalSpec::window_s);

    py::class_<WorkloadSpec>(m, "WorkloadSpec")
        .def(py::init<>())
        .def_readwrite("n_tasks", &WorkloadSpec::n_tasks)
        .def_readwrite("width_m", &WorkloadSpec::width_m)
        .def_readwrite("height_m", &WorkloadSpec::height_m)
        .def_readwrite("instr_mean_mi", &WorkloadSpec::instr_mean_mi)
        .def_readwrite("instr_stddev_mi", &WorkloadSpec::instr_stddev_mi)
        .def_readwrite("instr_floor_mi", &WorkloadSpec::instr_floor_mi)
        .def_readwrite("placement", &WorkloadSpec::placement)
        .def_readwrite("hotspot", &WorkloadSpec::hotspot)
        .def_readwrite("arrival", &WorkloadSpec::arrival)
        .def_readwrite("radio", &WorkloadSpec::radio)
        .def_readwrite("channel", &WorkloadSpec::channel)
        .def_readwrite("seed", &WorkloadSpec::seed);

    m.def("generate_workload", &generate, py::arg("spec"), py::arg("topology"), py::arg("slot_s") = 2.0);
    m.def("horizon_for", &horizon_for);
    m.def("tasks_to_json", &tasks_to_json);
    m.def("tasks_from_json", &tasks_from_json);

    py::class_<Assignment>(m, "Assignment")
        .def_readonly("task_id", &Assignment::task_id)
        .def_readonly("server", &Assignment::server)
        .def_readonly("alloc_mips", &Assignment::alloc_mips)
        .def_readonly("trt_s", &Assignment::trt_s)
        .def_readonly("violated", &Assignment::violated);

    py::class_<Schedule>(m, "Schedule")
        .def_readonly("slot", &Schedule::slot)
        .def_readonly("assignments", &Schedule::assignments)
        .def_readonly("residual_mips", &Schedule::residual_mips)
        .def("violations", &Schedule::violations)
        .def("migrations", &Schedule::migrations);

    py::class_<SchedulerResult>(m, "SchedulerResult")
        .def_readonly("schedule", &SchedulerResult::schedule)
        .def_readonly("unassigned", &SchedulerResult::unassigned)
        .def_property_readonly("violations", &SchedulerResult::violations);

    py::class_<OracleResult>(m, "OracleResult")
        .def_readonly("result", &OracleResult::result)
        .def_readonly("proved_optimal", &OracleResult::proved_optimal)
        .def_readonly("nodes", &OracleResult::nodes)
        .def_readonly("migrations", &OracleResult::migrations);

    m.def(
        "schedule",
        [](const std::string& name, const TopologyPtr& topo, std::vector<Task> tasks, const SlotConfig& cfg,
           std::uint64_t seed) {
            const auto p = make_problem(topo, std::move(tasks), cfg, 0);
            auto r = scheduler_by_name(name, seed)(p);
            check_schedule(p, r.schedule);
            return r;
        },
        py::arg("scheduler"), py::arg("topology"), py::arg("tasks"), py::arg("cfg") = SlotConfig{}, py::arg("seed") = 0,
        "Schedule one slot with mesa, no-migration or random.");

    m.def(
        "optimal_schedule",
        [](const TopologyPtr& topo, std::vector<Task> tasks, const SlotConfig& cfg, int max_tasks, int max_servers,
           double time_budget_s) {
            const auto p = make_problem(topo, std::move(tasks), cfg, 0);
            OracleLimits limits{max_tasks, max_servers, time_budget_s};
            py::gil_scoped_release release;
            return optimal_schedule(p, limits);
        },
        py::arg("topology"), py::arg("tasks"), py::arg("cfg") = SlotConfig{}, py::arg("max_tasks") = 12,
        py::arg("max_servers") = 4, py::arg("time_budget_s") = 60.0);

    py::class_<TaskOutcome>(m, "TaskOutcome")
        .def_readonly("task_id", &TaskOutcome::task_id)
        .def_readonly("served", &TaskOutcome::served)
        .def_readonly("slot", &TaskOutcome::slot)
        .def_readonly("server", &TaskOutcome::server)
        .def_readonly("alloc_mips", &TaskOutcome::alloc_mips)
        .def_readonly("trt_s", &TaskOutcome::trt_s)
        .def_readonly("migrated", &TaskOutcome::migrated);

    py::class_<SlotStats>(m, "SlotStats")
        .def_readonly("slot", &SlotStats::slot)
        .def_readonly("arrivals", &SlotStats::arrivals)
        .def_readonly("carried_in", &SlotStats::carried_in)
        .def_readonly("scheduled", &SlotStats::scheduled)
        .def_readonly("assigned", &SlotStats::assigned)
        .def_readonly("violations", &SlotStats::violations)
        .def_readonly("carried_out", &SlotStats::carried_out)
        .def_readonly("utilization", &SlotStats::utilization);

    py::class_<ViolationReport>(m, "ViolationReport")
        .def_readonly("total_tasks", &ViolationReport::total_tasks)
        .def_readonly("violations", &ViolationReport::violations)
        .def_readonly("served", &ViolationReport::served)
        .def_readonly("migrations", &ViolationReport::migrations)
        .def_readonly("violation_pct", &ViolationReport::violation_pct)
        .def_readonly("proved_optimal", &ViolationReport::proved_optimal)
        .def_readonly("slots", &ViolationReport::slots)
        .def_readonly("outcomes", &ViolationReport::outcomes);

    m.def(
        "simulate",
        [](const TopologyPtr& topo, std::vector<Task> tasks, const std::string& scheduler, const SlotConfig& cfg,
           std::uint64_t seed, std::optional<int> horizon_slots, bool deferral) {
            SimRun sim;
            sim.cfg = cfg;
            sim.topology = topo;
            sim.scheduler = scheduler;
            sim.seed = seed;
            sim.horizon_slots = horizon_slots.value_or(horizon_for(tasks));
            sim.tasks = std::move(tasks);
            sim.deferral = deferral;
            py::gil_scoped_release release;
            return run(sim);
        },
        py::arg("topology"), py::arg("tasks"), py::arg("scheduler") = "mesa", py::arg("cfg") = SlotConfig{},
        py::arg("seed") = 0, py::arg("horizon_slots") = py::none(), py::arg("deferral") = true);

    // Experiments go through JSON text so results match the CLI byte for byte.
    m.def("config_hash", [](const std::filesystem::path& p) { return config_hash(load_config(p)); });
    m.def(
        "run_experiment",
        [](const std::filesystem::path& config, std::optional<std::filesystem::path> out_dir, int workers,
           std::optional<std::uint64_t> seed) {
            ResultSet rs;
            {
                py::gil_scoped_release release;
                rs = run_experiment(load_config(config), run_options(workers, seed));
                if (out_dir) {
                    emit_outputs(rs, *out_dir);
                }
            }
            py::dict d;
            d["config_hash"] = rs.config_hash;
            d["table"] = format_table(rs);
            d["results_json"] = results_to_json(rs).dump();
            d["warnings"] = rs.warnings;
            return d;
        },
        py::arg("config"), py::arg("out_dir") = py::none(), py::arg("workers") = 1, py::arg("seed") = py::none());
    m.def(
        "replay",
        [](const std::filesystem::path& results, int workers) {
            ReplayOutcome r;
            {
                py::gil_scoped_release release;
                r = replay(load_results(results), run_options(workers, std::nullopt));
            }
            return py::make_tuple(r.identical, r.differences);
        },
        py::arg("results"), py::arg("workers") = 1, "Returns (identical, differences).");
    m.def(
        "verify_gap",
        [](const std::filesystem::path& config, int workers) {
            GapSummary g;
            {
                py::gil_scoped_release release;
                g = verify_gap(load_config(config), run_options(workers, std::nullopt));
            }
            return gap_to_dict(g);
        },
        py::arg("config"), py::arg("workers") = 1);
}
