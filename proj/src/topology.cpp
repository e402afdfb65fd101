#include "mecsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>

namespace mecsim {

namespace {

double euclid(const MecServer& a, const MecServer& b) { return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m); }

bool nearly_equal(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

std::string list_ids(const std::vector<ServerId>& ids)
{
    std::string out = "{";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out += (i ? "," : "") + std::to_string(ids[i]);
    }
    return out + "}";
}

}  // namespace

Topology Topology::build(std::string name, std::vector<MecServer> servers, std::vector<Link> links,
                         bool allow_disconnected)
{
    if (servers.empty()) {
        throw InvalidInput("topology: at least one server is required");
    }
    std::sort(servers.begin(), servers.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < servers.size(); ++i) {
        if (i > 0 && servers[i].id == servers[i - 1].id) {
            throw InvalidInput("topology: duplicate node id " + std::to_string(servers[i].id));
        }
        if (servers[i].id != static_cast<ServerId>(i)) {
            throw InvalidInput("topology: node ids must be 0.." + std::to_string(servers.size() - 1) +
                               ", found " + std::to_string(servers[i].id));
        }
        validate(servers[i]);
    }
    Topology t;
    t.name_ = std::move(name);
    t.servers_ = std::move(servers);
    std::set<std::pair<ServerId, ServerId>> seen;
    for (auto& l : links) {
        if (!t.contains(l.a) || !t.contains(l.b)) {
            throw InvalidInput("topology: edge " + std::to_string(l.a) + "-" + std::to_string(l.b) +
                               " references an unknown node");
        }
        if (l.a == l.b) {
            throw InvalidInput("topology: self-loop on node " + std::to_string(l.a));
        }
        if (!(l.rate_bps > 0.0) || !std::isfinite(l.rate_bps)) {
            throw InvalidInput("topology: edge " + std::to_string(l.a) + "-" + std::to_string(l.b) +
                               " needs a positive rate");
        }
        if (!(l.distance_m >= 0.0) || !std::isfinite(l.distance_m)) {
            throw InvalidInput("topology: edge " + std::to_string(l.a) + "-" + std::to_string(l.b) +
                               " needs a non-negative distance");
        }
        auto key = std::minmax(l.a, l.b);
        if (!seen.insert({key.first, key.second}).second) {
            throw InvalidInput("topology: duplicate edge " + std::to_string(key.first) + "-" +
                               std::to_string(key.second));
        }
    }
    t.links_ = std::move(links);
    t.compute_all_pairs();
    if (!t.connected_ && !allow_disconnected) {
        // Report every component so the offending part is easy to find.
        std::vector<int> comp(t.size(), -1);
        std::vector<std::vector<ServerId>> comps;
        for (ServerId s = 0; s < static_cast<ServerId>(t.size()); ++s) {
            if (comp[s] >= 0) {
                continue;
            }
            comps.emplace_back();
            for (ServerId k = 0; k < static_cast<ServerId>(t.size()); ++k) {
                if (comp[k] < 0 && t.reachable(s, k)) {
                    comp[k] = static_cast<int>(comps.size() - 1);
                    comps.back().push_back(k);
                }
            }
        }
        std::string msg = "topology '" + t.name_ + "' is disconnected; components:";
        for (const auto& c : comps) {
            msg += " " + list_ids(c);
        }
        throw InvalidInput(msg);
    }
    return t;
}

const MecServer& Topology::server(ServerId id) const
{
    if (!contains(id)) {
        throw InvalidInput("unknown server id " + std::to_string(id));
    }
    return servers_[static_cast<std::size_t>(id)];
}

double Topology::effective_rate(ServerId a, ServerId k) const
{
    server(a);
    server(k);
    return rate_[index(a, k)];
}

double Topology::distance(ServerId a, ServerId k) const
{
    server(a);
    server(k);
    return dist_[index(a, k)];
}

bool Topology::reachable(ServerId a, ServerId k) const
{
    server(a);
    server(k);
    return !route_[index(a, k)].empty();
}

const std::vector<ServerId>& Topology::route(ServerId a, ServerId k) const
{
    server(a);
    server(k);
    return route_[index(a, k)];
}

std::vector<double> Topology::capacities() const
{
    std::vector<double> out;
    out.reserve(servers_.size());
    for (const auto& s : servers_) {
        out.push_back(s.capacity_mips);
    }
    return out;
}

void Topology::compute_all_pairs()
{
    const std::size_t n = servers_.size();
    struct Edge {
        ServerId to;
        double inv_rate;
        double dist;
    };
    std::vector<std::vector<Edge>> adj(n);
    for (const auto& l : links_) {
        adj[l.a].push_back({l.b, 1.0 / l.rate_bps, l.distance_m});
        adj[l.b].push_back({l.a, 1.0 / l.rate_bps, l.distance_m});
    }
    rate_.assign(n * n, 0.0);
    dist_.assign(n * n, 0.0);
    route_.assign(n * n, {});
    connected_ = true;

    for (std::size_t src = 0; src < n; ++src) {
        // Layered BFS; within a layer each node keeps its best predecessor by
        // (sum of 1/rate, lexicographic route).
        std::vector<int> hops(n, -1);
        std::vector<double> cost(n, 0.0);
        std::vector<double> length(n, 0.0);
        std::vector<std::vector<ServerId>> path(n);
        hops[src] = 0;
        path[src] = {static_cast<ServerId>(src)};
        std::vector<ServerId> frontier{static_cast<ServerId>(src)};
        while (!frontier.empty()) {
            std::vector<ServerId> next;
            for (ServerId u : frontier) {
                for (const auto& e : adj[u]) {
                    const int h = hops[u] + 1;
                    if (hops[e.to] >= 0 && hops[e.to] < h) {
                        continue;
                    }
                    const double c = cost[u] + e.inv_rate;
                    auto candidate = path[u];
                    candidate.push_back(e.to);
                    bool take = hops[e.to] < 0;
                    if (!take) {
                        if (nearly_equal(c, cost[e.to])) {
                            take = candidate < path[e.to];
                        } else {
                            take = c < cost[e.to];
                        }
                    } else {
                        next.push_back(e.to);
                    }
                    if (take) {
                        hops[e.to] = h;
                        cost[e.to] = c;
                        length[e.to] = length[u] + e.dist;
                        path[e.to] = std::move(candidate);
                    }
                }
            }
            frontier = std::move(next);
        }
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t idx = src * n + k;
            if (k == src) {
                rate_[idx] = kSelfRate;
                dist_[idx] = 0.0;
                route_[idx] = path[k];
            } else if (hops[k] < 0) {
                connected_ = false;
            } else {
                rate_[idx] = 1.0 / cost[k];
                dist_[idx] = length[k];
                route_[idx] = path[k];
            }
        }
    }
}

AllPairs all_pairs(const Topology& topo)
{
    const auto n = static_cast<ServerId>(topo.size());
    AllPairs out;
    out.rate_bps.assign(n, std::vector<double>(n, 0.0));
    out.distance_m.assign(n, std::vector<double>(n, 0.0));
    for (ServerId a = 0; a < n; ++a) {
        for (ServerId k = 0; k < n; ++k) {
            out.rate_bps[a][k] = topo.effective_rate(a, k);
            out.distance_m[a][k] = topo.distance(a, k);
        }
    }
    return out;
}

Topology parse_topology(std::string_view document)
{
    std::istringstream in{std::string(document)};
    std::string line;
    std::string name = "topology";
    double default_rate = kDefaultLinkRateBps;
    std::vector<MecServer> servers;
    struct RawEdge {
        ServerId a, b;
        std::optional<double> rate, dist;
        int line;
    };
    std::vector<RawEdge> edges;
    std::set<ServerId> ids;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) {
            continue;
        }
        auto fail = [&](const std::string& why) {
            throw InvalidInput("topology line " + std::to_string(lineno) + ": " + why);
        };
        if (key == "name") {
            if (!(ls >> name)) {
                fail("name needs a value");
            }
        } else if (key == "default_rate_bps") {
            if (!(ls >> default_rate) || !(default_rate > 0.0)) {
                fail("default_rate_bps needs a positive number");
            }
        } else if (key == "node") {
            MecServer s;
            if (!(ls >> s.id >> s.x_m >> s.y_m >> s.capacity_mips)) {
                fail("expected: node <id> <x_m> <y_m> <capacity_mips>");
            }
            if (!ids.insert(s.id).second) {
                fail("duplicate node id " + std::to_string(s.id));
            }
            servers.push_back(s);
        } else if (key == "edge") {
            RawEdge e{};
            e.line = lineno;
            if (!(ls >> e.a >> e.b)) {
                fail("expected: edge <a> <b> [<rate_bps> [<distance_m>]]");
            }
            double v = 0.0;
            if (ls >> v) {
                e.rate = v;
                if (ls >> v) {
                    e.dist = v;
                }
            }
            edges.push_back(e);
        } else {
            fail("unknown record '" + key + "'");
        }
        std::string extra;
        if (ls.clear(), ls >> extra) {
            fail("unexpected trailing field '" + extra + "'");
        }
    }
    std::vector<Link> links;
    for (const auto& e : edges) {
        if (!ids.count(e.a) || !ids.count(e.b)) {
            throw InvalidInput("topology line " + std::to_string(e.line) + ": edge references an unknown node");
        }
        Link l{e.a, e.b, e.rate.value_or(default_rate), 0.0};
        if (e.dist) {
            l.distance_m = *e.dist;
        } else {
            auto find = [&](ServerId id) {
                return *std::find_if(servers.begin(), servers.end(), [&](const auto& s) { return s.id == id; });
            };
            l.distance_m = euclid(find(e.a), find(e.b));
        }
        links.push_back(l);
    }
    return Topology::build(name, std::move(servers), std::move(links));
}

Topology load_topology(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open topology file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_topology(buf.str());
}

std::string format_topology(const Topology& topo)
{
    std::ostringstream out;
    out << std::setprecision(17);
    out << "name " << (topo.name().empty() ? "topology" : topo.name()) << "\n";
    for (const auto& s : topo.servers()) {
        out << "node " << s.id << ' ' << s.x_m << ' ' << s.y_m << ' ' << s.capacity_mips << "\n";
    }
    for (const auto& l : topo.links()) {
        out << "edge " << l.a << ' ' << l.b << ' ' << l.rate_bps << ' ' << l.distance_m << "\n";
    }
    return out.str();
}

void save_topology(const Topology& topo, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write topology file " + path.string());
    }
    out << format_topology(topo);
}

Topology generate_topology(const GeneratedTopologySpec& spec)
{
    if (spec.n_servers < 1) {
        throw InvalidInput("generated topology: n_servers must be >= 1");
    }
    if (!(spec.width_m > 0.0) || !(spec.height_m > 0.0)) {
        throw InvalidInput("generated topology: area must be positive");
    }
    if (spec.fixed_total_mips <= 0.0 && spec.capacity_set_mips.empty()) {
        throw InvalidInput("generated topology: capacity_set_mips or fixed_total_mips is required");
    }
    std::mt19937_64 rng(spec.seed);
    const int n = spec.n_servers;
    const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(n * spec.width_m / spec.height_m))));
    const int rows = (n + cols - 1) / cols;
    const double ch = spec.height_m / rows;
    std::uniform_real_distribution<double> jitter(-0.25, 0.25);
    std::vector<MecServer> servers;
    for (int i = 0; i < n; ++i) {
        const int r = i / cols;
        const int c = i % cols;
        // Centre a short last row.
        const int in_row = (r == rows - 1) ? n - r * cols : cols;
        const double row_w = spec.width_m / in_row;
        MecServer s;
        s.id = i;
        s.x_m = (c + 0.5 + jitter(rng)) * row_w;
        s.y_m = (r + 0.5 + jitter(rng)) * ch;
        servers.push_back(s);
    }
    for (auto& s : servers) {
        if (spec.fixed_total_mips > 0.0) {
            s.capacity_mips = spec.fixed_total_mips / n;
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, spec.capacity_set_mips.size() - 1);
            s.capacity_mips = spec.capacity_set_mips[pick(rng)];
        }
    }
    // Prim's MST over Euclidean distances.
    std::vector<Link> links;
    std::set<std::pair<int, int>> used;
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n, -1);
    best[0] = 0.0;
    for (int it = 0; it < n; ++it) {
        int u = -1;
        for (int v = 0; v < n; ++v) {
            if (!in_tree[v] && (u < 0 || best[v] < best[u])) {
                u = v;
            }
        }
        in_tree[u] = true;
        if (parent[u] >= 0) {
            links.push_back({parent[u], u, spec.link_rate_bps, euclid(servers[parent[u]], servers[u])});
            used.insert(std::minmax(parent[u], u));
        }
        for (int v = 0; v < n; ++v) {
            const double d = euclid(servers[u], servers[v]);
            if (!in_tree[v] && d < best[v]) {
                best[v] = d;
                parent[v] = u;
            }
        }
    }
    if (spec.extra_links > 0) {
        std::vector<std::tuple<double, int, int>> cand;
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                if (!used.count({a, b})) {
                    cand.emplace_back(euclid(servers[a], servers[b]), a, b);
                }
            }
        }
        std::sort(cand.begin(), cand.end());
        for (int i = 0; i < spec.extra_links && i < static_cast<int>(cand.size()); ++i) {
            auto [d, a, b] = cand[i];
            links.push_back({a, b, spec.link_rate_bps, d});
        }
    }
    return Topology::build("generated-" + std::to_string(n), std::move(servers), std::move(links));
}

}  // namespace mecsim
