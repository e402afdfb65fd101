#pragma once

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "mecsim/types.hpp"

namespace mecsim {

struct Link {
    ServerId a = 0;
    ServerId b = 0;
    double rate_bps = 0.0;
    double distance_m = 0.0;
};

/// Server graph with derived all-pairs effective rate and distance.
///
/// Server ids are dense: the i-th server has id i. Pairs are routed along a
/// minimum-hop path (ties: smaller sum of 1/rate, then lexicographically
/// smaller node sequence). The effective rate of a path is the harmonic
/// composition of its hop rates, so s / R equals the sum of per-hop
/// serialization times; the effective distance is the sum of hop lengths.
class Topology {
public:
    static constexpr double kSelfRate = std::numeric_limits<double>::infinity();

    Topology() = default;

    /// Throws InvalidInput on duplicate ids, non-dense ids, bad links, or a
    /// disconnected graph (unless allow_disconnected is set).
    static Topology build(std::string name, std::vector<MecServer> servers,
                          std::vector<Link> links, bool allow_disconnected = false);

    const std::string& name() const { return name_; }
    const std::vector<MecServer>& servers() const { return servers_; }
    const std::vector<Link>& links() const { return links_; }
    std::size_t size() const { return servers_.size(); }
    const MecServer& server(ServerId id) const;
    bool contains(ServerId id) const { return id >= 0 && static_cast<std::size_t>(id) < servers_.size(); }
    bool connected() const { return connected_; }

    /// R[a][k]; +inf when a == k, 0 when unreachable.
    double effective_rate(ServerId a, ServerId k) const;
    /// D[a][k]; 0 when a == k.
    double distance(ServerId a, ServerId k) const;
    bool reachable(ServerId a, ServerId k) const;
    /// Node sequence of the chosen route, both endpoints included.
    const std::vector<ServerId>& route(ServerId a, ServerId k) const;

    std::vector<double> capacities() const;

private:
    void compute_all_pairs();
    std::size_t index(ServerId a, ServerId k) const { return static_cast<std::size_t>(a) * servers_.size() + static_cast<std::size_t>(k); }

    std::string name_;
    std::vector<MecServer> servers_;
    std::vector<Link> links_;
    std::vector<double> rate_;
    std::vector<double> dist_;
    std::vector<std::vector<ServerId>> route_;
    bool connected_ = true;
};

/// All-pairs effective rate and distance matrices, row-major.
struct AllPairs {
    std::vector<std::vector<double>> rate_bps;
    std::vector<std::vector<double>> distance_m;
};

AllPairs all_pairs(const Topology& topo);

// Topology document format, one record per line, '#' starts a comment:
//
//   name <string>
//   default_rate_bps <double>
//   node <id> <x_m> <y_m> <capacity_mips>
//   edge <a> <b> [<rate_bps> [<distance_m>]]
//
// Omitted edge rates fall back to default_rate_bps (1e9 unless set) and
// omitted distances to the Euclidean distance between the endpoints.

inline constexpr double kDefaultLinkRateBps = 1e9;

Topology parse_topology(std::string_view document);
Topology load_topology(const std::filesystem::path& path);
std::string format_topology(const Topology& topo);
void save_topology(const Topology& topo, const std::filesystem::path& path);

/// Converts a Topology Zoo GraphML file. The sidecar is a JSON document:
///   { "name": str?, "capacities_mips": [..] | "default_capacity_mips": x,
///     "default_rate_bps": x?, "links": [{"a","b","rate_bps","distance_m"}]?,
///     "positions": [[x,y], ..]? }
/// Node positions come from the sidecar, else from the GraphML Latitude and
/// Longitude attributes (equirectangular projection around the centroid).
Topology convert_graphml(std::string_view graphml, std::string_view sidecar_json);

/// Seeded generator used by the experiment sweeps: servers on a jittered
/// grid over the area, linked by a Euclidean minimum spanning tree plus
/// extra_links shortest non-tree edges.
struct GeneratedTopologySpec {
    int n_servers = 5;
    double width_m = 1000.0;
    double height_m = 500.0;
    std::vector<double> capacity_set_mips;  ///< drawn uniformly per server
    double fixed_total_mips = 0.0;          ///< > 0: even split, overrides the set
    double link_rate_bps = kDefaultLinkRateBps;
    int extra_links = 0;
    std::uint64_t seed = 1;
};

Topology generate_topology(const GeneratedTopologySpec& spec);

}  // namespace mecsim
