// Topology Zoo GraphML import. The Zoo only carries node labels, geographic
// coordinates and link labels, so capacities and rates come from a sidecar.

#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "json.hpp"
#include "mecsim/topology.hpp"

namespace mecsim {

namespace {

namespace pt = boost::property_tree;

constexpr double kEarthRadiusM = 6'371'000.0;

struct ZooNode {
    std::string xml_id;
    std::optional<double> lat, lon;
};

std::optional<double> to_double(const std::string& s)
{
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        return used > 0 ? std::optional<double>(v) : std::nullopt;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace

Topology convert_graphml(std::string_view graphml, std::string_view sidecar_json)
{
    pt::ptree tree;
    try {
        std::istringstream in{std::string(graphml)};
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw InvalidInput(std::string("graphml: ") + e.what());
    }
    nlohmann::json side;
    try {
        side = nlohmann::json::parse(sidecar_json);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("sidecar: ") + e.what());
    }

    const auto root = tree.get_child_optional("graphml");
    if (!root) {
        throw InvalidInput("graphml: missing <graphml> root");
    }
    // Map data keys to attribute names.
    std::map<std::string, std::string> key_names;
    for (const auto& [tag, child] : *root) {
        if (tag == "key") {
            key_names[child.get<std::string>("<xmlattr>.id", "")] = child.get<std::string>(boost::property_tree::ptree::path_type("<xmlattr>/attr.name", '/'), "");
        }
    }
    const auto graph = root->get_child_optional("graph");
    if (!graph) {
        throw InvalidInput("graphml: missing <graph>");
    }
    std::vector<ZooNode> nodes;
    std::map<std::string, ServerId> index;
    std::vector<std::pair<std::string, std::string>> raw_edges;
    for (const auto& [tag, child] : *graph) {
        if (tag == "node") {
            ZooNode n;
            n.xml_id = child.get<std::string>("<xmlattr>.id", "");
            if (index.count(n.xml_id)) {
                throw InvalidInput("graphml: duplicate node id " + n.xml_id);
            }
            for (const auto& [dtag, data] : child) {
                if (dtag != "data") {
                    continue;
                }
                const auto& attr = key_names[data.get<std::string>("<xmlattr>.key", "")];
                if (attr == "Latitude") {
                    n.lat = to_double(data.data());
                } else if (attr == "Longitude") {
                    n.lon = to_double(data.data());
                }
            }
            index[n.xml_id] = static_cast<ServerId>(nodes.size());
            nodes.push_back(n);
        } else if (tag == "edge") {
            raw_edges.emplace_back(child.get<std::string>("<xmlattr>.source", ""),
                                   child.get<std::string>("<xmlattr>.target", ""));
        }
    }
    if (nodes.empty()) {
        throw InvalidInput("graphml: no nodes");
    }
    const std::size_t n = nodes.size();

    std::vector<MecServer> servers(n);
    for (std::size_t i = 0; i < n; ++i) {
        servers[i].id = static_cast<ServerId>(i);
    }
    if (side.contains("capacities_mips")) {
        const auto& caps = side.at("capacities_mips");
        if (!caps.is_array() || caps.size() != n) {
            throw InvalidInput("sidecar: capacities_mips must list " + std::to_string(n) + " values");
        }
        for (std::size_t i = 0; i < n; ++i) {
            servers[i].capacity_mips = caps[i].get<double>();
        }
    } else if (side.contains("default_capacity_mips")) {
        for (auto& s : servers) {
            s.capacity_mips = side.at("default_capacity_mips").get<double>();
        }
    } else {
        throw InvalidInput("sidecar: capacities_mips or default_capacity_mips is required");
    }

    if (side.contains("positions")) {
        const auto& pos = side.at("positions");
        if (!pos.is_array() || pos.size() != n) {
            throw InvalidInput("sidecar: positions must list " + std::to_string(n) + " points");
        }
        for (std::size_t i = 0; i < n; ++i) {
            servers[i].x_m = pos[i].at(0).get<double>();
            servers[i].y_m = pos[i].at(1).get<double>();
        }
    } else {
        double lat0 = 0.0, lon0 = 0.0;
        for (const auto& z : nodes) {
            if (!z.lat || !z.lon) {
                throw InvalidInput("graphml: node " + z.xml_id +
                                   " has no Latitude/Longitude; give positions in the sidecar");
            }
            lat0 += *z.lat / n;
            lon0 += *z.lon / n;
        }
        const double deg = std::numbers::pi / 180.0;
        for (std::size_t i = 0; i < n; ++i) {
            servers[i].x_m = kEarthRadiusM * (*nodes[i].lon - lon0) * deg * std::cos(lat0 * deg);
            servers[i].y_m = kEarthRadiusM * (*nodes[i].lat - lat0) * deg;
        }
    }

    const double default_rate = side.value("default_rate_bps", kDefaultLinkRateBps);
    std::map<std::pair<ServerId, ServerId>, std::pair<std::optional<double>, std::optional<double>>> overrides;
    if (side.contains("links")) {
        for (const auto& l : side.at("links")) {
            const auto la = l.at("a").get<ServerId>();
            const auto lb = l.at("b").get<ServerId>();
            const std::pair<ServerId, ServerId> key = std::minmax(la, lb);
            auto& o = overrides[{key.first, key.second}];
            if (l.contains("rate_bps")) {
                o.first = l.at("rate_bps").get<double>();
            }
            if (l.contains("distance_m")) {
                o.second = l.at("distance_m").get<double>();
            }
        }
    }
    std::vector<Link> links;
    std::set<std::pair<ServerId, ServerId>> seen;
    for (const auto& [src, dst] : raw_edges) {
        if (!index.count(src) || !index.count(dst)) {
            throw InvalidInput("graphml: edge " + src + "-" + dst + " references an unknown node");
        }
        const ServerId a = index[src];
        const ServerId b = index[dst];
        // The Zoo has a few self-loops and parallel links; keep one.
        if (a == b) {
            continue;
        }
        const std::pair<ServerId, ServerId> key = std::minmax(a, b);
        if (!seen.insert({key.first, key.second}).second) {
            continue;
        }
        Link link{key.first, key.second, default_rate,
                  std::hypot(servers[a].x_m - servers[b].x_m, servers[a].y_m - servers[b].y_m)};
        if (auto it = overrides.find({key.first, key.second}); it != overrides.end()) {
            link.rate_bps = it->second.first.value_or(link.rate_bps);
            link.distance_m = it->second.second.value_or(link.distance_m);
        }
        links.push_back(link);
    }
    std::string name = side.value("name", std::string{});
    if (name.empty()) {
        name = "graphml";
        for (const auto& [tag, child] : *graph) {
            if (tag == "data" && key_names[child.get<std::string>("<xmlattr>.key", "")] == "Network") {
                name = child.data();
            }
        }
    }
    for (auto& c : name) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            c = '_';
        }
    }
    return Topology::build(name, std::move(servers), std::move(links));
}

}  // namespace mecsim
