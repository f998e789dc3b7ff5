#include "ponplan/topology.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ponplan {

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Rack: return "rack";
    case NodeKind::LowerAwgr: return "lower_awgr";
    case NodeKind::UpperAwgr: return "upper_awgr";
    case NodeKind::Olt: return "olt";
  }
  return "?";
}

std::optional<NodeKind> node_kind_from_string(const std::string& s) {
  if (s == "rack") return NodeKind::Rack;
  if (s == "lower_awgr") return NodeKind::LowerAwgr;
  if (s == "upper_awgr") return NodeKind::UpperAwgr;
  if (s == "olt") return NodeKind::Olt;
  return std::nullopt;
}

std::string to_string(RouteClass rc) {
  switch (rc) {
    case RouteClass::DirectAwgrA: return "direct_awgr_a";
    case RouteClass::DirectAwgrB: return "direct_awgr_b";
    case RouteClass::ViaOlt: return "via_olt";
  }
  return "?";
}

std::optional<RouteClass> route_class_from_string(const std::string& s) {
  if (s == "direct_awgr_a") return RouteClass::DirectAwgrA;
  if (s == "direct_awgr_b") return RouteClass::DirectAwgrB;
  if (s == "via_olt") return RouteClass::ViaOlt;
  return std::nullopt;
}

int awgr_wavelength(int input, int output, int n) {
  if (n <= 0) throw std::invalid_argument("awgr_wavelength: size must be positive");
  if (input < 0 || input >= n)
    throw std::invalid_argument("awgr_wavelength: input port out of range");
  if (output < 0 || output >= n)
    throw std::invalid_argument("awgr_wavelength: output port out of range");
  return (input + output) % n;
}

AwgrMap AwgrMap::cyclic(int n) {
  AwgrMap map;
  map.size = n;
  map.cyclic_convention = true;
  map.table.assign(n, std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < n; ++o) map.table[i][o] = awgr_wavelength(i, o, n);
  return map;
}

int AwgrMap::wavelength(int input, int output) const {
  if (input < 0 || input >= size || output < 0 || output >= size)
    throw std::invalid_argument("AwgrMap: port out of range");
  return table[input][output];
}

bool Link::carries(int wavelength) const {
  return std::binary_search(wavelengths.begin(), wavelengths.end(), wavelength);
}

namespace {

std::string endpoint_str(const TopologyData::RawLink& l) {
  std::ostringstream os;
  os << l.from_node << "[" << l.from_port << "]->" << l.to_node << "["
     << l.to_port << "]";
  return os.str();
}

}  // namespace

TopologyReport validate_topology(const TopologyData& data) {
  TopologyReport report;
  auto add = [&](const std::string& code, const std::string& message) {
    report.violations.push_back({code, message});
  };

  std::map<std::string, const Node*> by_id;
  for (const auto& node : data.nodes) {
    if (node.id.empty()) add("empty-node-id", "node with empty id");
    if (!by_id.emplace(node.id, &node).second)
      add("duplicate-node-id", "node id '" + node.id + "' appears twice");
    if (node.port_count <= 0)
      add("bad-port-count", "node '" + node.id + "' has no ports");
  }

  for (const auto& link : data.links) {
    auto from = by_id.find(link.from_node);
    auto to = by_id.find(link.to_node);
    if (from == by_id.end())
      add("dangling-link", "link " + endpoint_str(link) + " references unknown node '" +
                               link.from_node + "'");
    if (to == by_id.end())
      add("dangling-link", "link " + endpoint_str(link) + " references unknown node '" +
                               link.to_node + "'");
    if (from != by_id.end() &&
        (link.from_port < 0 || link.from_port >= from->second->port_count))
      add("port-out-of-range", "link " + endpoint_str(link) + " from-port out of range");
    if (to != by_id.end() &&
        (link.to_port < 0 || link.to_port >= to->second->port_count))
      add("port-out-of-range", "link " + endpoint_str(link) + " to-port out of range");
    if (link.capacity_gbps <= 0)
      add("bad-capacity", "link " + endpoint_str(link) + " has non-positive capacity");
    if (link.wavelengths.empty())
      add("empty-wavelength-set", "link " + endpoint_str(link) + " carries no wavelengths");
    for (int w : link.wavelengths)
      if (w < 0) add("bad-wavelength", "link " + endpoint_str(link) + " has negative wavelength");
  }

  for (const auto& [id, map] : data.awgr_maps) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      add("map-unknown-node", "AWGR map for unknown node '" + id + "'");
      continue;
    }
    const Node& node = *it->second;
    if (node.kind != NodeKind::LowerAwgr && node.kind != NodeKind::UpperAwgr)
      add("map-on-non-awgr", "AWGR map attached to non-AWGR node '" + id + "'");
    if (map.size != node.port_count)
      add("map-size-mismatch", "AWGR map size " + std::to_string(map.size) +
                                   " does not match port count of '" + id + "'");
    if (static_cast<int>(map.table.size()) != map.size) {
      add("map-shape", "AWGR map table of '" + id + "' is not size x size");
      continue;
    }
    bool shape_ok = true;
    for (const auto& row : map.table)
      if (static_cast<int>(row.size()) != map.size) shape_ok = false;
    if (!shape_ok) {
      add("map-shape", "AWGR map table of '" + id + "' is not size x size");
      continue;
    }
    // each input must see every wavelength exactly once, and symmetrically
    // each output
    for (int i = 0; i < map.size; ++i) {
      std::set<int> seen(map.table[i].begin(), map.table[i].end());
      bool in_range = std::all_of(map.table[i].begin(), map.table[i].end(),
                                  [&](int w) { return w >= 0 && w < map.size; });
      if (!in_range || static_cast<int>(seen.size()) != map.size)
        add("awgr-map-not-bijective",
            "AWGR '" + id + "' input " + std::to_string(i) +
                " does not map outputs to distinct in-range wavelengths");
    }
    for (int o = 0; o < map.size; ++o) {
      std::set<int> seen;
      for (int i = 0; i < map.size; ++i) seen.insert(map.table[i][o]);
      if (static_cast<int>(seen.size()) != map.size)
        add("awgr-map-not-bijective",
            "AWGR '" + id + "' output " + std::to_string(o) +
                " does not see distinct wavelengths");
    }
  }

  for (const auto& node : data.nodes) {
    if ((node.kind == NodeKind::LowerAwgr || node.kind == NodeKind::UpperAwgr) &&
        data.awgr_maps.find(node.id) == data.awgr_maps.end())
      add("missing-awgr-map", "AWGR node '" + node.id + "' has no routing map");
  }

  // rack pair coverage is checked by Topology::build after path
  // enumeration; here we only need at least two racks for the invariant to
  // be meaningful
  int racks = 0;
  for (const auto& node : data.nodes)
    if (node.kind == NodeKind::Rack) ++racks;
  if (racks < 2) add("too-few-racks", "topology needs at least two racks");

  return report;
}

std::optional<NodeId> Topology::find_node(const std::string& id) const {
  for (std::uint32_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id == id) return NodeId{i};
  return std::nullopt;
}

int Topology::rack_index(NodeId id) const {
  if (id.value >= rack_index_.size()) return -1;
  return rack_index_[id.value];
}

const AwgrMap* Topology::awgr_map(NodeId id) const {
  auto it = awgr_maps_.find(node(id).id);
  return it == awgr_maps_.end() ? nullptr : &it->second;
}

const std::vector<Path>& Topology::candidate_paths(NodeId s, NodeId d) const {
  if (!is_rack(s) || !is_rack(d))
    throw std::invalid_argument("candidate_paths: endpoints must be racks");
  if (s == d)
    throw std::invalid_argument("candidate_paths: source equals destination");
  int si = rack_index(s), di = rack_index(d);
  return paths_[static_cast<std::size_t>(si) * racks_.size() + di];
}

std::string Topology::describe_link(std::size_t link_index) const {
  const Link& l = links_[link_index];
  std::ostringstream os;
  os << node(l.from.node).id << "->" << node(l.to.node).id;
  return os.str();
}

namespace {

// Depth-first enumeration of loop-free directed paths between two racks.
// Intermediate nodes are never racks (racks terminate traffic), and the
// search is bounded; the preset's two route shapes have 2 and 4 hops.
constexpr int kMaxPathLinks = 6;

void enumerate_paths(const Topology& topo,
                     const std::vector<std::vector<std::size_t>>& out_links,
                     NodeId src, NodeId dst, std::vector<std::size_t>& stack,
                     std::vector<bool>& visited,
                     std::vector<std::vector<std::size_t>>& found) {
  NodeId at = stack.empty() ? src : topo.links()[stack.back()].to.node;
  if (at == dst && !stack.empty()) {
    found.push_back(stack);
    return;
  }
  if (static_cast<int>(stack.size()) >= kMaxPathLinks) return;
  if (!stack.empty() && topo.is_rack(at)) return;  // rack reached early
  for (std::size_t li : out_links[at.value]) {
    NodeId next = topo.links()[li].to.node;
    if (visited[next.value]) continue;
    if (topo.is_rack(next) && next != dst) continue;
    visited[next.value] = true;
    stack.push_back(li);
    enumerate_paths(topo, out_links, src, dst, stack, visited, found);
    stack.pop_back();
    visited[next.value] = false;
  }
}

}  // namespace

Topology Topology::build(const TopologyData& data) {
  TopologyReport report = validate_topology(data);
  if (!report.ok()) {
    std::string msg = "invalid topology:";
    for (const auto& v : report.violations) msg += "\n  " + v.message;
    throw std::invalid_argument(msg);
  }

  Topology topo;
  topo.name_ = data.name;
  topo.data_ = data;
  topo.nodes_ = data.nodes;
  topo.awgr_maps_ = data.awgr_maps;

  std::map<std::string, std::uint32_t> index_of;
  for (std::uint32_t i = 0; i < topo.nodes_.size(); ++i)
    index_of[topo.nodes_[i].id] = i;

  for (const auto& raw : data.links) {
    Link link;
    link.from = {NodeId{index_of.at(raw.from_node)}, raw.from_port};
    link.to = {NodeId{index_of.at(raw.to_node)}, raw.to_port};
    link.wavelengths = raw.wavelengths;
    std::sort(link.wavelengths.begin(), link.wavelengths.end());
    link.wavelengths.erase(
        std::unique(link.wavelengths.begin(), link.wavelengths.end()),
        link.wavelengths.end());
    link.capacity_gbps = raw.capacity_gbps;
    topo.links_.push_back(std::move(link));
  }

  // canonical rack order: node id ascending, so results do not depend on
  // listing order
  std::vector<std::pair<std::string, std::uint32_t>> rack_ids;
  for (std::uint32_t i = 0; i < topo.nodes_.size(); ++i)
    if (topo.nodes_[i].kind == NodeKind::Rack)
      rack_ids.emplace_back(topo.nodes_[i].id, i);
  std::sort(rack_ids.begin(), rack_ids.end());
  topo.rack_index_.assign(topo.nodes_.size(), -1);
  for (std::size_t k = 0; k < rack_ids.size(); ++k) {
    topo.racks_.push_back(NodeId{rack_ids[k].second});
    topo.rack_index_[rack_ids[k].second] = static_cast<int>(k);
  }

  // adjacency in deterministic order: links sorted by (from node id, to
  // node id, ports, position)
  std::vector<std::vector<std::size_t>> out_links(topo.nodes_.size());
  {
    std::vector<std::size_t> order(topo.links_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const Link& la = topo.links_[a];
      const Link& lb = topo.links_[b];
      auto ka = std::tie(topo.nodes_[la.from.node.value].id,
                         topo.nodes_[la.to.node.value].id, la.from.port, la.to.port);
      auto kb = std::tie(topo.nodes_[lb.from.node.value].id,
                         topo.nodes_[lb.to.node.value].id, lb.from.port, lb.to.port);
      return ka < kb;
    });
    for (std::size_t li : order) out_links[topo.links_[li].from.node.value].push_back(li);
  }

  // rank lower-tier AWGRs by id to assign the two direct route classes
  std::vector<std::string> lower_ids;
  for (const auto& node : topo.nodes_)
    if (node.kind == NodeKind::LowerAwgr) lower_ids.push_back(node.id);
  std::sort(lower_ids.begin(), lower_ids.end());

  auto classify = [&](const std::vector<std::size_t>& links) -> RouteClass {
    bool has_olt = false;
    std::optional<std::string> lower;
    for (std::size_t li : links) {
      const Node& n = topo.nodes_[topo.links_[li].to.node.value];
      if (n.kind == NodeKind::Olt) has_olt = true;
      if (n.kind == NodeKind::LowerAwgr) lower = n.id;
    }
    if (has_olt) return RouteClass::ViaOlt;
    if (lower) {
      auto it = std::find(lower_ids.begin(), lower_ids.end(), *lower);
      std::size_t rank = static_cast<std::size_t>(it - lower_ids.begin());
      if (rank == 0) return RouteClass::DirectAwgrA;
      if (rank == 1) return RouteClass::DirectAwgrB;
      throw std::invalid_argument(
          "unsupported route shape: more than two lower-tier AWGRs");
    }
    throw std::invalid_argument("unsupported route shape: no AWGR or OLT hop");
  };

  std::size_t R = topo.racks_.size();
  topo.paths_.assign(R * R, {});
  for (std::size_t si = 0; si < R; ++si) {
    for (std::size_t di = 0; di < R; ++di) {
      if (si == di) continue;
      NodeId s = topo.racks_[si], d = topo.racks_[di];
      std::vector<std::vector<std::size_t>> found;
      std::vector<std::size_t> stack;
      std::vector<bool> visited(topo.nodes_.size(), false);
      visited[s.value] = true;
      enumerate_paths(topo, out_links, s, d, stack, visited, found);

      std::vector<Path> paths;
      for (auto& links : found) {
        Path p;
        p.route_class = classify(links);
        // AWGR traversals: consecutive link pair through an AWGR node
        for (std::size_t k = 0; k + 1 < links.size(); ++k) {
          const Link& in = topo.links_[links[k]];
          const Link& out = topo.links_[links[k + 1]];
          const Node& mid = topo.nodes_[in.to.node.value];
          if (mid.kind == NodeKind::LowerAwgr || mid.kind == NodeKind::UpperAwgr) {
            const AwgrMap* map = topo.awgr_map(in.to.node);
            AwgrHop hop;
            hop.node = in.to.node;
            hop.in_port = in.to.port;
            hop.out_port = out.from.port;
            hop.forced_wavelength = map->wavelength(hop.in_port, hop.out_port);
            p.awgr_hops.push_back(hop);
          }
        }
        p.links = std::move(links);
        paths.push_back(std::move(p));
      }
      std::sort(paths.begin(), paths.end(), [](const Path& a, const Path& b) {
        if (a.route_class != b.route_class) return a.route_class < b.route_class;
        return a.links < b.links;
      });
      if (paths.empty())
        throw std::invalid_argument("no candidate path between racks '" +
                                    topo.nodes_[s.value].id + "' and '" +
                                    topo.nodes_[d.value].id + "'");
      topo.paths_[si * R + di] = std::move(paths);
    }
  }

  return topo;
}

TopologyData cell4_data() {
  TopologyData data;
  data.name = "cell4";
  const int kRacks = 4;
  const std::vector<int> all_wl = {0, 1, 2, 3};
  const double kGbpsPerWavelength = 10.0;

  for (int r = 0; r < kRacks; ++r)
    // rack ports: 0 to/from AWGR-A, 1 to/from AWGR-B, 2 to upstream / from
    // downstream AWGR (directions have separate port spaces)
    data.nodes.push_back({"R" + std::to_string(r + 1), NodeKind::Rack, 3});
  data.nodes.push_back({"AWGR-A", NodeKind::LowerAwgr, kRacks});
  data.nodes.push_back({"AWGR-B", NodeKind::LowerAwgr, kRacks});
  data.nodes.push_back({"AWGR-UP", NodeKind::UpperAwgr, kRacks});
  data.nodes.push_back({"AWGR-DOWN", NodeKind::UpperAwgr, kRacks});
  data.nodes.push_back({"OLT", NodeKind::Olt, 1});

  auto link = [&](const std::string& a, int ap, const std::string& b, int bp) {
    data.links.push_back({a, ap, b, bp, all_wl, kGbpsPerWavelength});
  };

  for (int r = 0; r < kRacks; ++r) {
    std::string rack = "R" + std::to_string(r + 1);
    // two parallel direct meshes: rack r on port r of each lower AWGR
    link(rack, 0, "AWGR-A", r);
    link("AWGR-A", r, rack, 0);
    link(rack, 1, "AWGR-B", r);
    link("AWGR-B", r, rack, 1);
    // hairpin tier: rack r on distributed port r of the 1:4 pair
    link(rack, 2, "AWGR-UP", r);
    link("AWGR-DOWN", r, rack, 2);
  }
  // common ports of the 1:4 pair meet at the OLT
  link("AWGR-UP", 0, "OLT", 0);
  link("OLT", 0, "AWGR-DOWN", 0);

  for (const char* id : {"AWGR-A", "AWGR-B", "AWGR-UP", "AWGR-DOWN"})
    data.awgr_maps.emplace(id, AwgrMap::cyclic(kRacks));

  return data;
}

Topology build_cell4() { return Topology::build(cell4_data()); }

}  // namespace ponplan
