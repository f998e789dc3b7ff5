#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ponplan {

enum class NodeKind { Rack, LowerAwgr, UpperAwgr, Olt };

std::string to_string(NodeKind kind);
std::optional<NodeKind> node_kind_from_string(const std::string& s);

/// Index of a node within its Topology. Only meaningful together with the
/// topology that produced it.
struct NodeId {
  std::uint32_t value = 0;
  friend bool operator==(NodeId a, NodeId b) { return a.value == b.value; }
  friend bool operator!=(NodeId a, NodeId b) { return a.value != b.value; }
  friend bool operator<(NodeId a, NodeId b) { return a.value < b.value; }
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Rack;
  int port_count = 0;
};

/// Wavelength routing table of an N x N AWGR: table[input][output] is the
/// wavelength index the device routes between that port pair.
struct AwgrMap {
  int size = 0;
  bool cyclic_convention = true;        // true when table == cyclic(size)
  std::vector<std::vector<int>> table;  // size x size

  static AwgrMap cyclic(int n);
  int wavelength(int input, int output) const;
};

// Cyclic AWGR port-pair wavelength: (i + o) mod n.
int awgr_wavelength(int input, int output, int n);

/// Raw description of a topology, as it appears in the JSON document.
/// May describe an invalid topology; validate_topology reports violations
/// as data and Topology::build refuses invalid input.
struct TopologyData {
  struct RawLink {
    std::string from_node;
    int from_port = 0;
    std::string to_node;
    int to_port = 0;
    std::vector<int> wavelengths;
    double capacity_gbps = 0.0;
  };

  std::string name;
  std::vector<Node> nodes;
  std::vector<RawLink> links;
  std::map<std::string, AwgrMap> awgr_maps;  // keyed by AWGR node id
};

struct TopologyViolation {
  std::string code;     // e.g. "dangling-link", "awgr-map-not-bijective"
  std::string message;  // names the offending node/link
};

struct TopologyReport {
  std::vector<TopologyViolation> violations;
  bool ok() const { return violations.empty(); }
};

TopologyReport validate_topology(const TopologyData& data);

struct Endpoint {
  NodeId node;
  int port = 0;
};

struct Link {
  Endpoint from;
  Endpoint to;
  std::vector<int> wavelengths;  // sorted, deduplicated
  double capacity_gbps = 0.0;    // per wavelength

  double total_capacity_gbps() const {
    return capacity_gbps * static_cast<double>(wavelengths.size());
  }
  bool carries(int wavelength) const;
};

enum class RouteClass { DirectAwgrA = 0, DirectAwgrB = 1, ViaOlt = 2 };

std::string to_string(RouteClass rc);
std::optional<RouteClass> route_class_from_string(const std::string& s);

/// One AWGR traversal on a path: entering in_port, leaving out_port, which
/// pins the wavelength the device routes between those ports.
struct AwgrHop {
  NodeId node;
  int in_port = 0;
  int out_port = 0;
  int forced_wavelength = 0;
};

struct Path {
  std::vector<std::size_t> links;  // indices into Topology::links(), in order
  RouteClass route_class = RouteClass::DirectAwgrA;
  std::vector<AwgrHop> awgr_hops;
};

/// Immutable directed multigraph of a PON cell plus the per-rack-pair
/// candidate paths, enumerated once at construction. Safe to share
/// read-only across threads.
class Topology {
 public:
  Topology() = default;  // empty; only useful as a placeholder

  // Validates `data` and enumerates candidate paths for every ordered rack
  // pair. Throws std::invalid_argument when validation fails.
  static Topology build(const TopologyData& data);

  const std::string& name() const { return name_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  const Node& node(NodeId id) const { return nodes_[id.value]; }
  std::optional<NodeId> find_node(const std::string& id) const;
  bool is_rack(NodeId id) const { return node(id).kind == NodeKind::Rack; }

  // Racks in canonical order (node id ascending), independent of the order
  // nodes were listed in.
  const std::vector<NodeId>& racks() const { return racks_; }
  // Position of a rack in racks(), or -1.
  int rack_index(NodeId id) const;

  const AwgrMap* awgr_map(NodeId id) const;

  // All loop-free candidate paths s -> d in route-class order
  // (DirectAwgrA, DirectAwgrB, ViaOlt). Throws on s == d or non-rack
  // endpoints.
  const std::vector<Path>& candidate_paths(NodeId s, NodeId d) const;

  // The raw data this topology was built from (canonical field order).
  const TopologyData& data() const { return data_; }

  std::string describe_link(std::size_t link_index) const;

 private:
  std::string name_;
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::map<std::string, AwgrMap> awgr_maps_;  // by node id
  std::vector<NodeId> racks_;
  std::vector<int> rack_index_;  // node index -> rack position or -1
  // candidate paths for ordered rack pair (i, j), i != j, keyed by
  // i * racks.size() + j over rack positions.
  std::vector<std::vector<Path>> paths_;
  TopologyData data_;
};

/// The default 4-rack cell: two parallel 4x4 cyclic AWGR meshes between the
/// racks (route classes A and B) and a 1:4 AWGR pair that hairpins
/// inter-rack traffic through the OLT. Every link carries 4 wavelengths at
/// 10 Gbps each.
TopologyData cell4_data();
Topology build_cell4();

}  // namespace ponplan
