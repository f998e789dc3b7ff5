#include "ponplan/json_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ponplan {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kTopologySchema = "ponplan/topology/v1";
constexpr const char* kAllocationSchema = "ponplan/allocation/v1";
constexpr const char* kConfigSchema = "ponplan/config/v1";

std::string idx(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

ordered_json parse(const std::string& text, const std::string& what) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DocumentError(what, "not valid JSON");
  return j;
}

const ordered_json& member(const ordered_json& j, const std::string& path,
                           const std::string& key) {
  auto it = j.find(key);
  if (it == j.end())
    throw DocumentError(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

std::string get_string(const ordered_json& j, const std::string& field) {
  if (!j.is_string()) throw DocumentError(field, "expected a string");
  return j.get<std::string>();
}

int get_int(const ordered_json& j, const std::string& field) {
  if (!j.is_number_integer()) throw DocumentError(field, "expected an integer");
  return j.get<int>();
}

double get_number(const ordered_json& j, const std::string& field) {
  if (!j.is_number()) throw DocumentError(field, "expected a number");
  return j.get<double>();
}

void check_schema(const ordered_json& j, const char* expected) {
  std::string schema = get_string(member(j, "", "schema"), "schema");
  if (schema != expected)
    throw DocumentError("schema", "expected '" + std::string(expected) + "', found '" +
                                      schema + "'");
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DocumentError(path, "cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DocumentError(path, "cannot open file for writing");
  out << text;
}

// ---- topology ----

std::string topology_to_json(const TopologyData& data) {
  ordered_json j;
  j["schema"] = kTopologySchema;
  j["name"] = data.name;
  j["nodes"] = ordered_json::array();
  for (const auto& node : data.nodes) {
    ordered_json n;
    n["id"] = node.id;
    n["kind"] = to_string(node.kind);
    n["ports"] = node.port_count;
    j["nodes"].push_back(std::move(n));
  }
  j["links"] = ordered_json::array();
  for (const auto& link : data.links) {
    ordered_json l;
    l["from"] = ordered_json::array({link.from_node, link.from_port});
    l["to"] = ordered_json::array({link.to_node, link.to_port});
    l["wavelengths"] = link.wavelengths;
    l["capacity_gbps"] = link.capacity_gbps;
    j["links"].push_back(std::move(l));
  }
  j["awgr_maps"] = ordered_json::array();
  for (const auto& [id, map] : data.awgr_maps) {
    ordered_json m;
    m["node"] = id;
    m["size"] = map.size;
    if (map.cyclic_convention)
      m["convention"] = "cyclic";
    else
      m["table"] = map.table;
    j["awgr_maps"].push_back(std::move(m));
  }
  return j.dump(2) + "\n";
}

namespace {

TopologyData topology_from_value(const ordered_json& j, const std::string& base) {
  check_schema(j, kTopologySchema);
  TopologyData data;
  data.name = get_string(member(j, base, "name"), base + "name");

  const ordered_json& nodes = member(j, base, "nodes");
  if (!nodes.is_array()) throw DocumentError(base + "nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = idx(base + "nodes", i);
    const ordered_json& n = nodes[i];
    Node node;
    node.id = get_string(member(n, path, "id"), path + ".id");
    std::string kind = get_string(member(n, path, "kind"), path + ".kind");
    auto parsed = node_kind_from_string(kind);
    if (!parsed) throw DocumentError(path + ".kind", "unknown node kind '" + kind + "'");
    node.kind = *parsed;
    node.port_count = get_int(member(n, path, "ports"), path + ".ports");
    data.nodes.push_back(std::move(node));
  }

  const ordered_json& links = member(j, base, "links");
  if (!links.is_array()) throw DocumentError(base + "links", "expected an array");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string path = idx(base + "links", i);
    const ordered_json& l = links[i];
    TopologyData::RawLink link;
    const ordered_json& from = member(l, path, "from");
    const ordered_json& to = member(l, path, "to");
    if (!from.is_array() || from.size() != 2)
      throw DocumentError(path + ".from", "expected [node, port]");
    if (!to.is_array() || to.size() != 2)
      throw DocumentError(path + ".to", "expected [node, port]");
    link.from_node = get_string(from[0], path + ".from[0]");
    link.from_port = get_int(from[1], path + ".from[1]");
    link.to_node = get_string(to[0], path + ".to[0]");
    link.to_port = get_int(to[1], path + ".to[1]");
    const ordered_json& wl = member(l, path, "wavelengths");
    if (!wl.is_array()) throw DocumentError(path + ".wavelengths", "expected an array");
    for (std::size_t k = 0; k < wl.size(); ++k)
      link.wavelengths.push_back(get_int(wl[k], idx(path + ".wavelengths", k)));
    link.capacity_gbps =
        get_number(member(l, path, "capacity_gbps"), path + ".capacity_gbps");
    data.links.push_back(std::move(link));
  }

  const ordered_json& maps = member(j, base, "awgr_maps");
  if (!maps.is_array()) throw DocumentError(base + "awgr_maps", "expected an array");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const std::string path = idx(base + "awgr_maps", i);
    const ordered_json& m = maps[i];
    std::string node = get_string(member(m, path, "node"), path + ".node");
    int size = get_int(member(m, path, "size"), path + ".size");
    if (size <= 0) throw DocumentError(path + ".size", "must be positive");
    AwgrMap map;
    if (m.contains("table")) {
      map.size = size;
      map.cyclic_convention = false;
      const ordered_json& table = m["table"];
      if (!table.is_array()) throw DocumentError(path + ".table", "expected an array");
      for (std::size_t r = 0; r < table.size(); ++r) {
        const ordered_json& row = table[r];
        if (!row.is_array()) throw DocumentError(idx(path + ".table", r), "expected an array");
        std::vector<int> vals;
        for (std::size_t c = 0; c < row.size(); ++c)
          vals.push_back(get_int(row[c], idx(idx(path + ".table", r), c)));
        map.table.push_back(std::move(vals));
      }
    } else {
      std::string convention =
          get_string(member(m, path, "convention"), path + ".convention");
      if (convention != "cyclic")
        throw DocumentError(path + ".convention", "unknown convention '" + convention + "'");
      map = AwgrMap::cyclic(size);
    }
    if (!data.awgr_maps.emplace(node, std::move(map)).second)
      throw DocumentError(path + ".node", "duplicate map for node '" + node + "'");
  }

  return data;
}

}  // namespace

TopologyData topology_from_json(const std::string& text) {
  return topology_from_value(parse(text, "topology document"), "");
}

TopologyData load_topology_file(const std::string& path) {
  return topology_from_json(read_text_file(path));
}

void save_topology_file(const TopologyData& data, const std::string& path) {
  write_text_file(path, topology_to_json(data));
}

// ---- allocation ----

namespace {

ordered_json plan_to_value(const ResourcePlan& plan) {
  ordered_json p;
  p["name"] = plan.name;
  p["wavelengths"] = plan.num_wavelengths;
  p["slots"] = plan.num_slots;
  p["block_gbps"] = plan.block_capacity_gbps;
  return p;
}

ResourcePlan plan_from_value(const ordered_json& j, const std::string& path) {
  if (j.is_string()) {
    std::string name = j.get<std::string>();
    if (name == "tdm") return ResourcePlan::tdm();
    if (name == "wdm") return ResourcePlan::wdm();
    throw DocumentError(path, "unknown plan '" + name + "' (expected tdm or wdm)");
  }
  if (!j.is_object()) throw DocumentError(path, "expected a plan name or object");
  ResourcePlan plan;
  plan.name = get_string(member(j, path, "name"), path + ".name");
  plan.num_wavelengths = get_int(member(j, path, "wavelengths"), path + ".wavelengths");
  plan.num_slots = get_int(member(j, path, "slots"), path + ".slots");
  plan.block_capacity_gbps =
      get_number(member(j, path, "block_gbps"), path + ".block_gbps");
  if (plan.num_wavelengths < 1) throw DocumentError(path + ".wavelengths", "must be >= 1");
  if (plan.num_slots < 1) throw DocumentError(path + ".slots", "must be >= 1");
  if (plan.block_capacity_gbps <= 0)
    throw DocumentError(path + ".block_gbps", "must be positive");
  return plan;
}

NodeId resolve_rack(const Topology& topo, const std::string& name,
                    const std::string& path) {
  auto id = topo.find_node(name);
  if (!id) throw DocumentError(path, "unknown node '" + name + "'");
  if (!topo.is_rack(*id)) throw DocumentError(path, "node '" + name + "' is not a rack");
  return *id;
}

std::vector<Demand> demands_from_value(const Topology& topo, const ordered_json& j,
                                       const std::string& base) {
  if (!j.is_array()) throw DocumentError(base, "expected an array");
  std::vector<Demand> demands;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = idx(base, i);
    const ordered_json& d = j[i];
    Demand demand;
    demand.source = resolve_rack(
        topo, get_string(member(d, path, "source"), path + ".source"), path + ".source");
    demand.dest = resolve_rack(
        topo, get_string(member(d, path, "dest"), path + ".dest"), path + ".dest");
    demand.volume_gbps =
        get_number(member(d, path, "volume_gbps"), path + ".volume_gbps");
    if (demand.volume_gbps <= 0)
      throw DocumentError(path + ".volume_gbps", "must be positive");
    if (demand.source == demand.dest)
      throw DocumentError(path + ".dest", "demand source equals destination");
    demands.push_back(demand);
  }
  return demands;
}

}  // namespace

std::string allocation_to_json(const Topology& topo, const AllocationDoc& doc) {
  ordered_json j;
  j["schema"] = kAllocationSchema;
  j["topology"] = doc.topology_name;
  j["plan"] = plan_to_value(doc.plan);

  j["demands"] = ordered_json::array();
  for (const auto& d : doc.demands) {
    ordered_json v;
    v["source"] = topo.node(d.source).id;
    v["dest"] = topo.node(d.dest).id;
    v["volume_gbps"] = d.volume_gbps;
    j["demands"].push_back(std::move(v));
  }

  j["grants"] = ordered_json::array();
  for (std::size_t pr = 0; pr < doc.allocation.grants.size(); ++pr) {
    const Demand& d = doc.demands[pr];
    const auto& paths = topo.candidate_paths(d.source, d.dest);
    auto grants = sorted_grants(doc.allocation.grants[pr]);
    ordered_json g;
    g["source"] = topo.node(d.source).id;
    g["dest"] = topo.node(d.dest).id;
    std::set<int> wavelengths;
    ordered_json slots = ordered_json::array();
    ordered_json blocks = ordered_json::array();
    for (const auto& grant : grants) {
      wavelengths.insert(grant.wavelength);
      slots.push_back(grant.slot);
      ordered_json b;
      b["wavelength"] = grant.wavelength;
      b["slot"] = grant.slot;
      b["path"] = grant.path;
      b["route"] = (grant.path >= 0 && grant.path < static_cast<int>(paths.size()))
                       ? to_string(paths[grant.path].route_class)
                       : "none";
      blocks.push_back(std::move(b));
    }
    if (wavelengths.size() == 1) g["wavelength"] = *wavelengths.begin();
    g["slots"] = std::move(slots);
    g["blocks"] = std::move(blocks);
    j["grants"].push_back(std::move(g));
  }

  // derived link occupancy table
  std::map<std::size_t, ordered_json> occupancy;
  for (std::size_t pr = 0; pr < doc.allocation.grants.size(); ++pr) {
    const Demand& d = doc.demands[pr];
    const auto& paths = topo.candidate_paths(d.source, d.dest);
    for (const auto& grant : sorted_grants(doc.allocation.grants[pr])) {
      if (grant.path < 0 || grant.path >= static_cast<int>(paths.size())) continue;
      for (std::size_t li : paths[grant.path].links) {
        ordered_json b;
        b["wavelength"] = grant.wavelength;
        b["slot"] = grant.slot;
        b["source"] = topo.node(d.source).id;
        b["dest"] = topo.node(d.dest).id;
        occupancy[li].push_back(std::move(b));
      }
    }
  }
  j["link_occupancy"] = ordered_json::array();
  for (auto& [li, blocks] : occupancy) {
    ordered_json entry;
    entry["link_index"] = li;
    entry["link"] = topo.describe_link(li);
    entry["blocks"] = std::move(blocks);
    j["link_occupancy"].push_back(std::move(entry));
  }

  return j.dump(2) + "\n";
}

AllocationDoc allocation_from_json(const Topology& topo, const std::string& text) {
  ordered_json j = parse(text, "allocation document");
  check_schema(j, kAllocationSchema);

  AllocationDoc doc;
  doc.topology_name = get_string(member(j, "", "topology"), "topology");
  doc.plan = plan_from_value(member(j, "", "plan"), "plan");
  doc.demands = demands_from_value(topo, member(j, "", "demands"), "demands");

  // grants are keyed by pair; align them with the normalized demand order
  std::vector<Demand> normalized = merge_demands(topo, doc.demands);
  std::map<std::pair<int, int>, std::size_t> pair_index;
  for (std::size_t i = 0; i < normalized.size(); ++i)
    pair_index[{topo.rack_index(normalized[i].source),
                topo.rack_index(normalized[i].dest)}] = i;

  doc.demands = normalized;
  doc.allocation.grants.assign(normalized.size(), {});

  const ordered_json& grants = member(j, "", "grants");
  if (!grants.is_array()) throw DocumentError("grants", "expected an array");
  for (std::size_t i = 0; i < grants.size(); ++i) {
    const std::string path = idx("grants", i);
    const ordered_json& g = grants[i];
    NodeId source = resolve_rack(
        topo, get_string(member(g, path, "source"), path + ".source"), path + ".source");
    NodeId dest = resolve_rack(
        topo, get_string(member(g, path, "dest"), path + ".dest"), path + ".dest");
    auto it = pair_index.find({topo.rack_index(source), topo.rack_index(dest)});
    if (it == pair_index.end())
      throw DocumentError(path, "no demand for pair " + topo.node(source).id + "->" +
                                    topo.node(dest).id);
    const ordered_json& blocks = member(g, path, "blocks");
    if (!blocks.is_array()) throw DocumentError(path + ".blocks", "expected an array");
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const std::string bpath = idx(path + ".blocks", k);
      const ordered_json& b = blocks[k];
      BlockGrant grant;
      grant.wavelength = get_int(member(b, bpath, "wavelength"), bpath + ".wavelength");
      grant.slot = get_int(member(b, bpath, "slot"), bpath + ".slot");
      grant.path = get_int(member(b, bpath, "path"), bpath + ".path");
      doc.allocation.grants[it->second].push_back(grant);
    }
  }

  return doc;
}

// ---- run config ----

std::vector<Demand> RunConfig::realize_demands() const {
  if (has_scenario) return generate_demands(topology, scenario);
  return explicit_demands;
}

RunConfig run_config_from_json(const std::string& text, const std::string& base_dir) {
  ordered_json j = parse(text, "config document");
  check_schema(j, kConfigSchema);

  RunConfig config;

  const ordered_json& topo_field = member(j, "", "topology");
  if (topo_field.is_string()) {
    std::string name = topo_field.get<std::string>();
    if (name == "cell4") {
      config.topology_data = cell4_data();
    } else {
      throw DocumentError("topology", "unknown preset '" + name + "' (expected cell4)");
    }
  } else if (topo_field.is_object() && topo_field.contains("file")) {
    std::string file = get_string(topo_field["file"], "topology.file");
    std::filesystem::path p(file);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    config.topology_data = load_topology_file(p.string());
  } else if (topo_field.is_object()) {
    config.topology_data = topology_from_value(topo_field, "topology.");
  } else {
    throw DocumentError("topology", "expected a preset name, {file: ...} or an inline document");
  }
  try {
    config.topology = Topology::build(config.topology_data);
  } catch (const std::exception& e) {
    throw DocumentError("topology", e.what());
  }

  const ordered_json& plans = member(j, "", "plans");
  if (!plans.is_array() || plans.empty())
    throw DocumentError("plans", "expected a non-empty array");
  for (std::size_t i = 0; i < plans.size(); ++i)
    config.plans.push_back(plan_from_value(plans[i], idx("plans", i)));

  const ordered_json& demands = member(j, "", "demands");
  if (!demands.is_object()) throw DocumentError("demands", "expected an object");
  bool has_explicit = demands.contains("explicit");
  bool has_scenario = demands.contains("scenario");
  if (has_explicit == has_scenario)
    throw DocumentError("demands",
                        "exactly one of demands.explicit and demands.scenario is required");
  if (has_explicit) {
    config.explicit_demands =
        demands_from_value(config.topology, demands["explicit"], "demands.explicit");
  } else {
    const ordered_json& sc = demands["scenario"];
    const std::string base = "demands.scenario";
    std::string kind = get_string(member(sc, base, "kind"), base + ".kind");
    if (kind == "all_nodes") {
      config.scenario.kind = ScenarioKind::AllNodes;
    } else if (kind == "subset_active") {
      config.scenario.kind = ScenarioKind::SubsetActive;
      const ordered_json& actives = member(sc, base, "active_racks");
      if (!actives.is_array())
        throw DocumentError(base + ".active_racks", "expected an array");
      for (std::size_t i = 0; i < actives.size(); ++i)
        config.scenario.active_racks.push_back(
            resolve_rack(config.topology,
                         get_string(actives[i], idx(base + ".active_racks", i)),
                         idx(base + ".active_racks", i)));
    } else {
      throw DocumentError(base + ".kind", "expected all_nodes or subset_active");
    }
    config.scenario.demand_count =
        get_int(member(sc, base, "demand_count"), base + ".demand_count");
    if (config.scenario.demand_count < 0)
      throw DocumentError(base + ".demand_count", "must be >= 0");
    if (sc.contains("volume_grid")) {
      config.scenario.volume_grid.clear();
      const ordered_json& grid = sc["volume_grid"];
      if (!grid.is_array() || grid.empty())
        throw DocumentError(base + ".volume_grid", "expected a non-empty array");
      for (std::size_t i = 0; i < grid.size(); ++i)
        config.scenario.volume_grid.push_back(
            get_number(grid[i], idx(base + ".volume_grid", i)));
    }
    if (sc.contains("seed")) {
      if (!sc["seed"].is_number_integer())
        throw DocumentError(base + ".seed", "expected an integer");
      config.scenario.seed = sc["seed"].get<std::uint64_t>();
    }
    config.has_scenario = true;
  }

  if (j.contains("limits")) {
    const ordered_json& limits = j["limits"];
    if (!limits.is_object()) throw DocumentError("limits", "expected an object");
    if (limits.contains("time_budget_s")) {
      double v = get_number(limits["time_budget_s"], "limits.time_budget_s");
      if (v <= 0) throw DocumentError("limits.time_budget_s", "must be positive");
      config.limits.time_budget_s = v;
    }
    if (limits.contains("node_budget")) {
      if (!limits["node_budget"].is_number_integer() ||
          limits["node_budget"].get<long long>() <= 0)
        throw DocumentError("limits.node_budget", "must be a positive integer");
      config.limits.node_budget = limits["node_budget"].get<std::uint64_t>();
    }
  }

  if (j.contains("sweep")) {
    const ordered_json& sweep = j["sweep"];
    if (!sweep.is_object()) throw DocumentError("sweep", "expected an object");
    SweepConfig sc;
    std::string axis = get_string(member(sweep, "sweep", "axis"), "sweep.axis");
    if (axis == "volume_per_demand") sc.axis = SweepAxis::VolumePerDemand;
    else if (axis == "demand_count") sc.axis = SweepAxis::DemandCount;
    else throw DocumentError("sweep.axis", "expected volume_per_demand or demand_count");
    const ordered_json& values = member(sweep, "sweep", "values");
    if (!values.is_array() || values.empty())
      throw DocumentError("sweep.values", "expected a non-empty array");
    for (std::size_t i = 0; i < values.size(); ++i)
      sc.values.push_back(get_number(values[i], idx("sweep.values", i)));
    if (sweep.contains("replications")) {
      sc.replications = get_int(sweep["replications"], "sweep.replications");
      if (sc.replications < 1)
        throw DocumentError("sweep.replications", "must be >= 1");
    }
    if (sweep.contains("volume_basis")) {
      std::string basis = get_string(sweep["volume_basis"], "sweep.volume_basis");
      if (basis == "per_demand") sc.volume_basis = VolumeBasis::PerDemand;
      else if (basis == "aggregate") sc.volume_basis = VolumeBasis::Aggregate;
      else throw DocumentError("sweep.volume_basis", "expected per_demand or aggregate");
    }
    config.sweep = std::move(sc);
  }

  if (j.contains("parallel")) {
    config.parallel = get_int(j["parallel"], "parallel");
    if (config.parallel < 1) throw DocumentError("parallel", "must be >= 1");
  }

  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::filesystem::path p(path);
  return run_config_from_json(read_text_file(path),
                              p.has_parent_path() ? p.parent_path().string() : ".");
}

}  // namespace ponplan
