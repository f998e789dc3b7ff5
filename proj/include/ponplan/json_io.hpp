#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ponplan/experiments.hpp"
#include "ponplan/model.hpp"
#include "ponplan/topology.hpp"

namespace ponplan {

/// Error in a structured document, carrying the JSON-ish path of the
/// offending field ("demands.explicit[0].source").
class DocumentError : public std::runtime_error {
 public:
  DocumentError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// ---- topology documents (schema ponplan/topology/v1) ----
std::string topology_to_json(const TopologyData& data);
TopologyData topology_from_json(const std::string& text);
TopologyData load_topology_file(const std::string& path);
void save_topology_file(const TopologyData& data, const std::string& path);

// ---- allocation documents (schema ponplan/allocation/v1) ----
/// Self-describing allocation: carries the topology name, plan, normalized
/// demand list and per-pair grants, plus the derived link occupancy table.
struct AllocationDoc {
  std::string topology_name;
  ResourcePlan plan;
  std::vector<Demand> demands;  // normalized order
  Allocation allocation;
};

std::string allocation_to_json(const Topology& topo, const AllocationDoc& doc);
// Parses and resolves rack names against `topo`; throws DocumentError on
// schema problems (unknown racks, bad indices stay as data for the checker
// where representable).
AllocationDoc allocation_from_json(const Topology& topo, const std::string& text);

// ---- run configuration (schema ponplan/config/v1) ----
struct SweepConfig {
  SweepAxis axis = SweepAxis::VolumePerDemand;
  std::vector<double> values;
  int replications = 10;
  VolumeBasis volume_basis = VolumeBasis::PerDemand;
};

struct RunConfig {
  TopologyData topology_data;
  Topology topology;  // built from topology_data
  std::vector<ResourcePlan> plans;
  // exactly one demand source
  bool has_scenario = false;
  Scenario scenario;                  // racks resolved against the topology
  std::vector<Demand> explicit_demands;
  SolveLimits limits;
  std::optional<SweepConfig> sweep;
  int parallel = 1;

  // The demand set for one solve: explicit list or one scenario draw.
  std::vector<Demand> realize_demands() const;
};

RunConfig run_config_from_json(const std::string& text,
                               const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ponplan
