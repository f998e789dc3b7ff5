#pragma once

#include <cstdint>
#include <vector>

#include "ponplan/topology.hpp"

namespace ponplan {

/// One rack-to-rack traffic demand in Gbps.
struct Demand {
  NodeId source;
  NodeId dest;
  double volume_gbps = 0.0;
};

enum class ScenarioKind { AllNodes, SubsetActive };

/// Seeded random demand generation recipe. AllNodes draws endpoints from
/// every rack; SubsetActive restricts endpoints to active_racks and leaves
/// the remaining racks idle.
struct Scenario {
  ScenarioKind kind = ScenarioKind::AllNodes;
  std::vector<NodeId> active_racks;  // SubsetActive only
  int demand_count = 0;
  std::vector<double> volume_grid = {1, 3, 5, 7, 9};
  std::uint64_t seed = 0;
};

// Draws demand_count demands: source uniform over the eligible racks, dest
// uniform over the remaining ones, volume uniform over volume_grid. The
// stream is a pure function of the seed (SplitMix64, three draws per
// demand), so the first k demands of a count-k run equal the first k of any
// longer run with the same seed. Throws when scenario invariants fail or
// fewer than two racks are eligible.
std::vector<Demand> generate_demands(const Topology& topo, const Scenario& sc);

// Normalization used before model building: volumes of duplicate (source,
// dest) pairs are summed and the result is sorted by (source rack position,
// dest rack position). Throws on self-demands, non-rack endpoints or
// non-positive volumes.
std::vector<Demand> merge_demands(const Topology& topo,
                                  const std::vector<Demand>& demands);

// One demand for every ordered pair of the given racks (canonical order),
// all with the same volume.
std::vector<Demand> all_pair_demands(const Topology& topo,
                                     const std::vector<NodeId>& racks,
                                     double volume_gbps);

// ceil(volume / block_capacity); the smallest block count whose aggregate
// rate covers the volume. Robust against representation noise on exact
// multiples. Throws on non-positive capacity.
int blocks_required(double volume_gbps, double block_capacity_gbps);

}  // namespace ponplan
