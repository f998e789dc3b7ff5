#include "ponplan/demand.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "ponplan/rng.hpp"

namespace ponplan {

namespace {

void check_scenario(const Topology& topo, const Scenario& sc) {
  if (sc.demand_count < 0)
    throw std::invalid_argument("scenario: demand_count must be >= 0");
  if (sc.volume_grid.empty())
    throw std::invalid_argument("scenario: volume_grid must not be empty");
  for (std::size_t i = 0; i < sc.volume_grid.size(); ++i) {
    if (sc.volume_grid[i] <= 0)
      throw std::invalid_argument("scenario: volume_grid values must be positive");
    if (i > 0 && sc.volume_grid[i] <= sc.volume_grid[i - 1])
      throw std::invalid_argument("scenario: volume_grid must be strictly increasing");
  }
  if (sc.kind == ScenarioKind::SubsetActive) {
    if (sc.active_racks.size() < 2)
      throw std::invalid_argument("scenario: SubsetActive needs at least two active racks");
    for (NodeId r : sc.active_racks)
      if (topo.rack_index(r) < 0)
        throw std::invalid_argument("scenario: active_racks must be racks of the topology");
  }
}

}  // namespace

std::vector<Demand> generate_demands(const Topology& topo, const Scenario& sc) {
  check_scenario(topo, sc);

  std::vector<NodeId> eligible;
  if (sc.kind == ScenarioKind::AllNodes) {
    eligible = topo.racks();
  } else {
    eligible = sc.active_racks;
    // canonical order regardless of how the set was written down
    std::sort(eligible.begin(), eligible.end(), [&](NodeId a, NodeId b) {
      return topo.rack_index(a) < topo.rack_index(b);
    });
    eligible.erase(std::unique(eligible.begin(), eligible.end()), eligible.end());
  }
  if (eligible.size() < 2)
    throw std::invalid_argument("generate_demands: fewer than two eligible racks");

  SplitMix64 rng(sc.seed);
  std::vector<Demand> demands;
  demands.reserve(static_cast<std::size_t>(sc.demand_count));
  const std::uint64_t n = eligible.size();
  for (int k = 0; k < sc.demand_count; ++k) {
    std::uint64_t si = rng.next_below(n);
    std::uint64_t di = rng.next_below(n - 1);
    if (di >= si) ++di;  // skip the source without rejection sampling
    double volume = sc.volume_grid[rng.next_below(sc.volume_grid.size())];
    demands.push_back({eligible[si], eligible[di], volume});
  }
  return demands;
}

std::vector<Demand> merge_demands(const Topology& topo,
                                  const std::vector<Demand>& demands) {
  std::map<std::pair<int, int>, double> merged;
  for (const auto& d : demands) {
    int si = topo.rack_index(d.source);
    int di = topo.rack_index(d.dest);
    if (si < 0 || di < 0)
      throw std::invalid_argument("merge_demands: demand endpoint is not a rack");
    if (si == di)
      throw std::invalid_argument("merge_demands: demand source equals destination");
    if (d.volume_gbps <= 0)
      throw std::invalid_argument("merge_demands: demand volume must be positive");
    merged[{si, di}] += d.volume_gbps;
  }
  std::vector<Demand> out;
  out.reserve(merged.size());
  for (const auto& [pair, volume] : merged)
    out.push_back({topo.racks()[pair.first], topo.racks()[pair.second], volume});
  return out;
}

std::vector<Demand> all_pair_demands(const Topology& topo,
                                     const std::vector<NodeId>& racks,
                                     double volume_gbps) {
  std::vector<NodeId> ordered = racks;
  std::sort(ordered.begin(), ordered.end(), [&](NodeId a, NodeId b) {
    return topo.rack_index(a) < topo.rack_index(b);
  });
  std::vector<Demand> out;
  for (NodeId s : ordered)
    for (NodeId d : ordered)
      if (s != d) out.push_back({s, d, volume_gbps});
  return out;
}

int blocks_required(double volume_gbps, double block_capacity_gbps) {
  if (block_capacity_gbps <= 0)
    throw std::invalid_argument("blocks_required: capacity must be positive");
  if (volume_gbps < 0)
    throw std::invalid_argument("blocks_required: volume must be >= 0");
  if (volume_gbps == 0) return 0;
  double ratio = volume_gbps / block_capacity_gbps;
  auto k = static_cast<long long>(std::floor(ratio + 1e-9));
  double tolerance = 1e-9 * std::max(1.0, volume_gbps);
  if (static_cast<double>(k) * block_capacity_gbps + tolerance < volume_gbps) ++k;
  return static_cast<int>(k);
}

}  // namespace ponplan
