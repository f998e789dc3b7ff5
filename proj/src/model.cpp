#include "ponplan/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ponplan {

bool wavelength_compatible(int forced, int j, int num_wavelengths) {
  if (num_wavelengths <= 0) return false;
  return (forced % num_wavelengths) == (j % num_wavelengths);
}

std::vector<int> path_wavelengths(const Topology& topo, const Path& path,
                                  int num_wavelengths) {
  std::vector<int> out;
  for (int j = 0; j < num_wavelengths; ++j) {
    bool ok = true;
    for (const auto& hop : path.awgr_hops)
      if (!wavelength_compatible(hop.forced_wavelength, j, num_wavelengths)) ok = false;
    for (std::size_t li : path.links)
      if (!topo.links()[li].carries(j)) ok = false;
    if (ok) out.push_back(j);
  }
  return out;
}

long long Allocation::total_blocks() const {
  long long total = 0;
  for (const auto& g : grants) total += static_cast<long long>(g.size());
  return total;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.family << ": " << v.message << "\n";
  return os.str();
}

double granted_capacity_gbps(const Allocation& alloc, const ResourcePlan& plan) {
  return static_cast<double>(alloc.total_blocks()) * plan.block_capacity_gbps;
}

std::vector<BlockGrant> sorted_grants(const std::vector<BlockGrant>& grants) {
  std::vector<BlockGrant> out = grants;
  std::sort(out.begin(), out.end(), [](const BlockGrant& a, const BlockGrant& b) {
    return std::tie(a.wavelength, a.slot, a.path) <
           std::tie(b.wavelength, b.slot, b.path);
  });
  return out;
}

bool allocation_key_less(const Allocation& a, const Allocation& b) {
  std::size_t pairs = std::min(a.grants.size(), b.grants.size());
  for (std::size_t i = 0; i < pairs; ++i) {
    auto ga = sorted_grants(a.grants[i]);
    auto gb = sorted_grants(b.grants[i]);
    std::size_t n = std::min(ga.size(), gb.size());
    for (std::size_t k = 0; k < n; ++k) {
      auto ka = std::tie(ga[k].wavelength, ga[k].slot, ga[k].path);
      auto kb = std::tie(gb[k].wavelength, gb[k].slot, gb[k].path);
      if (ka != kb) return ka < kb;
    }
    if (ga.size() != gb.size()) return ga.size() < gb.size();
  }
  return a.grants.size() < b.grants.size();
}

long long IlpInstance::required_total() const {
  long long total = 0;
  for (int b : required_) total += b;
  return total;
}

const std::vector<int>& IlpInstance::compatible_paths(int pair, int j) const {
  return compat_[pair][j];
}

const std::vector<Path>& IlpInstance::pair_paths(int pair) const {
  return topo_->candidate_paths(demands_[pair].source, demands_[pair].dest);
}

int IlpInstance::mu_index(int pair, int j, int t) const {
  return mu_base_ +
         (pair * plan_.num_wavelengths + j) * plan_.num_slots + t;
}

int IlpInstance::delta_index(int pair, int j) const {
  return delta_base_ + pair * plan_.num_wavelengths + j;
}

int IlpInstance::path_index(int pair, int j, int t, int path) const {
  return path_var_base_[pair] +
         (j * plan_.num_slots + t) * paths_per_pair_[pair] + path;
}

std::vector<int> IlpInstance::violated_constraints(
    const std::vector<std::uint8_t>& assignment) const {
  if (assignment.size() != vars_.size())
    throw std::invalid_argument("assignment size does not match variable count");
  std::vector<int> violated;
  constexpr double kEps = 1e-9;
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    double value = 0;
    for (const auto& [var, coeff] : constraints_[c].terms)
      if (assignment[var]) value += coeff;
    if (value < constraints_[c].lower - kEps || value > constraints_[c].upper + kEps)
      violated.push_back(static_cast<int>(c));
  }
  return violated;
}

Allocation IlpInstance::decode(const std::vector<std::uint8_t>& assignment) const {
  if (assignment.size() != vars_.size())
    throw std::invalid_argument("assignment size does not match variable count");
  Allocation alloc;
  alloc.grants.resize(demands_.size());
  const int W = plan_.num_wavelengths, T = plan_.num_slots;
  for (std::size_t pair = 0; pair < demands_.size(); ++pair) {
    int npaths = paths_per_pair_[pair];
    for (int j = 0; j < W; ++j) {
      for (int t = 0; t < T; ++t) {
        bool routed = false;
        for (int p = 0; p < npaths; ++p) {
          if (assignment[path_index(pair, j, t, p)]) {
            alloc.grants[pair].push_back({j, t, p});
            routed = true;
          }
        }
        if (!routed && assignment[mu_index(static_cast<int>(pair), j, t)])
          alloc.grants[pair].push_back({j, t, -1});
      }
    }
  }
  return alloc;
}

std::vector<std::uint8_t> IlpInstance::encode(const Allocation& alloc) const {
  if (alloc.grants.size() != demands_.size())
    throw std::invalid_argument("allocation pair count does not match instance");
  std::vector<std::uint8_t> assignment(vars_.size(), 0);
  const int W = plan_.num_wavelengths, T = plan_.num_slots;
  for (std::size_t pair = 0; pair < demands_.size(); ++pair) {
    for (const auto& g : alloc.grants[pair]) {
      if (g.wavelength < 0 || g.wavelength >= W || g.slot < 0 || g.slot >= T ||
          g.path < 0 || g.path >= paths_per_pair_[pair])
        throw std::invalid_argument("allocation grant indices out of range");
      assignment[mu_index(static_cast<int>(pair), g.wavelength, g.slot)] = 1;
      assignment[path_index(static_cast<int>(pair), g.wavelength, g.slot, g.path)] = 1;
      assignment[delta_index(static_cast<int>(pair), g.wavelength)] = 1;
    }
  }
  return assignment;
}

namespace {

std::string pair_tag(const Topology& topo, const Demand& d) {
  return topo.node(d.source).id + "->" + topo.node(d.dest).id;
}

}  // namespace

IlpInstance build_instance(const Topology& topo,
                           const std::vector<Demand>& normalized_demands,
                           const ResourcePlan& plan) {
  if (plan.num_wavelengths < 1 || plan.num_slots < 1 ||
      plan.block_capacity_gbps <= 0)
    throw std::invalid_argument("plan: needs W >= 1, T >= 1, positive block rate");

  // the full grid must fit on every rack-facing link
  double grid_gbps = plan.num_wavelengths * plan.num_slots * plan.block_capacity_gbps;
  for (std::size_t li = 0; li < topo.links().size(); ++li) {
    const Link& l = topo.links()[li];
    if (!topo.is_rack(l.from.node) && !topo.is_rack(l.to.node)) continue;
    if (grid_gbps > l.total_capacity_gbps() + 1e-9)
      throw std::invalid_argument("plan grid " + std::to_string(grid_gbps) +
                                  " Gbps exceeds rack link " +
                                  topo.describe_link(li) + " total rate");
  }

  for (std::size_t i = 0; i < normalized_demands.size(); ++i) {
    const Demand& d = normalized_demands[i];
    int si = topo.rack_index(d.source), di = topo.rack_index(d.dest);
    if (si < 0 || di < 0)
      throw std::invalid_argument("demand endpoint is not a rack of this topology");
    if (si == di)
      throw std::invalid_argument("demand " + pair_tag(topo, d) +
                                  ": source equals destination");
    if (d.volume_gbps <= 0)
      throw std::invalid_argument("demand " + pair_tag(topo, d) +
                                  ": volume must be positive");
    if (i > 0) {
      const Demand& prev = normalized_demands[i - 1];
      auto key = std::make_pair(topo.rack_index(prev.source),
                                topo.rack_index(prev.dest));
      if (std::make_pair(si, di) <= key)
        throw std::invalid_argument(
            "demands must be normalized (merge_demands) before build_instance");
    }
  }

  IlpInstance inst;
  inst.topo_ = &topo;
  inst.plan_ = plan;
  inst.demands_ = normalized_demands;

  const int W = plan.num_wavelengths, T = plan.num_slots;
  const int pairs = static_cast<int>(normalized_demands.size());

  for (const auto& d : normalized_demands)
    inst.required_.push_back(blocks_required(d.volume_gbps, plan.block_capacity_gbps));

  // variable layout: mu block, then delta block, then per-pair path blocks
  inst.mu_base_ = 0;
  inst.mu_count_ = pairs * W * T;
  inst.delta_base_ = inst.mu_count_;
  int next = inst.delta_base_ + pairs * W;
  inst.path_var_base_.resize(pairs);
  inst.paths_per_pair_.resize(pairs);
  for (int pr = 0; pr < pairs; ++pr) {
    const auto& paths =
        topo.candidate_paths(normalized_demands[pr].source, normalized_demands[pr].dest);
    if (paths.empty())
      throw std::invalid_argument("demand " + pair_tag(topo, normalized_demands[pr]) +
                                  " has no candidate path");
    inst.path_var_base_[pr] = next;
    inst.paths_per_pair_[pr] = static_cast<int>(paths.size());
    next += W * T * static_cast<int>(paths.size());
  }

  inst.vars_.resize(next);
  for (int pr = 0; pr < pairs; ++pr)
    for (int j = 0; j < W; ++j)
      for (int t = 0; t < T; ++t)
        inst.vars_[inst.mu_index(pr, j, t)] = {VarKind::Grant, pr, j, t, -1, false};
  for (int pr = 0; pr < pairs; ++pr)
    for (int j = 0; j < W; ++j)
      inst.vars_[inst.delta_index(pr, j)] = {VarKind::WavelengthSelect, pr, j, -1, -1, false};

  // wavelength compatibility per (pair, j): candidate paths whose AWGR hops
  // and links admit j
  inst.compat_.assign(pairs, std::vector<std::vector<int>>(W));
  for (int pr = 0; pr < pairs; ++pr) {
    const auto& paths = inst.pair_paths(pr);
    for (int p = 0; p < static_cast<int>(paths.size()); ++p) {
      std::vector<int> js = path_wavelengths(topo, paths[p], W);
      for (int j = 0; j < W; ++j) {
        bool ok = std::binary_search(js.begin(), js.end(), j);
        if (ok) inst.compat_[pr][j].push_back(p);
        for (int t = 0; t < T; ++t)
          inst.vars_[inst.path_index(pr, j, t, p)] =
              {VarKind::PathChoice, pr, j, t, p, !ok};
      }
    }
  }

  auto& rows = inst.constraints_;

  // F1: each granted block routes on exactly one candidate path
  for (int pr = 0; pr < pairs; ++pr) {
    for (int j = 0; j < W; ++j) {
      for (int t = 0; t < T; ++t) {
        LinearConstraint row;
        row.family = "F1";
        row.tag = pair_tag(topo, normalized_demands[pr]) + " j=" + std::to_string(j) +
                  " t=" + std::to_string(t);
        for (int p = 0; p < inst.paths_per_pair_[pr]; ++p)
          row.terms.emplace_back(inst.path_index(pr, j, t, p), 1.0);
        row.terms.emplace_back(inst.mu_index(pr, j, t), -1.0);
        row.lower = 0.0;
        row.upper = 0.0;
        rows.push_back(std::move(row));
      }
    }
  }

  // F2: per (link, j, t) single occupant; per link aggregate capacity
  const auto& links = topo.links();
  std::vector<std::vector<std::pair<int, int>>> users(links.size());  // (pair, path)
  for (int pr = 0; pr < pairs; ++pr) {
    const auto& paths = inst.pair_paths(pr);
    for (int p = 0; p < static_cast<int>(paths.size()); ++p)
      for (std::size_t li : paths[p].links)
        users[li].emplace_back(pr, p);
  }
  for (std::size_t li = 0; li < links.size(); ++li) {
    if (users[li].empty()) continue;
    for (int j = 0; j < W; ++j) {
      for (int t = 0; t < T; ++t) {
        LinearConstraint row;
        row.family = "F2";
        row.tag = topo.describe_link(li) + " j=" + std::to_string(j) +
                  " t=" + std::to_string(t);
        for (auto [pr, p] : users[li])
          row.terms.emplace_back(inst.path_index(pr, j, t, p), 1.0);
        row.upper = 1.0;
        rows.push_back(std::move(row));
      }
    }
    LinearConstraint total;
    total.family = "F2";
    total.tag = topo.describe_link(li) + " aggregate";
    for (auto [pr, p] : users[li])
      for (int j = 0; j < W; ++j)
        for (int t = 0; t < T; ++t)
          total.terms.emplace_back(inst.path_index(pr, j, t, p), 1.0);
    total.upper = std::floor(links[li].total_capacity_gbps() /
                                 plan.block_capacity_gbps +
                             1e-9);
    rows.push_back(std::move(total));
  }

  // F3: demand satisfaction
  for (int pr = 0; pr < pairs; ++pr) {
    LinearConstraint row;
    row.family = "F3";
    row.tag = pair_tag(topo, normalized_demands[pr]);
    for (int j = 0; j < W; ++j)
      for (int t = 0; t < T; ++t) row.terms.emplace_back(inst.mu_index(pr, j, t), 1.0);
    row.lower = inst.required_[pr];
    rows.push_back(std::move(row));
  }

  // F4: one wavelength per pair
  for (int pr = 0; pr < pairs; ++pr) {
    LinearConstraint row;
    row.family = "F4";
    row.tag = pair_tag(topo, normalized_demands[pr]);
    for (int j = 0; j < W; ++j) row.terms.emplace_back(inst.delta_index(pr, j), 1.0);
    row.upper = 1.0;
    rows.push_back(std::move(row));
    for (int j = 0; j < W; ++j) {
      for (int t = 0; t < T; ++t) {
        LinearConstraint link;
        link.family = "F4";
        link.tag = pair_tag(topo, normalized_demands[pr]) + " j=" + std::to_string(j) +
                   " t=" + std::to_string(t);
        link.terms.emplace_back(inst.mu_index(pr, j, t), 1.0);
        link.terms.emplace_back(inst.delta_index(pr, j), -1.0);
        link.upper = 0.0;
        rows.push_back(std::move(link));
      }
    }
  }

  // F5 / F6: endpoint collision freedom
  const int R = static_cast<int>(topo.racks().size());
  std::vector<std::vector<int>> pairs_from(R), pairs_into(R);
  for (int pr = 0; pr < pairs; ++pr) {
    pairs_from[topo.rack_index(normalized_demands[pr].source)].push_back(pr);
    pairs_into[topo.rack_index(normalized_demands[pr].dest)].push_back(pr);
  }
  for (int r = 0; r < R; ++r) {
    for (int j = 0; j < W; ++j) {
      for (int t = 0; t < T; ++t) {
        if (!pairs_into[r].empty()) {
          LinearConstraint row;
          row.family = "F5";
          row.tag = "dest=" + topo.node(topo.racks()[r]).id + " j=" +
                    std::to_string(j) + " t=" + std::to_string(t);
          for (int pr : pairs_into[r]) row.terms.emplace_back(inst.mu_index(pr, j, t), 1.0);
          row.upper = 1.0;
          rows.push_back(std::move(row));
        }
        if (!pairs_from[r].empty()) {
          LinearConstraint row;
          row.family = "F6";
          row.tag = "source=" + topo.node(topo.racks()[r]).id + " j=" +
                    std::to_string(j) + " t=" + std::to_string(t);
          for (int pr : pairs_from[r]) row.terms.emplace_back(inst.mu_index(pr, j, t), 1.0);
          row.upper = 1.0;
          rows.push_back(std::move(row));
        }
      }
    }
  }

  // AWGR: wavelength-incompatible path choices are pinned to zero
  for (int pr = 0; pr < pairs; ++pr) {
    for (int j = 0; j < W; ++j) {
      for (int p = 0; p < inst.paths_per_pair_[pr]; ++p) {
        if (std::binary_search(inst.compat_[pr][j].begin(), inst.compat_[pr][j].end(), p))
          continue;
        LinearConstraint row;
        row.family = "AWGR";
        row.tag = pair_tag(topo, normalized_demands[pr]) + " j=" + std::to_string(j) +
                  " path=" + std::to_string(p);
        for (int t = 0; t < T; ++t)
          row.terms.emplace_back(inst.path_index(pr, j, t, p), 1.0);
        row.upper = 0.0;
        rows.push_back(std::move(row));
      }
    }
  }

  return inst;
}

ValidationReport check_allocation(const Topology& topo,
                                  const std::vector<Demand>& demands,
                                  const ResourcePlan& plan,
                                  const Allocation& alloc) {
  ValidationReport report;
  auto add = [&](const std::string& family, const std::string& message) {
    report.violations.push_back({family, message});
  };

  std::vector<Demand> merged;
  try {
    merged = merge_demands(topo, demands);
  } catch (const std::exception& e) {
    add("SCHEMA", std::string("demand list invalid: ") + e.what());
    return report;
  }
  if (alloc.grants.size() != merged.size()) {
    add("SCHEMA", "allocation has " + std::to_string(alloc.grants.size()) +
                      " grant groups for " + std::to_string(merged.size()) +
                      " demand pairs");
    return report;
  }

  const int W = plan.num_wavelengths, T = plan.num_slots;

  // occupancy tables rebuilt from scratch, independent of the encoder
  std::map<std::tuple<int, int, int>, std::vector<int>> by_dest, by_source;
  std::map<std::tuple<std::size_t, int, int>, int> link_block;  // (link, j, t) -> count
  std::map<std::size_t, int> link_total;

  for (std::size_t pr = 0; pr < merged.size(); ++pr) {
    const Demand& d = merged[pr];
    const std::string tag = pair_tag(topo, d);
    const auto& paths = topo.candidate_paths(d.source, d.dest);
    const int b = blocks_required(d.volume_gbps, plan.block_capacity_gbps);

    std::set<int> wavelengths_used;
    std::set<std::pair<int, int>> blocks_seen;
    int valid_grants = 0;

    for (const auto& g : alloc.grants[pr]) {
      if (g.wavelength < 0 || g.wavelength >= W || g.slot < 0 || g.slot >= T) {
        add("SCHEMA", tag + ": grant block (" + std::to_string(g.wavelength) + "," +
                          std::to_string(g.slot) + ") outside the plan grid");
        continue;
      }
      if (!blocks_seen.insert({g.wavelength, g.slot}).second) {
        add("SCHEMA", tag + ": duplicate grant of block (" +
                          std::to_string(g.wavelength) + "," + std::to_string(g.slot) + ")");
        continue;
      }
      wavelengths_used.insert(g.wavelength);
      ++valid_grants;
      by_dest[{topo.rack_index(d.dest), g.wavelength, g.slot}].push_back(
          static_cast<int>(pr));
      by_source[{topo.rack_index(d.source), g.wavelength, g.slot}].push_back(
          static_cast<int>(pr));

      if (g.path < 0 || g.path >= static_cast<int>(paths.size())) {
        add("F1", tag + ": granted block (" + std::to_string(g.wavelength) + "," +
                      std::to_string(g.slot) + ") has no valid route");
        continue;
      }
      const Path& path = paths[g.path];

      // contiguity, endpoints and loop freedom, walked directly
      NodeId at = d.source;
      std::set<std::uint32_t> seen_nodes{at.value};
      bool broken = false;
      for (std::size_t li : path.links) {
        const Link& l = topo.links()[li];
        if (l.from.node != at) broken = true;
        at = l.to.node;
        if (!seen_nodes.insert(at.value).second) broken = true;
      }
      if (broken || at != d.dest)
        add("F1", tag + ": route " + std::to_string(g.path) +
                      " is not a contiguous loop-free path from source to destination");

      for (const auto& hop : path.awgr_hops) {
        if (!wavelength_compatible(hop.forced_wavelength, g.wavelength, W))
          add("AWGR", tag + ": block (" + std::to_string(g.wavelength) + "," +
                          std::to_string(g.slot) + ") uses wavelength " +
                          std::to_string(g.wavelength) + " but " +
                          topo.node(hop.node).id + " pins " +
                          std::to_string(hop.forced_wavelength) +
                          " between ports " + std::to_string(hop.in_port) + "," +
                          std::to_string(hop.out_port));
      }
      for (std::size_t li : path.links) {
        if (!topo.links()[li].carries(g.wavelength))
          add("F2", tag + ": link " + topo.describe_link(li) +
                        " does not carry wavelength " + std::to_string(g.wavelength));
        ++link_block[{li, g.wavelength, g.slot}];
        ++link_total[li];
      }
    }

    if (wavelengths_used.size() > 1)
      add("F4", tag + ": blocks granted on " + std::to_string(wavelengths_used.size()) +
                    " wavelengths; a pair must stay on one");
    if (valid_grants < b)
      add("F3", tag + ": " + std::to_string(valid_grants) + " blocks granted, " +
                    std::to_string(b) + " required");
  }

  for (const auto& [key, prs] : by_dest) {
    if (prs.size() > 1)
      add("F5", "destination " + topo.node(topo.racks()[std::get<0>(key)]).id +
                    " receives block (" + std::to_string(std::get<1>(key)) + "," +
                    std::to_string(std::get<2>(key)) + ") from " +
                    std::to_string(prs.size()) + " sources");
  }
  for (const auto& [key, prs] : by_source) {
    if (prs.size() > 1)
      add("F6", "source " + topo.node(topo.racks()[std::get<0>(key)]).id +
                    " sends block (" + std::to_string(std::get<1>(key)) + "," +
                    std::to_string(std::get<2>(key)) + ") to " +
                    std::to_string(prs.size()) + " destinations");
  }
  for (const auto& [key, count] : link_block) {
    if (count > 1)
      add("F2", "link " + topo.describe_link(std::get<0>(key)) + " carries block (" +
                    std::to_string(std::get<1>(key)) + "," +
                    std::to_string(std::get<2>(key)) + ") " + std::to_string(count) +
                    " times");
  }
  for (const auto& [li, count] : link_total) {
    int cap = static_cast<int>(std::floor(topo.links()[li].total_capacity_gbps() /
                                              plan.block_capacity_gbps +
                                          1e-9));
    if (count > cap)
      add("F2", "link " + topo.describe_link(li) + " carries " + std::to_string(count) +
                    " blocks, capacity admits " + std::to_string(cap));
  }

  return report;
}

}  // namespace ponplan
