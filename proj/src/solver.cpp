#include "ponplan/solver.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <stdexcept>

namespace ponplan {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::FeasibleBoundGap: return "feasible_bound_gap";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::BudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

long long lower_bound(const IlpInstance& inst) { return inst.required_total(); }

namespace {

// Lexicographically next b-combination of {0..n-1}; combo starts ascending.
bool next_combination(std::vector<int>& combo, int n) {
  int b = static_cast<int>(combo.size());
  for (int i = b - 1; i >= 0; --i) {
    if (combo[i] < n - (b - i)) {
      ++combo[i];
      for (int k = i + 1; k < b; ++k) combo[k] = combo[k - 1] + 1;
      return true;
    }
  }
  return false;
}

// One candidate grant set for a pair: wavelength, ascending slots, and the
// route chosen for each slot. Listed in canonical tie-break order.
struct PairOption {
  int wavelength = 0;
  std::vector<int> slots;
  std::vector<int> paths;
};

constexpr std::size_t kMaxOptionsPerPair = 1u << 20;

std::vector<PairOption> enumerate_pair_options(
    int blocks, int num_wavelengths, int num_slots,
    const std::vector<std::vector<int>>& paths_for_wavelength) {
  std::vector<PairOption> options;
  if (blocks > num_slots) return options;  // single-wavelength cap
  for (int j = 0; j < num_wavelengths; ++j) {
    const auto& routes = paths_for_wavelength[j];
    if (routes.empty()) continue;
    std::vector<int> combo(blocks);
    for (int k = 0; k < blocks; ++k) combo[k] = k;
    do {
      // odometer over route choices, earlier slot most significant
      std::vector<int> pick(blocks, 0);
      while (true) {
        PairOption opt;
        opt.wavelength = j;
        opt.slots = combo;
        opt.paths.reserve(blocks);
        for (int k = 0; k < blocks; ++k) opt.paths.push_back(routes[pick[k]]);
        options.push_back(std::move(opt));
        if (options.size() > kMaxOptionsPerPair)
          throw std::invalid_argument(
              "instance too large for the exact solver (per-pair option cap)");
        int k = blocks - 1;
        while (k >= 0 && pick[k] + 1 == static_cast<int>(routes.size())) {
          pick[k] = 0;
          --k;
        }
        if (k < 0) break;
        ++pick[k];
      }
    } while (next_combination(combo, num_slots));
  }
  return options;
}

struct SearchState {
  const IlpInstance* inst = nullptr;
  const Topology* topo = nullptr;
  int W = 0, T = 0;
  std::vector<std::vector<PairOption>> options;  // per pair
  std::vector<std::uint64_t> src_occ, dst_occ;   // per rack, bit j*T+t
  std::vector<std::uint64_t> link_occ;           // per link
  std::vector<int> link_cnt;
  std::vector<int> link_cap;
  std::vector<int> chosen;  // option index per pair, -1 when unassigned
  std::uint64_t nodes = 0;
  std::optional<std::uint64_t> node_budget;
  std::optional<double> time_budget_s;
  std::chrono::steady_clock::time_point start;
  bool out_of_budget = false;

  bool budget_ok() {
    if (node_budget && nodes > *node_budget) {
      out_of_budget = true;
      return false;
    }
    if (time_budget_s && (nodes & 1023u) == 0) {
      double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
      if (elapsed > *time_budget_s) {
        out_of_budget = true;
        return false;
      }
    }
    return true;
  }
};

bool try_apply(SearchState& st, int pair, const PairOption& opt, bool apply) {
  const Demand& d = st.inst->demands()[pair];
  int si = st.topo->rack_index(d.source);
  int di = st.topo->rack_index(d.dest);
  std::uint64_t bits = 0;
  for (int slot : opt.slots) bits |= 1ULL << (opt.wavelength * st.T + slot);
  if (st.src_occ[si] & bits) return false;
  if (st.dst_occ[di] & bits) return false;

  const auto& paths = st.inst->pair_paths(pair);
  // per-link checks applied incrementally so two blocks of this option on a
  // shared link are handled exactly once each
  std::vector<std::pair<std::size_t, std::uint64_t>> applied;
  bool ok = true;
  for (std::size_t k = 0; k < opt.slots.size() && ok; ++k) {
    std::uint64_t bit = 1ULL << (opt.wavelength * st.T + opt.slots[k]);
    for (std::size_t li : paths[opt.paths[k]].links) {
      if ((st.link_occ[li] & bit) || st.link_cnt[li] + 1 > st.link_cap[li]) {
        ok = false;
        break;
      }
      st.link_occ[li] |= bit;
      st.link_cnt[li] += 1;
      applied.emplace_back(li, bit);
    }
  }
  if (!ok || !apply) {
    for (auto it = applied.rbegin(); it != applied.rend(); ++it) {
      st.link_occ[it->first] &= ~it->second;
      st.link_cnt[it->first] -= 1;
    }
    return ok;
  }
  st.src_occ[si] |= bits;
  st.dst_occ[di] |= bits;
  return true;
}

void unapply(SearchState& st, int pair, const PairOption& opt) {
  const Demand& d = st.inst->demands()[pair];
  int si = st.topo->rack_index(d.source);
  int di = st.topo->rack_index(d.dest);
  std::uint64_t bits = 0;
  for (int slot : opt.slots) bits |= 1ULL << (opt.wavelength * st.T + slot);
  st.src_occ[si] &= ~bits;
  st.dst_occ[di] &= ~bits;
  const auto& paths = st.inst->pair_paths(pair);
  for (std::size_t k = 0; k < opt.slots.size(); ++k) {
    std::uint64_t bit = 1ULL << (opt.wavelength * st.T + opt.slots[k]);
    for (std::size_t li : paths[opt.paths[k]].links) {
      st.link_occ[li] &= ~bit;
      st.link_cnt[li] -= 1;
    }
  }
}

// Depth-first search in canonical option order. Returns true when a full
// assignment was reached; the first one found is the tie-break minimum.
bool dfs(SearchState& st, int pair) {
  if (pair == static_cast<int>(st.options.size())) return true;
  for (std::size_t oi = 0; oi < st.options[pair].size(); ++oi) {
    ++st.nodes;
    if (!st.budget_ok()) return false;
    const PairOption& opt = st.options[pair][oi];
    if (!try_apply(st, pair, opt, true)) continue;
    st.chosen[pair] = static_cast<int>(oi);
    if (dfs(st, pair + 1)) return true;
    st.chosen[pair] = -1;
    unapply(st, pair, opt);
    if (st.out_of_budget) return false;
  }
  return false;
}

Allocation allocation_from_choices(const SearchState& st) {
  Allocation alloc;
  alloc.grants.resize(st.options.size());
  for (std::size_t pr = 0; pr < st.options.size(); ++pr) {
    const PairOption& opt = st.options[pr][st.chosen[pr]];
    for (std::size_t k = 0; k < opt.slots.size(); ++k)
      alloc.grants[pr].push_back({opt.wavelength, opt.slots[k], opt.paths[k]});
  }
  return alloc;
}

}  // namespace

SolveResult solve_exact(const IlpInstance& inst, const SolveLimits& limits) {
  if (limits.time_budget_s && *limits.time_budget_s <= 0)
    throw std::invalid_argument("time budget must be positive");
  if (limits.node_budget && *limits.node_budget == 0)
    throw std::invalid_argument("node budget must be positive");

  const ResourcePlan& plan = inst.plan();
  const Topology& topo = inst.topology();
  const int W = plan.num_wavelengths, T = plan.num_slots;
  if (W * T > 64)
    throw std::invalid_argument("plan grid exceeds the 64-block solver limit");

  auto start = std::chrono::steady_clock::now();
  auto finish = [&](SolveResult r) {
    r.stats.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return r;
  };

  SolveResult result;
  result.lower_bound = lower_bound(inst);

  const int pairs = static_cast<int>(inst.demands().size());

  // structural infeasibility certificates
  for (int pr = 0; pr < pairs; ++pr) {
    const Demand& d = inst.demands()[pr];
    int b = inst.required_blocks()[pr];
    std::string tag = topo.node(d.source).id + "->" + topo.node(d.dest).id;
    if (b > T) {
      std::ostringstream os;
      os << "pair " << tag << " needs " << b
         << " blocks but a single wavelength offers " << T << " slots ("
         << T * plan.block_capacity_gbps << " Gbps cap per pair)";
      result.status = SolveStatus::Infeasible;
      result.certificate = os.str();
      return finish(result);
    }
    bool any_route = false;
    for (int j = 0; j < W; ++j)
      if (!inst.compatible_paths(pr, j).empty()) any_route = true;
    if (!any_route) {
      result.status = SolveStatus::Infeasible;
      result.certificate =
          "pair " + tag + " has no wavelength-compatible candidate route";
      return finish(result);
    }
  }
  // endpoint slot budget (pigeonhole over F5/F6)
  {
    const int R = static_cast<int>(topo.racks().size());
    std::vector<long long> from(R, 0), into(R, 0);
    for (int pr = 0; pr < pairs; ++pr) {
      from[topo.rack_index(inst.demands()[pr].source)] += inst.required_blocks()[pr];
      into[topo.rack_index(inst.demands()[pr].dest)] += inst.required_blocks()[pr];
    }
    for (int r = 0; r < R; ++r) {
      if (from[r] > static_cast<long long>(W) * T || into[r] > static_cast<long long>(W) * T) {
        result.status = SolveStatus::Infeasible;
        result.certificate = "rack " + topo.node(topo.racks()[r]).id + " would need " +
                             std::to_string(std::max(from[r], into[r])) +
                             " blocks; the grid has " + std::to_string(W * T);
        return finish(result);
      }
    }
  }

  SearchState st;
  st.inst = &inst;
  st.topo = &topo;
  st.W = W;
  st.T = T;
  st.node_budget = limits.node_budget;
  st.time_budget_s = limits.time_budget_s;
  st.start = start;
  st.options.resize(pairs);
  for (int pr = 0; pr < pairs; ++pr) {
    std::vector<std::vector<int>> per_wavelength(W);
    for (int j = 0; j < W; ++j) per_wavelength[j] = inst.compatible_paths(pr, j);
    st.options[pr] = enumerate_pair_options(inst.required_blocks()[pr], W, T,
                                            per_wavelength);
    if (st.options[pr].empty()) {
      const Demand& d = inst.demands()[pr];
      result.status = SolveStatus::Infeasible;
      result.certificate = "pair " + topo.node(d.source).id + "->" +
                           topo.node(d.dest).id + " has no grantable block set";
      return finish(result);
    }
  }
  st.src_occ.assign(topo.racks().size(), 0);
  st.dst_occ.assign(topo.racks().size(), 0);
  st.link_occ.assign(topo.links().size(), 0);
  st.link_cnt.assign(topo.links().size(), 0);
  st.link_cap.resize(topo.links().size());
  for (std::size_t li = 0; li < topo.links().size(); ++li)
    st.link_cap[li] = static_cast<int>(topo.links()[li].total_capacity_gbps() /
                                           plan.block_capacity_gbps +
                                       1e-9);
  st.chosen.assign(pairs, -1);

  bool found = dfs(st, 0);
  result.stats.nodes = st.nodes;
  if (found) {
    result.status = SolveStatus::Optimal;
    result.allocation = allocation_from_choices(st);
    result.objective = result.allocation->total_blocks();
    return finish(result);
  }
  if (st.out_of_budget) {
    result.status = SolveStatus::BudgetExhausted;
    result.certificate = "search budget exhausted before a proof";
    return finish(result);
  }
  result.status = SolveStatus::Infeasible;
  result.certificate = "search space exhausted without a feasible assignment";
  return finish(result);
}

SolveResult brute_force(const IlpInstance& inst, int mu_cap) {
  if (inst.mu_count() > mu_cap) {
    std::ostringstream os;
    os << "brute_force: " << inst.mu_count() << " grant variables exceed the cap of "
       << mu_cap;
    throw std::invalid_argument(os.str());
  }
  const ResourcePlan& plan = inst.plan();
  const Topology& topo = inst.topology();
  const int W = plan.num_wavelengths, T = plan.num_slots;
  const int pairs = static_cast<int>(inst.demands().size());

  auto start = std::chrono::steady_clock::now();
  SolveResult result;
  result.lower_bound = lower_bound(inst);

  // Per-pair grant combinations, derived straight from the plan and the
  // candidate paths. Any optimum grants exactly blocks_required blocks per
  // pair on one wavelength, so this enumeration covers every candidate.
  std::vector<std::vector<PairOption>> options(pairs);
  for (int pr = 0; pr < pairs; ++pr) {
    const auto& paths = inst.pair_paths(pr);
    std::vector<std::vector<int>> per_wavelength(W);
    for (int p = 0; p < static_cast<int>(paths.size()); ++p)
      for (int j : path_wavelengths(topo, paths[p], W)) per_wavelength[j].push_back(p);
    options[pr] = enumerate_pair_options(inst.required_blocks()[pr], W, T,
                                         per_wavelength);
  }

  std::optional<Allocation> best;
  std::vector<int> pick(pairs, 0);
  bool exhausted = false;
  for (int pr = 0; pr < pairs; ++pr)
    if (options[pr].empty()) exhausted = true;

  while (!exhausted) {
    Allocation candidate;
    candidate.grants.resize(pairs);
    for (int pr = 0; pr < pairs; ++pr) {
      const PairOption& opt = options[pr][pick[pr]];
      for (std::size_t k = 0; k < opt.slots.size(); ++k)
        candidate.grants[pr].push_back({opt.wavelength, opt.slots[k], opt.paths[k]});
    }
    ++result.stats.nodes;
    if (check_allocation(topo, inst.demands(), plan, candidate).ok()) {
      if (!best || allocation_key_less(candidate, *best)) best = candidate;
    }
    int pr = pairs - 1;
    while (pr >= 0 && pick[pr] + 1 == static_cast<int>(options[pr].size())) {
      pick[pr] = 0;
      --pr;
    }
    if (pr < 0) exhausted = true;
    else ++pick[pr];
  }

  if (best) {
    result.status = SolveStatus::Optimal;
    result.allocation = *best;
    result.objective = best->total_blocks();
  } else {
    result.status = SolveStatus::Infeasible;
    result.certificate = "exhaustive enumeration found no feasible assignment";
  }
  result.stats.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace ponplan
