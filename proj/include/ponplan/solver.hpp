#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ponplan/model.hpp"

namespace ponplan {

struct SolveLimits {
  std::optional<double> time_budget_s;
  std::optional<std::uint64_t> node_budget;
};

enum class SolveStatus { Optimal, FeasibleBoundGap, Infeasible, BudgetExhausted };

std::string to_string(SolveStatus s);

struct SolveStats {
  std::uint64_t nodes = 0;  // option placements attempted
  double elapsed_s = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  long long objective = -1;   // granted block count, -1 when no incumbent
  long long lower_bound = 0;
  std::optional<Allocation> allocation;
  SolveStats stats;
  std::string certificate;  // binding argument for Infeasible results
};

// Counting bound: sum over pairs of blocks_required(volume, block rate).
// Never exceeds the optimum.
long long lower_bound(const IlpInstance& inst);

// Exact depth-first search over per-pair (wavelength, slot set, route
// vector) choices in canonical tie-break order, with occupancy propagation
// for F2/F5/F6. Any optimum grants exactly blocks_required blocks per pair
// (dropping surplus grants keeps every constraint satisfied), so the first
// complete assignment found is the lexicographically least optimum and its
// objective equals the counting bound. Infeasibility is proven either by a
// structural certificate (pair over the per-wavelength slot budget, no
// compatible route, endpoint slot budget exceeded) or by exhausting the
// tree. Deterministic, including node counts.
SolveResult solve_exact(const IlpInstance& inst, const SolveLimits& limits = {});

// Oracle: odometer enumeration of every per-pair grant combination, each
// candidate filtered through check_allocation only, minimum taken under the
// same tie-break. Refuses instances with more than `mu_cap` grant variables
// (num_wavelengths * num_slots * pairs).
SolveResult brute_force(const IlpInstance& inst, int mu_cap = 24);

}  // namespace ponplan
