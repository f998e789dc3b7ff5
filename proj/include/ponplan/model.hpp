#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ponplan/demand.hpp"
#include "ponplan/topology.hpp"

namespace ponplan {

/// Resource grid granted by the allocator: num_wavelengths x num_slots
/// blocks of block_capacity_gbps each. The TDM plan is (4, 4, 2.5); the
/// WDM-only baseline is the same grid with a single slot, (4, 1, 10).
struct ResourcePlan {
  std::string name = "tdm";
  int num_wavelengths = 4;
  int num_slots = 4;
  double block_capacity_gbps = 2.5;

  static ResourcePlan tdm() { return {"tdm", 4, 4, 2.5}; }
  static ResourcePlan wdm() { return {"wdm", 4, 1, 10.0}; }

  int block_count() const { return num_wavelengths * num_slots; }
};

struct BlockId {
  int wavelength = 0;
  int slot = 0;
};

// True when a path that pins `forced` on an AWGR hop can carry grant
// wavelength j under a plan with W wavelengths. The W-wavelength comb
// repeats cyclically across the device's free spectral range, so j covers
// every forced index congruent to it mod W; with W equal to the device size
// this reduces to j == forced.
bool wavelength_compatible(int forced, int j, int num_wavelengths);

// All grant wavelengths j < W the path supports: every AWGR hop congruent,
// every link carrying j.
std::vector<int> path_wavelengths(const Topology& topo, const Path& path,
                                  int num_wavelengths);

/// One granted resource block of a demand pair: wavelength, slot and the
/// candidate-path index (into Topology::candidate_paths for the pair) it is
/// routed on. path < 0 marks a grant with no route, which never validates.
struct BlockGrant {
  int wavelength = 0;
  int slot = 0;
  int path = -1;
};

/// Grants per demand pair, aligned with the normalized (merged, sorted)
/// demand vector the instance was built from. Deliberately permissive:
/// it can represent infeasible or malformed grant sets so that the checker
/// and the validate command have something to report on.
struct Allocation {
  std::vector<std::vector<BlockGrant>> grants;

  long long total_blocks() const;
};

struct ModelViolation {
  std::string family;  // "F1".."F6", "AWGR", "SCHEMA"
  std::string message;
};

struct ValidationReport {
  std::vector<ModelViolation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Sparse linear constraint over the instance variables:
/// lower <= sum(coeff * var) <= upper.
struct LinearConstraint {
  std::string family;
  std::vector<std::pair<int, double>> terms;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  std::string tag;  // offending indices for diagnostics
};

enum class VarKind { Grant, PathChoice, WavelengthSelect };

struct VarInfo {
  VarKind kind = VarKind::Grant;
  int pair = 0;        // normalized demand index
  int wavelength = 0;  // j
  int slot = -1;       // t (Grant/PathChoice)
  int path = -1;       // candidate path index (PathChoice)
  bool fixed_zero = false;
};

/// The integer program for one (topology, demand set, plan) triple.
///
/// Variables: binary grants mu(pair, j, t); path choices p(pair, j, t, path)
/// with one unit of flow per granted block; wavelength selectors
/// delta(pair, j). Constraint families:
///   F1  each granted block routes on exactly one candidate path
///   F2  per directed link: one occupant per (j, t) and total occupancy
///       within capacity / block rate
///   F3  per pair: granted blocks >= blocks_required(volume, block rate)
///   F4  per pair: a single wavelength (delta coupling)
///   F5  per (dest, j, t): at most one source
///   F6  per (source, j, t): at most one destination
/// plus fixed-zero path choices wherever an AWGR hop or a link rules the
/// wavelength out. Instances are immutable once built.
class IlpInstance {
 public:
  const Topology& topology() const { return *topo_; }
  const ResourcePlan& plan() const { return plan_; }
  const std::vector<Demand>& demands() const { return demands_; }

  const std::vector<VarInfo>& variables() const { return vars_; }
  const std::vector<LinearConstraint>& constraints() const {
    return constraints_;
  }

  int mu_count() const { return mu_count_; }
  int var_count() const { return static_cast<int>(vars_.size()); }

  // blocks_required per normalized pair.
  const std::vector<int>& required_blocks() const { return required_; }
  long long required_total() const;

  // Candidate paths of a pair that support wavelength j (indices into
  // candidate_paths for that pair).
  const std::vector<int>& compatible_paths(int pair, int j) const;
  const std::vector<Path>& pair_paths(int pair) const;

  int mu_index(int pair, int j, int t) const;
  int delta_index(int pair, int j) const;
  int path_index(int pair, int j, int t, int path) const;

  // Constraint rows violated by a 0/1 assignment (size var_count()).
  std::vector<int> violated_constraints(
      const std::vector<std::uint8_t>& assignment) const;

  // Structural decoding of an assignment: one grant per set path variable,
  // plus a routeless grant for any set mu without a set path choice.
  Allocation decode(const std::vector<std::uint8_t>& assignment) const;

  // Assignment representing an allocation (mu/path/delta consistent with
  // the grants; multi-wavelength grant sets simply set several deltas).
  // Grants with out-of-range indices cannot be represented and throw.
  std::vector<std::uint8_t> encode(const Allocation& alloc) const;

 private:
  friend IlpInstance build_instance(const Topology&, const std::vector<Demand>&,
                                    const ResourcePlan&);

  const Topology* topo_ = nullptr;
  ResourcePlan plan_;
  std::vector<Demand> demands_;  // normalized
  std::vector<int> required_;
  std::vector<VarInfo> vars_;
  std::vector<LinearConstraint> constraints_;
  int mu_count_ = 0;
  // index tables
  int mu_base_ = 0, delta_base_ = 0;
  std::vector<int> path_var_base_;  // per pair
  std::vector<int> paths_per_pair_;
  std::vector<std::vector<std::vector<int>>> compat_;  // [pair][j] -> paths
};

// Normalizes (merges) nothing: demands must already be normalized via
// merge_demands. Throws on self-demands, unknown or non-rack endpoints,
// non-positive volumes, a pair without candidate paths, or a plan whose
// grid exceeds a rack link's total rate.
IlpInstance build_instance(const Topology& topo,
                           const std::vector<Demand>& normalized_demands,
                           const ResourcePlan& plan);

// Independent re-check of every constraint family against an allocation.
// Violations are data, not errors; demands may be unnormalized (the checker
// merges them the same way build_instance expects).
ValidationReport check_allocation(const Topology& topo,
                                  const std::vector<Demand>& demands,
                                  const ResourcePlan& plan,
                                  const Allocation& alloc);

double granted_capacity_gbps(const Allocation& alloc, const ResourcePlan& plan);

// Canonical order over allocations used to break ties between optima:
// pair by pair (normalized order), compare (wavelength, then slot sequence,
// then per-slot route class/path index). Grants are compared in sorted
// (wavelength, slot) order.
bool allocation_key_less(const Allocation& a, const Allocation& b);
std::vector<BlockGrant> sorted_grants(const std::vector<BlockGrant>& grants);

}  // namespace ponplan
