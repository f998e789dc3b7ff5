#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ponplan/demand.hpp"
#include "ponplan/model.hpp"
#include "ponplan/solver.hpp"

namespace ponplan {

enum class SweepAxis { VolumePerDemand, DemandCount };
enum class VolumeBasis { PerDemand, Aggregate };

std::string to_string(SweepAxis axis);

/// One sweep: solve every (axis value, plan, replication) cell and
/// aggregate per (axis value, plan).
///
/// VolumePerDemand uses the fixed pair set (every ordered pair of the
/// scenario's racks) with the axis value as each demand's volume
/// (PerDemand) or the axis value split evenly across the pairs (Aggregate).
/// DemandCount draws `axis value` random demands per replication from the
/// scenario's volume grid; replication r uses seed scenario.seed + r, and
/// the draws are prefix-stable, so the count-k demand set of a seed is a
/// prefix of its count-(k+1) set.
struct SweepSpec {
  Scenario scenario;
  std::vector<ResourcePlan> plans;
  SweepAxis axis = SweepAxis::VolumePerDemand;
  std::vector<double> values;
  int replications = 10;
  VolumeBasis volume_basis = VolumeBasis::PerDemand;
};

struct SweepRow {
  double axis_value = 0.0;
  std::string plan;
  int replications = 0;
  int n_optimal = 0;
  int n_infeasible = 0;
  int n_budget_exhausted = 0;
  // Over Optimal replications; empty when none solved.
  std::optional<double> mean_blocks, min_blocks, max_blocks;
  std::optional<double> mean_gbps, min_gbps, max_gbps;
  double mean_nodes = 0.0;
  // vs. the plan named "wdm" at the same axis value; present only when both
  // plans solved every replication to Optimal.
  std::optional<double> savings_percent;

  // Per-replication detail (replication order).
  std::vector<SolveStatus> rep_status;
  std::vector<long long> rep_blocks;  // -1 when not Optimal
};

// Runs the sweep; every returned allocation is revalidated through
// check_allocation before aggregation. Rows come out in (axis value, plan)
// order regardless of execution interleaving; `parallel` > 1 distributes
// (axis value, plan, replication) cells across threads without changing
// any reported value. Throws on an invalid spec (empty or non-increasing
// axis, replications < 1, no plans).
std::vector<SweepRow> run_sweep(const Topology& topo, const SweepSpec& spec,
                                const SolveLimits& limits = {},
                                int parallel = 1);

// 100 * (wdm - tdm) / wdm; relative saving of the TDM grant vs the WDM
// grant in Gbps. Throws on a non-positive wdm value.
double savings_percent(double tdm_gbps, double wdm_gbps);

// Canonical CSV serialization (documented header, '\n' line ends, byte
// stable for fixed inputs).
std::string sweep_csv_header();
std::string sweep_to_csv(const std::vector<SweepRow>& rows, SweepAxis axis);

// Self-contained SVG line chart: mean granted Gbps vs axis value, one
// polyline per plan.
std::string sweep_to_svg(const std::vector<SweepRow>& rows, SweepAxis axis);

}  // namespace ponplan
