#include "ponplan/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ponplan {

std::string to_string(SweepAxis axis) {
  return axis == SweepAxis::VolumePerDemand ? "volume_per_demand" : "demand_count";
}

double savings_percent(double tdm_gbps, double wdm_gbps) {
  if (wdm_gbps <= 0)
    throw std::invalid_argument("savings_percent: wdm grant must be positive");
  return 100.0 * (wdm_gbps - tdm_gbps) / wdm_gbps;
}

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt_num(*v) : std::string();
}

void check_spec(const SweepSpec& spec) {
  if (spec.values.empty()) throw std::invalid_argument("sweep: empty axis");
  for (std::size_t i = 1; i < spec.values.size(); ++i)
    if (spec.values[i] <= spec.values[i - 1])
      throw std::invalid_argument("sweep: axis values must be strictly increasing");
  if (spec.replications < 1)
    throw std::invalid_argument("sweep: replications must be >= 1");
  if (spec.plans.empty()) throw std::invalid_argument("sweep: no plans");
  for (double v : spec.values) {
    if (spec.axis == SweepAxis::DemandCount) {
      if (v < 0 || v != std::floor(v))
        throw std::invalid_argument("sweep: demand counts must be non-negative integers");
    } else if (v <= 0) {
      throw std::invalid_argument("sweep: volumes must be positive");
    }
  }
}

std::vector<NodeId> scenario_racks(const Topology& topo, const Scenario& sc) {
  if (sc.kind == ScenarioKind::AllNodes) return topo.racks();
  return sc.active_racks;
}

struct CellResult {
  SolveStatus status = SolveStatus::Infeasible;
  long long blocks = -1;
  double gbps = 0.0;
  std::uint64_t nodes = 0;
};

}  // namespace

std::vector<SweepRow> run_sweep(const Topology& topo, const SweepSpec& spec,
                                const SolveLimits& limits, int parallel) {
  check_spec(spec);
  if (parallel < 1) parallel = 1;

  const int values = static_cast<int>(spec.values.size());
  const int plans = static_cast<int>(spec.plans.size());
  const int reps = spec.replications;
  const int cells = values * plans * reps;

  std::vector<CellResult> results(cells);

  auto run_cell = [&](int cell) {
    int vi = cell / (plans * reps);
    int pi = (cell / reps) % plans;
    int rep = cell % reps;
    const double value = spec.values[vi];
    const ResourcePlan& plan = spec.plans[pi];

    std::vector<Demand> demands;
    if (spec.axis == SweepAxis::DemandCount) {
      Scenario sc = spec.scenario;
      sc.demand_count = static_cast<int>(value);
      sc.seed = spec.scenario.seed + static_cast<std::uint64_t>(rep);
      demands = generate_demands(topo, sc);
    } else {
      std::vector<NodeId> racks = scenario_racks(topo, spec.scenario);
      std::vector<Demand> pairs = all_pair_demands(topo, racks, 1.0);
      double volume = spec.volume_basis == VolumeBasis::PerDemand
                          ? value
                          : value / static_cast<double>(pairs.size());
      for (auto& d : pairs) d.volume_gbps = volume;
      demands = std::move(pairs);
    }

    IlpInstance inst = build_instance(topo, merge_demands(topo, demands), plan);
    SolveResult res = solve_exact(inst, limits);
    CellResult out;
    out.status = res.status;
    out.nodes = res.stats.nodes;
    if (res.status == SolveStatus::Optimal) {
      ValidationReport check =
          check_allocation(topo, inst.demands(), plan, *res.allocation);
      if (!check.ok())
        throw std::logic_error("solver returned an invalid allocation:\n" +
                               check.to_string());
      out.blocks = res.objective;
      out.gbps = granted_capacity_gbps(*res.allocation, plan);
    }
    results[cell] = out;
  };

  if (parallel == 1 || cells == 1) {
    for (int c = 0; c < cells; ++c) run_cell(c);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
      while (true) {
        int c = next.fetch_add(1);
        if (c >= cells) return;
        try {
          run_cell(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> threads;
    int n = std::min(parallel, cells);
    threads.reserve(n);
    for (int i = 0; i < n; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
  }

  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(values) * plans);
  for (int vi = 0; vi < values; ++vi) {
    for (int pi = 0; pi < plans; ++pi) {
      SweepRow row;
      row.axis_value = spec.values[vi];
      row.plan = spec.plans[pi].name;
      row.replications = reps;
      double sum_blocks = 0, sum_gbps = 0, sum_nodes = 0;
      for (int rep = 0; rep < reps; ++rep) {
        const CellResult& cell = results[(vi * plans + pi) * reps + rep];
        row.rep_status.push_back(cell.status);
        row.rep_blocks.push_back(cell.blocks);
        sum_nodes += static_cast<double>(cell.nodes);
        switch (cell.status) {
          case SolveStatus::Optimal: {
            ++row.n_optimal;
            double blocks = static_cast<double>(cell.blocks);
            sum_blocks += blocks;
            sum_gbps += cell.gbps;
            row.min_blocks = row.min_blocks ? std::min(*row.min_blocks, blocks) : blocks;
            row.max_blocks = row.max_blocks ? std::max(*row.max_blocks, blocks) : blocks;
            row.min_gbps = row.min_gbps ? std::min(*row.min_gbps, cell.gbps) : cell.gbps;
            row.max_gbps = row.max_gbps ? std::max(*row.max_gbps, cell.gbps) : cell.gbps;
            break;
          }
          case SolveStatus::Infeasible:
            ++row.n_infeasible;
            break;
          default:
            ++row.n_budget_exhausted;
            break;
        }
      }
      if (row.n_optimal > 0) {
        row.mean_blocks = sum_blocks / row.n_optimal;
        row.mean_gbps = sum_gbps / row.n_optimal;
      }
      row.mean_nodes = sum_nodes / reps;
      rows.push_back(std::move(row));
    }
  }

  // savings vs. the plan named "wdm" at the same axis value, defined only
  // when both plans solved every replication
  for (int vi = 0; vi < values; ++vi) {
    const SweepRow* wdm = nullptr;
    for (int pi = 0; pi < plans; ++pi)
      if (rows[vi * plans + pi].plan == "wdm") wdm = &rows[vi * plans + pi];
    if (!wdm || wdm->n_optimal != reps || !wdm->mean_gbps || *wdm->mean_gbps <= 0)
      continue;
    for (int pi = 0; pi < plans; ++pi) {
      SweepRow& row = rows[vi * plans + pi];
      if (row.plan == "wdm") continue;
      if (row.n_optimal == reps && row.mean_gbps)
        row.savings_percent = savings_percent(*row.mean_gbps, *wdm->mean_gbps);
    }
  }

  return rows;
}

std::string sweep_csv_header() {
  return "axis,axis_value,plan,replications,n_optimal,n_infeasible,"
         "n_budget_exhausted,mean_granted_blocks,min_granted_blocks,"
         "max_granted_blocks,mean_granted_gbps,min_granted_gbps,"
         "max_granted_gbps,mean_nodes,savings_percent_vs_wdm";
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows, SweepAxis axis) {
  std::ostringstream os;
  os << sweep_csv_header() << "\n";
  for (const auto& row : rows) {
    os << to_string(axis) << "," << fmt_num(row.axis_value) << "," << row.plan << ","
       << row.replications << "," << row.n_optimal << "," << row.n_infeasible << ","
       << row.n_budget_exhausted << "," << fmt_opt(row.mean_blocks) << ","
       << fmt_opt(row.min_blocks) << "," << fmt_opt(row.max_blocks) << ","
       << fmt_opt(row.mean_gbps) << "," << fmt_opt(row.min_gbps) << ","
       << fmt_opt(row.max_gbps) << "," << fmt_num(row.mean_nodes) << ","
       << fmt_opt(row.savings_percent) << "\n";
  }
  return os.str();
}

std::string sweep_to_svg(const std::vector<SweepRow>& rows, SweepAxis axis) {
  const int width = 640, height = 420;
  const int left = 70, right = 20, top = 30, bottom = 50;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

  std::vector<std::string> plans;
  double xmin = 0, xmax = 1, ymax = 1;
  bool first = true;
  for (const auto& row : rows) {
    if (std::find(plans.begin(), plans.end(), row.plan) == plans.end())
      plans.push_back(row.plan);
    if (first) {
      xmin = xmax = row.axis_value;
      first = false;
    }
    xmin = std::min(xmin, row.axis_value);
    xmax = std::max(xmax, row.axis_value);
    if (row.mean_gbps) ymax = std::max(ymax, *row.mean_gbps);
  }
  if (xmax <= xmin) xmax = xmin + 1;

  auto sx = [&](double v) {
    return left + (v - xmin) / (xmax - xmin) * (width - left - right);
  };
  auto sy = [&](double v) {
    return height - bottom - v / ymax * (height - top - bottom);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
     << "\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height
     << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << (height - bottom) << "\" x2=\""
     << (width - right) << "\" y2=\"" << (height - bottom)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
     << "\" y2=\"" << (height - bottom) << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (width / 2) << "\" y=\"" << (height - 12)
     << "\" text-anchor=\"middle\" font-size=\"13\">" << to_string(axis)
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << (height / 2)
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
     << (height / 2) << ")\">mean granted Gbps</text>\n";

  // x ticks at the axis values, y ticks at quarters
  for (const auto& row : rows) {
    double x = sx(row.axis_value);
    os << "<line x1=\"" << x << "\" y1=\"" << (height - bottom) << "\" x2=\"" << x
       << "\" y2=\"" << (height - bottom + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << (height - bottom + 18)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_num(row.axis_value)
       << "</text>\n";
  }
  for (int q = 0; q <= 4; ++q) {
    double v = ymax * q / 4.0;
    os << "<line x1=\"" << (left - 5) << "\" y1=\"" << sy(v) << "\" x2=\"" << left
       << "\" y2=\"" << sy(v) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (left - 9) << "\" y=\"" << (sy(v) + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_num(v) << "</text>\n";
  }

  for (std::size_t pi = 0; pi < plans.size(); ++pi) {
    std::ostringstream points;
    for (const auto& row : rows)
      if (row.plan == plans[pi] && row.mean_gbps)
        points << sx(row.axis_value) << "," << sy(*row.mean_gbps) << " ";
    os << "<polyline fill=\"none\" stroke=\"" << colors[pi % 4]
       << "\" stroke-width=\"2\" points=\"" << points.str() << "\"/>\n";
    os << "<text x=\"" << (width - right - 10) << "\" y=\"" << (top + 16 * pi)
       << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << colors[pi % 4]
       << "\">" << plans[pi] << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ponplan
