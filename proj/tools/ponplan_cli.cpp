// ponplan: exact resource-block allocation for WDM/TDM PON cells.
//
// Subcommands: solve, sweep, validate, oracle-check.
// Exit codes: 0 optimal/valid, 1 usage or config error, 2 infeasible or
// invalid allocation, 3 budget exhausted.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ponplan/experiments.hpp"
#include "ponplan/json_io.hpp"
#include "ponplan/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitBudget = 3;

std::string fmt_gbps(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string plan_filter = "both";
  std::string out_path;
  std::optional<double> time_limit_s;
  std::optional<std::uint64_t> node_limit;
  std::optional<int> parallel;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_plan = true) {
  cmd->add_option("--config", opts.config_path, "run configuration document (JSON)")
      ->envname("PONPLAN_CONFIG")
      ->required();
  cmd->add_option("--seed", opts.seed, "override the scenario seed")
      ->envname("PONPLAN_SEED");
  if (with_plan)
    cmd->add_option("--plan", opts.plan_filter, "plan to solve: tdm, wdm or both")
        ->envname("PONPLAN_PLAN")
        ->check(CLI::IsMember({"tdm", "wdm", "both"}));
  cmd->add_option("--out", opts.out_path, "output path")
      ->envname("PONPLAN_OUT");
  cmd->add_option("--time-limit", opts.time_limit_s, "solver wall-clock budget, seconds")
      ->envname("PONPLAN_TIME_LIMIT");
  cmd->add_option("--node-limit", opts.node_limit, "solver search-node budget")
      ->envname("PONPLAN_NODE_LIMIT");
  cmd->add_option("--parallel", opts.parallel, "worker threads for sweeps")
      ->envname("PONPLAN_PARALLEL");
}

ponplan::RunConfig load_config(const CommonOpts& opts) {
  ponplan::RunConfig config = ponplan::load_run_config(opts.config_path);
  if (opts.seed) config.scenario.seed = *opts.seed;
  if (opts.time_limit_s) config.limits.time_budget_s = *opts.time_limit_s;
  if (opts.node_limit) config.limits.node_budget = *opts.node_limit;
  if (opts.parallel) config.parallel = *opts.parallel;
  if (opts.plan_filter != "both") {
    std::vector<ponplan::ResourcePlan> kept;
    for (const auto& plan : config.plans)
      if (plan.name == opts.plan_filter) kept.push_back(plan);
    if (kept.empty())
      throw ponplan::DocumentError("plans",
                                   "no plan named '" + opts.plan_filter + "' in config");
    config.plans = kept;
  }
  return config;
}

void print_allocation_table(const ponplan::Topology& topo,
                            const std::vector<ponplan::Demand>& demands,
                            const ponplan::Allocation& alloc) {
  std::printf("  %-10s %-10s %10s %7s %11s %-7s %s\n", "source", "dest",
              "volume", "blocks", "wavelength", "slots", "routes");
  for (std::size_t pr = 0; pr < demands.size(); ++pr) {
    const auto& d = demands[pr];
    const auto& paths = topo.candidate_paths(d.source, d.dest);
    auto grants = ponplan::sorted_grants(alloc.grants[pr]);
    std::string slots, routes, wavelength;
    for (const auto& g : grants) {
      if (!slots.empty()) slots += ",";
      slots += std::to_string(g.slot);
      if (!routes.empty()) routes += ",";
      routes += (g.path >= 0 && g.path < static_cast<int>(paths.size()))
                    ? ponplan::to_string(paths[g.path].route_class)
                    : "none";
      std::string w = std::to_string(g.wavelength);
      if (wavelength.empty()) wavelength = w;
      else if (wavelength != w) wavelength = "mixed";
    }
    std::printf("  %-10s %-10s %10s %7zu %11s %-7s %s\n",
                topo.node(d.source).id.c_str(), topo.node(d.dest).id.c_str(),
                fmt_gbps(d.volume_gbps).c_str(), grants.size(), wavelength.c_str(),
                slots.c_str(), routes.c_str());
  }
}

int status_exit(ponplan::SolveStatus status) {
  switch (status) {
    case ponplan::SolveStatus::Optimal: return kExitOk;
    case ponplan::SolveStatus::Infeasible: return kExitInfeasible;
    default: return kExitBudget;
  }
}

int cmd_solve(const CommonOpts& opts) {
  ponplan::RunConfig config = load_config(opts);
  std::vector<ponplan::Demand> demands = config.realize_demands();
  std::vector<ponplan::Demand> normalized =
      ponplan::merge_demands(config.topology, demands);

  int exit_code = kExitOk;
  for (const auto& plan : config.plans) {
    ponplan::IlpInstance inst =
        ponplan::build_instance(config.topology, normalized, plan);
    ponplan::SolveResult res = ponplan::solve_exact(inst, config.limits);

    if (res.status == ponplan::SolveStatus::Optimal) {
      double gbps = ponplan::granted_capacity_gbps(*res.allocation, plan);
      std::printf("plan %s: optimal, %lld block%s, %s Gbps (lower bound %lld, nodes %llu)\n",
                  plan.name.c_str(), res.objective, res.objective == 1 ? "" : "s",
                  fmt_gbps(gbps).c_str(), res.lower_bound,
                  static_cast<unsigned long long>(res.stats.nodes));
      print_allocation_table(config.topology, normalized, *res.allocation);

      ponplan::ValidationReport check = ponplan::check_allocation(
          config.topology, normalized, plan, *res.allocation);
      if (!check.ok()) {
        std::fprintf(stderr, "internal error: allocation failed validation\n%s",
                     check.to_string().c_str());
        return kExitUsage;
      }
      if (!opts.out_path.empty()) {
        ponplan::AllocationDoc doc{config.topology.name(), plan, normalized,
                                   *res.allocation};
        std::string path = opts.out_path;
        if (config.plans.size() > 1) {
          auto dot = path.rfind('.');
          std::string suffix = "." + plan.name;
          if (dot == std::string::npos) path += suffix;
          else path.insert(dot, suffix);
        }
        ponplan::write_text_file(path,
                                 ponplan::allocation_to_json(config.topology, doc));
        std::printf("  wrote %s\n", path.c_str());
      }
    } else {
      std::printf("plan %s: %s", plan.name.c_str(),
                  ponplan::to_string(res.status).c_str());
      if (!res.certificate.empty()) std::printf(" (%s)", res.certificate.c_str());
      std::printf(" [lower bound %lld, nodes %llu]\n", res.lower_bound,
                  static_cast<unsigned long long>(res.stats.nodes));
    }
    exit_code = std::max(exit_code, status_exit(res.status));
  }
  return exit_code;
}

int cmd_sweep(const CommonOpts& opts, bool svg) {
  ponplan::RunConfig config = load_config(opts);
  if (!config.sweep)
    throw ponplan::DocumentError("sweep", "config has no sweep section");
  if (!config.has_scenario && config.sweep->axis == ponplan::SweepAxis::DemandCount)
    throw ponplan::DocumentError("demands",
                                 "a demand_count sweep needs demands.scenario");

  ponplan::SweepSpec spec;
  spec.scenario = config.scenario;
  if (!config.has_scenario) spec.scenario = ponplan::Scenario{};
  spec.plans = config.plans;
  spec.axis = config.sweep->axis;
  spec.values = config.sweep->values;
  spec.replications = config.sweep->replications;
  spec.volume_basis = config.sweep->volume_basis;

  std::vector<ponplan::SweepRow> rows =
      ponplan::run_sweep(config.topology, spec, config.limits, config.parallel);
  std::string csv = ponplan::sweep_to_csv(rows, spec.axis);

  if (opts.out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    ponplan::write_text_file(opts.out_path, csv);
    std::printf("wrote %s (%zu rows)\n", opts.out_path.c_str(), rows.size());
    if (svg) {
      std::string svg_path = opts.out_path;
      auto dot = svg_path.rfind('.');
      if (dot != std::string::npos) svg_path.erase(dot);
      svg_path += ".svg";
      ponplan::write_text_file(svg_path, ponplan::sweep_to_svg(rows, spec.axis));
      std::printf("wrote %s\n", svg_path.c_str());
    }
  }

  bool any_budget = false, any_infeasible = false;
  for (const auto& row : rows) {
    if (row.n_budget_exhausted > 0) any_budget = true;
    if (row.n_infeasible > 0) any_infeasible = true;
  }
  if (any_budget) return kExitBudget;
  if (any_infeasible) return kExitInfeasible;
  return kExitOk;
}

int cmd_validate(const CommonOpts& opts, const std::string& alloc_path) {
  ponplan::RunConfig config = load_config(opts);
  ponplan::AllocationDoc doc = ponplan::allocation_from_json(
      config.topology, ponplan::read_text_file(alloc_path));
  if (doc.topology_name != config.topology.name())
    throw ponplan::DocumentError(
        "topology", "allocation was produced for topology '" + doc.topology_name +
                        "', config has '" + config.topology.name() + "'");

  ponplan::ValidationReport report = ponplan::check_allocation(
      config.topology, doc.demands, doc.plan, doc.allocation);
  if (report.ok()) {
    std::printf("allocation valid: %lld blocks, %s Gbps\n",
                doc.allocation.total_blocks(),
                fmt_gbps(granted_capacity_gbps(doc.allocation, doc.plan)).c_str());
    return kExitOk;
  }
  std::printf("allocation invalid: %zu violation%s\n", report.violations.size(),
              report.violations.size() == 1 ? "" : "s");
  for (const auto& v : report.violations)
    std::printf("  %s: %s\n", v.family.c_str(), v.message.c_str());
  return kExitInfeasible;
}

// Sweeps every small instance (wavelengths x slots grid, up to max_pairs
// demands over all rack-pair subsets and grid volumes) and cross-checks
// solve_exact against the brute-force oracle.
int cmd_oracle_check(int max_pairs, int mu_cap, bool verbose) {
  ponplan::Topology topo = ponplan::build_cell4();
  const std::vector<double> grid = {1, 3, 5, 7, 9};
  const auto& racks = topo.racks();

  std::vector<std::pair<ponplan::NodeId, ponplan::NodeId>> all_pairs;
  for (auto s : racks)
    for (auto d : racks)
      if (s != d) all_pairs.emplace_back(s, d);

  long long instances = 0, disagreements = 0;
  std::vector<int> pair_sel;

  // enumerate pair subsets of size 1..max_pairs
  auto run_instance = [&](const std::vector<ponplan::Demand>& demands) {
    for (int W : {1, 2}) {
      for (int T : {1, 2}) {
        ponplan::ResourcePlan plan{"mini", W, T, 2.5};
        ponplan::IlpInstance inst = ponplan::build_instance(
            topo, ponplan::merge_demands(topo, demands), plan);
        ponplan::SolveResult exact = ponplan::solve_exact(inst);
        ponplan::SolveResult oracle = ponplan::brute_force(inst, mu_cap);
        ++instances;
        bool same = exact.status == oracle.status &&
                    exact.objective == oracle.objective &&
                    exact.allocation.has_value() == oracle.allocation.has_value();
        if (same && exact.allocation) {
          same = !ponplan::allocation_key_less(*exact.allocation, *oracle.allocation) &&
                 !ponplan::allocation_key_less(*oracle.allocation, *exact.allocation);
        }
        if (!same) {
          ++disagreements;
          if (verbose)
            std::fprintf(stderr,
                         "disagreement: W=%d T=%d pairs=%zu exact=%s/%lld oracle=%s/%lld\n",
                         W, T, demands.size(),
                         ponplan::to_string(exact.status).c_str(), exact.objective,
                         ponplan::to_string(oracle.status).c_str(), oracle.objective);
        }
      }
    }
  };

  std::vector<ponplan::Demand> demands;
  auto volumes_rec = [&](auto&& self, std::size_t i) -> void {
    if (i == pair_sel.size()) {
      run_instance(demands);
      return;
    }
    for (double v : grid) {
      demands.push_back({all_pairs[pair_sel[i]].first, all_pairs[pair_sel[i]].second, v});
      self(self, i + 1);
      demands.pop_back();
    }
  };
  auto subsets_rec = [&](auto&& self, int start, int remaining) -> void {
    if (!pair_sel.empty()) volumes_rec(volumes_rec, 0);
    if (remaining == 0) return;
    for (int p = start; p < static_cast<int>(all_pairs.size()); ++p) {
      pair_sel.push_back(p);
      self(self, p + 1, remaining - 1);
      pair_sel.pop_back();
    }
  };
  subsets_rec(subsets_rec, 0, max_pairs);

  std::printf("oracle check: %lld instances, %lld disagreement%s\n", instances,
              disagreements, disagreements == 1 ? "" : "s");
  return disagreements == 0 ? kExitOk : kExitInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact wavelength/time-slot resource-block allocation for PON cells"};
  app.require_subcommand(1);

  CommonOpts solve_opts, sweep_opts, validate_opts;
  bool svg = false;
  std::string alloc_path;
  int max_pairs = 3, mu_cap = 24;
  bool oracle_verbose = false;

  CLI::App* solve = app.add_subcommand("solve", "solve one allocation instance");
  add_common(solve, solve_opts);

  CLI::App* sweep = app.add_subcommand("sweep", "run a sweep and emit CSV");
  add_common(sweep, sweep_opts);
  sweep->add_flag("--svg", svg, "also write an SVG chart next to the CSV");

  CLI::App* validate = app.add_subcommand("validate", "validate an allocation document");
  add_common(validate, validate_opts, /*with_plan=*/false);
  validate->add_option("--alloc", alloc_path, "allocation document to validate")
      ->required();

  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "cross-check the solver against the brute-force oracle");
  oracle->add_option("--max-pairs", max_pairs, "largest demand-pair subset (default 3)");
  oracle->add_option("--cap", mu_cap, "grant-variable cap for the oracle (default 24)");
  oracle->add_flag("--verbose", oracle_verbose, "print each disagreement");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, svg);
    if (validate->parsed()) return cmd_validate(validate_opts, alloc_path);
    if (oracle->parsed()) return cmd_oracle_check(max_pairs, mu_cap, oracle_verbose);
  } catch (const ponplan::DocumentError& e) {
    std::fprintf(stderr, "config error at %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
