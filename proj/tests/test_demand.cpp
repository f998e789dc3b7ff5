#include <stdexcept>
#include <map>

#include "doctest.h"
#include "ponplan/demand.hpp"
#include "ponplan/rng.hpp"

using namespace ponplan;

namespace {
Topology& cell() {
  static Topology topo = build_cell4();
  return topo;
}
}  // namespace

TEST_CASE("generate_demands basics") {
  Scenario sc;
  sc.seed = 7;
  sc.demand_count = 0;
  CHECK(generate_demands(cell(), sc).empty());

  sc.demand_count = 1000;
  sc.seed = 1;
  auto demands = generate_demands(cell(), sc);
  REQUIRE(demands.size() == 1000);
  for (const auto& d : demands) {
    CHECK(d.source != d.dest);
    CHECK(cell().rack_index(d.source) >= 0);
    CHECK(cell().rack_index(d.dest) >= 0);
    bool on_grid = d.volume_gbps == 1 || d.volume_gbps == 3 || d.volume_gbps == 5 ||
                   d.volume_gbps == 7 || d.volume_gbps == 9;
    CHECK(on_grid);
  }
}

TEST_CASE("generate_demands is deterministic and prefix-stable") {
  Scenario sc;
  sc.demand_count = 64;
  sc.seed = 99;
  auto a = generate_demands(cell(), sc);
  auto b = generate_demands(cell(), sc);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].source == b[i].source);
    CHECK(a[i].dest == b[i].dest);
    CHECK(a[i].volume_gbps == b[i].volume_gbps);
  }

  Scenario longer = sc;
  longer.demand_count = 128;
  auto c = generate_demands(cell(), longer);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].source == c[i].source);
    CHECK(a[i].dest == c[i].dest);
    CHECK(a[i].volume_gbps == c[i].volume_gbps);
  }
}

TEST_CASE("subset scenario leaves idle racks untouched") {
  Scenario sc;
  sc.kind = ScenarioKind::SubsetActive;
  sc.active_racks = {*cell().find_node("R1"), *cell().find_node("R2")};
  sc.demand_count = 50;
  sc.seed = 3;
  auto demands = generate_demands(cell(), sc);
  NodeId r3 = *cell().find_node("R3");
  NodeId r4 = *cell().find_node("R4");
  for (const auto& d : demands) {
    CHECK(d.source != r3);
    CHECK(d.source != r4);
    CHECK(d.dest != r3);
    CHECK(d.dest != r4);
  }
}

TEST_CASE("scenario validation") {
  Scenario sc;
  sc.kind = ScenarioKind::SubsetActive;
  sc.active_racks = {*cell().find_node("R1")};
  sc.demand_count = 5;
  CHECK_THROWS_AS(generate_demands(cell(), sc), std::invalid_argument);

  Scenario bad_grid;
  bad_grid.volume_grid = {3, 1};
  CHECK_THROWS_AS(generate_demands(cell(), bad_grid), std::invalid_argument);

  Scenario empty_grid;
  empty_grid.volume_grid = {};
  CHECK_THROWS_AS(generate_demands(cell(), empty_grid), std::invalid_argument);
}

TEST_CASE("volume draws stay close to uniform") {
  Scenario sc;
  sc.demand_count = 10000;
  sc.seed = 42;
  auto demands = generate_demands(cell(), sc);
  std::map<double, int> freq;
  for (const auto& d : demands) ++freq[d.volume_gbps];
  REQUIRE(freq.size() == 5);
  for (const auto& [volume, count] : freq) {
    double f = count / 10000.0;
    CHECK(f > 0.17);
    CHECK(f < 0.23);
  }
}

TEST_CASE("merge_demands sums duplicates into canonical order") {
  NodeId r1 = *cell().find_node("R1");
  NodeId r2 = *cell().find_node("R2");
  NodeId r3 = *cell().find_node("R3");
  std::vector<Demand> demands{
      {r3, r1, 5.0}, {r1, r2, 1.0}, {r1, r2, 3.0}, {r3, r1, 2.0}};
  auto merged = merge_demands(cell(), demands);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].source == r1);
  CHECK(merged[0].dest == r2);
  CHECK(merged[0].volume_gbps == doctest::Approx(4.0));
  CHECK(merged[1].source == r3);
  CHECK(merged[1].dest == r1);
  CHECK(merged[1].volume_gbps == doctest::Approx(7.0));

  CHECK_THROWS_AS(merge_demands(cell(), {{r1, r1, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(merge_demands(cell(), {{r1, r2, 0.0}}), std::invalid_argument);
}

TEST_CASE("blocks_required ceiling") {
  CHECK(blocks_required(1, 2.5) == 1);
  CHECK(blocks_required(9, 2.5) == 4);
  CHECK(blocks_required(5, 10) == 1);
  CHECK(blocks_required(10, 2.5) == 4);
  CHECK(blocks_required(0, 2.5) == 0);
  CHECK(blocks_required(2.5, 2.5) == 1);
  CHECK_THROWS_AS(blocks_required(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(blocks_required(-1, 2.5), std::invalid_argument);
}

TEST_CASE("blocks_required is the minimal covering count") {
  SplitMix64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    double volume = (rng.next_below(400) + 1) * 0.25;
    double capacity = (rng.next_below(40) + 1) * 0.25;
    int b = blocks_required(volume, capacity);
    CHECK(b * capacity >= volume - 1e-9);
    if (b > 0) CHECK((b - 1) * capacity < volume);
  }
}

TEST_CASE("all_pair_demands covers every ordered pair once") {
  auto demands = all_pair_demands(cell(), cell().racks(), 9.0);
  CHECK(demands.size() == 12);
  auto merged = merge_demands(cell(), demands);
  CHECK(merged.size() == 12);
  for (const auto& d : merged) CHECK(d.volume_gbps == doctest::Approx(9.0));
}
