#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "hte/archive.hpp"
#include "hte/rng.hpp"
#include "support.hpp"

using namespace hte;

namespace {

Elite make(std::vector<double> primary, double fitness, std::optional<Pattern> p = std::nullopt) {
  Elite e;
  e.primary = std::move(primary);
  e.fitness = fitness;
  e.secondary = p;
  e.genotype = {fitness};
  return e;
}

using testing::oracle_bin;

}  // namespace

TEST_CASE("grid cells follow the bounds") {
  GridArchive g({4, 2}, {{0, 4}, {-1, 1}});
  CHECK(g.capacity() == 8);
  CHECK(g.cell_coords(std::vector<double>{0.0, -1.0}) == std::vector<int>{0, 0});
  CHECK(g.cell_coords(std::vector<double>{3.999, 0.999}) == std::vector<int>{3, 1});
  CHECK(g.cell_coords(std::vector<double>{4.0, 1.0}) == std::vector<int>{3, 1});  // upper edge stays inside
  CHECK(g.cell_coords(std::vector<double>{-7.0, 9.0}) == std::vector<int>{0, 1});
  CHECK(g.cell_of(std::vector<double>{2.5, 0.5}, std::nullopt) == 2 * 2 + 1);

  GridArchive p({2}, {{0, 1}}, true);
  CHECK(p.capacity() == 128);
  CHECK(p.cell_of(std::vector<double>{0.7}, Pattern(5)) == 64 + 5);
  CHECK_THROWS_AS(p.cell_of(std::vector<double>{0.7}, std::nullopt), std::invalid_argument);
  CHECK_THROWS_AS(GridArchive({0}, {{0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(GridArchive({2}, {{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(GridArchive({2, 2}, {{0, 1}}), std::invalid_argument);
}

TEST_CASE("grid keeps the strictly fitter elite") {
  GridArchive g({2}, {{0, 1}});
  CHECK(g.insert(make({0.1}, 1.0)));
  CHECK_FALSE(g.insert(make({0.2}, 1.0)));
  CHECK(g.elites()[0].primary[0] == 0.1);
  CHECK(g.insert(make({0.3}, 2.0)));
  CHECK(g.size() == 1);
  CHECK(g.elites()[0].primary[0] == 0.3);
  CHECK(g.insert(make({0.9}, -5.0)));
  CHECK(g.size() == 2);
  CHECK(g.at_cell(1)->fitness == -5.0);
  CHECK(g.at_cell(7) == nullptr);
}

TEST_CASE("grid fitness and coverage never decrease over 1e5 insertions") {
  Rng rng(2024);
  GridArchive g({20, 20}, {{-1, 1}, {-1, 1}}, true);
  std::map<std::size_t, double> best;  // oracle: best fitness per cell
  std::size_t last_size = 0;
  for (int i = 0; i < 100000; ++i) {
    const Elite e = make({rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)}, rng.uniform(-1, 1),
                         Pattern(static_cast<std::uint8_t>(rng.index(64))));
    const std::size_t cell = g.cell_of(e.primary, e.secondary);
    const Elite* before = g.at_cell(cell);
    const double old = before ? before->fitness : -INFINITY;
    const bool accepted = g.insert(e);
    CHECK(accepted == (e.fitness > old));
    const double now = g.at_cell(cell)->fitness;
    REQUIRE(now >= old);
    auto [it, fresh] = best.emplace(cell, e.fitness);
    if (!fresh) it->second = std::max(it->second, e.fitness);
    REQUIRE(g.size() >= last_size);
    last_size = g.size();
  }
  REQUIRE(g.size() == best.size());
  for (const auto& [cell, f] : best) REQUIRE(g.at_cell(cell)->fitness == f);
  for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(g.cell_of(g.elites()[i].primary, g.elites()[i].secondary) == g.cell_of_slot(i));
}

TEST_CASE("distance archive keeps every pair further apart than l") {
  Rng rng(99);
  for (int trial = 0; trial < 6; ++trial) {
    const bool bits = trial % 2 == 1;
    const double l = 0.05 + 0.05 * trial;
    DistArchive a(l, 3, bits);
    for (int i = 0; i < 4000 && a.size() < 500; ++i) {
      std::optional<Pattern> p;
      if (bits) p = Pattern(static_cast<std::uint8_t>(rng.index(64)));
      a.insert(make({rng.uniform(), rng.uniform(), rng.uniform()}, rng.uniform(), p));
    }
    const auto& e = a.elites();
    REQUIRE(e.size() <= 500);
    for (std::size_t i = 0; i < e.size(); ++i)
      for (std::size_t j = i + 1; j < e.size(); ++j) {
        double d2 = 0;
        for (int k = 0; k < 3; ++k) d2 += (e[i].primary[k] - e[j].primary[k]) * (e[i].primary[k] - e[j].primary[k]);
        if (bits) {
          for (int leg = 1; leg <= 6; ++leg) d2 += e[i].secondary->uses_leg(leg) != e[j].secondary->uses_leg(leg);
        }
        REQUIRE(std::sqrt(d2) > l);
      }
  }
}

TEST_CASE("distance archive replacement rules") {
  DistArchive a(0.1, 2, false);
  CHECK(a.insert(make({0.0, 0.0}, 1.0)));
  CHECK(a.insert(make({0.15, 0.0}, 1.0)));
  CHECK_FALSE(a.insert(make({0.05, 0.0}, 9.0)));  // two neighbours within l
  CHECK_FALSE(a.insert(make({-0.05, 0.0}, 0.5)));  // one neighbour, not fitter
  CHECK(a.insert(make({-0.05, 0.0}, 2.0)));
  CHECK(a.size() == 2);
  CHECK(a.elites()[0].primary[0] == -0.05);
  CHECK(a.insert(make({0.5, 0.5}, 0.0)));
  CHECK(a.size() == 3);

  DistArchive b(0.5, 1, true);
  CHECK(b.insert(make({0.0}, 0.0, Pattern(0))));
  // Same primary, one differing bit puts the pair a full unit apart.
  CHECK(b.insert(make({0.0}, 0.0, Pattern(1))));
  CHECK(b.distance(b.elites()[0], b.elites()[1]) == 1.0);
  CHECK_THROWS_AS(b.insert(make({0.0}, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(b.insert(make({0.0, 1.0}, 0.0, Pattern(0))), std::invalid_argument);
  CHECK_THROWS_AS(DistArchive(0.0, 1, false), std::invalid_argument);
}

TEST_CASE("k-d index agrees with the linear scan, ties included") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Elite> elites;
    const int n = 1 + static_cast<int>(rng.index(300));
    for (int i = 0; i < n; ++i) {
      // A coarse lattice produces many exact distance ties.
      std::vector<double> p{std::round(rng.uniform(0, 8)) / 8, std::round(rng.uniform(0, 8)) / 8,
                            std::round(rng.uniform(0, 8)) / 8};
      elites.push_back(make(p, std::round(rng.uniform(0, 3)), Pattern(static_cast<std::uint8_t>(rng.index(4)))));
    }
    const PrimaryIndex idx(elites);
    const PrimaryIndex only(elites, Pattern(2));
    for (int q = 0; q < 200; ++q) {
      const std::vector<double> x{std::round(rng.uniform(0, 16)) / 16, std::round(rng.uniform(0, 16)) / 16,
                                  std::round(rng.uniform(0, 16)) / 16};
      const std::size_t lin = nearest_primary(elites, x);
      REQUIRE(idx.nearest(x).first == lin);
      REQUIRE(idx.nearest(x).second == primary_distance_sq(elites[lin].primary, x));
      const auto want = nearest_with_pattern(elites, x, Pattern(2), 1e9);
      if (only.empty()) {
        REQUIRE_FALSE(want.has_value());
      } else {
        REQUIRE(want.has_value());
        REQUIRE(only.nearest(x).first == *want);
      }
    }
  }
  CHECK_THROWS_AS(nearest_primary(std::vector<Elite>{}, std::vector<double>{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(PrimaryIndex().nearest(std::vector<double>{0.0}), std::invalid_argument);
}

TEST_CASE("nearest_with_pattern honours the radius") {
  std::vector<Elite> e{make({0.0}, 0.0, Pattern(1)), make({1.0}, 0.0, Pattern(2))};
  CHECK(nearest_with_pattern(e, std::vector<double>{0.9}, Pattern(1), 0.95) == std::optional<std::size_t>(0));
  CHECK_FALSE(nearest_with_pattern(e, std::vector<double>{0.9}, Pattern(1), 0.5).has_value());
  CHECK_FALSE(nearest_with_pattern(e, std::vector<double>{0.9}, Pattern(3), 9.0).has_value());
}

TEST_CASE("projection matches brute-force binning on random archives") {
  Rng rng(5150);
  for (int trial = 0; trial < 100; ++trial) {
    const int cells = 1 + static_cast<int>(rng.index(40));
    const Bounds bx{-1.8, 1.8}, by{-1.0, 2.0};
    std::vector<Elite> elites;
    const int n = static_cast<int>(rng.index(400));
    for (int i = 0; i < n; ++i)
      elites.push_back(make({rng.uniform(-2.0, 2.0), rng.uniform(-1.2, 2.2), rng.uniform()}, rng.uniform(-3, 1)));

    std::vector<double> grid(static_cast<std::size_t>(cells * cells), -INFINITY);
    for (const Elite& e : elites) {
      const int cx = oracle_bin(e.primary[0], bx.lo, bx.hi, cells);
      const int cy = oracle_bin(e.primary[1], by.lo, by.hi, cells);
      double& slot = grid[static_cast<std::size_t>(cx * cells + cy)];
      slot = std::max(slot, e.fitness);
    }
    std::size_t size = 0;
    double sum = 0;
    for (double f : grid)
      if (f > -INFINITY) ++size, sum += f;

    const Projection p = project_effective(elites, cells, bx, by);
    REQUIRE(p.effective_size == size);
    if (size > 0) REQUIRE(p.mean_fitness == doctest::Approx(sum / size).epsilon(1e-12));
    else REQUIRE(p.mean_fitness == 0.0);
  }
}
