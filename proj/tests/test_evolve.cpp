#include <doctest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hte/evolve.hpp"

using namespace hte;

TEST_CASE("polynomial mutation matches the reference stream") {
  Rng rng(21);
  const Genotype a = polynomial_mutation({0.1, 0.5, 0.9, 0.0, 1.0, 0.3}, 1.0, 10.0, rng);
  const Genotype want_a{0.12428965443028697, 0.4855876941298214, 0.8923328224630442, 0.00844490752688054, 1.0,
                        0.4143100785512292};
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(want_a[i]).epsilon(1e-14));
  const Genotype b = polynomial_mutation({0.2, 0.4, 0.6, 0.8}, 0.5, 10.0, rng);
  const Genotype want_b{0.26355860544713255, 0.41613727462610295, 0.6, 0.8};
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i] == doctest::Approx(want_b[i]).epsilon(1e-14));
}

TEST_CASE("mutation stays in bounds and is centred") {
  Rng rng(5);
  double shift = 0.0;
  int moved = 0;
  for (int i = 0; i < 20000; ++i) {
    const Genotype g = polynomial_mutation({0.5, 0.0, 1.0}, 0.7, 10.0, rng);
    for (double v : g) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
    shift += g[0] - 0.5;
    moved += g[0] != 0.5;
  }
  CHECK(std::abs(shift / 20000) < 2e-3);
  CHECK(moved == doctest::Approx(0.7 * 20000).epsilon(0.03));
}

TEST_CASE("parallel_for visits every index once") {
  for (unsigned jobs : {1u, 3u, 16u}) {
    std::vector<std::atomic<int>> hits(101);
    parallel_for(hits.size(), jobs, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("called on an empty range"); });
}

TEST_CASE("parameter validation") {
  EvoParams p;
  CHECK_NOTHROW(p.validate());
  p.mutation_rate = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.budget = 10;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.population = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.eta = -1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

namespace {

// Descriptor = first two genes; fitness rewards the third.
std::optional<Evaluation> toy(const Genotype& g) {
  if (g[3] > 0.95) return std::nullopt;
  if (g[3] < 0.02) throw std::runtime_error("toy failure");
  return Evaluation{g[2], {g[0], g[1]}, std::nullopt, 0.0};
}

}  // namespace

TEST_CASE("map-elites spends the budget and fills the grid") {
  GridArchive a({10, 10}, {{0, 1}, {0, 1}});
  EvoParams p;
  p.genotype_size = 4;
  p.budget = 5000;
  p.population = 100;
  std::size_t ticks = 0;
  const RunStats s = map_elites_run(a, toy, p, [&](std::size_t) { ++ticks; }, 500);
  CHECK(s.evaluations == 5000);
  CHECK(ticks == 10);
  CHECK(s.failures > 0);
  CHECK(s.inserted >= a.size());
  CHECK(a.size() == 100);
  double mean = 0;
  for (const Elite& e : a.elites()) mean += e.fitness;
  CHECK(mean / a.size() > 0.9);
}

TEST_CASE("map-elites result does not depend on the thread count") {
  auto run = [](unsigned jobs) {
    GridArchive a({10, 10}, {{0, 1}, {0, 1}});
    EvoParams p;
    p.genotype_size = 4;
    p.budget = 3000;
    p.seed = 9;
    p.jobs = jobs;
    map_elites_run(a, toy, p);
    return a.elites();
  };
  const auto one = run(1);
  CHECK(run(4) == one);
  CHECK(run(7) == one);
}

TEST_CASE("layer evaluators produce descriptors in range") {
  const SimConstants sim;
  const auto eval = bottom_evaluator(sim);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto e = eval(random_genotype(6, rng));
    REQUIRE(e.has_value());
    for (double v : e->primary) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(e->fitness <= 0.0);
  }
  const HexapodModel model;
  const auto flat = flat_evaluator(model, FlatVariant::bd8);
  const auto f = flat(random_genotype(kFlatGenes, rng));
  REQUIRE(f.has_value());
  CHECK(f->primary.size() == 2);
  CHECK(f->secondary.has_value());
  CHECK_FALSE(flat_evaluator(model, FlatVariant::bd2)(random_genotype(kFlatGenes, rng))->secondary.has_value());
  CHECK(make_flat_archive(FlatVariant::bd8).capacity() == 100 * 100 * 64);
}

TEST_CASE("flat training is reproducible") {
  TrainParams p;
  p.flat = {2000, 0.14};
  const GridArchive a = train_flat(FlatVariant::bd2, p);
  const GridArchive b = train_flat(FlatVariant::bd2, p);
  CHECK(a.elites() == b.elites());
  CHECK(a.size() > 50);
  // A damage prior changes the search.
  const GridArchive c = train_flat(FlatVariant::bd2, p, DamageSpec::legs({1}));
  CHECK_FALSE(c.elites() == a.elites());
}
