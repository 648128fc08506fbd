#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "hte/hierarchy.hpp"
#include "support.hpp"

using namespace hte;
using hte::testing::small_stack;

TEST_CASE("small stack trains every layer") {
  const HBRStack& s = small_stack();
  CHECK(s.bottom().size() > 100);
  CHECK(s.middle().size() > 100);
  CHECK(s.top().size() > 100);
  CHECK(s.rho() == 0.15);
  const auto pats = s.feasible_patterns();
  REQUIRE(pats.size() > 5);
  std::size_t support = 0;
  for (std::size_t i = 0; i < pats.size(); ++i) {
    if (i > 0) CHECK(pats[i - 1].mask() < pats[i].mask());
    CHECK(s.pattern_support(pats[i]) > 0);
    support += s.pattern_support(pats[i]);
  }
  CHECK(support == s.middle().size());
}

TEST_CASE("leg lookup is the nearest bottom elite") {
  const HBRStack& s = small_stack();
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> g(kMiddleGenes);
    for (double& v : g) v = rng.uniform();
    const auto slots = s.resolve_legs(g);
    for (std::size_t l = 0; l < kLegs; ++l)
      CHECK(slots[l] == nearest_primary(s.bottom().elites(), std::span<const double>(g).subspan(3 * l, 3)));
  }
  CHECK_THROWS_AS(s.resolve_legs(std::vector<double>(5)), std::invalid_argument);
}

TEST_CASE("middle selection honours patterns within rho") {
  const HBRStack& s = small_stack();
  const auto& mid = s.middle().elites();
  Rng rng(4);
  int fell_back = 0, kept = 0;
  for (int i = 0; i < 300; ++i) {
    const std::vector<double> q{rng.uniform(), rng.uniform(), rng.uniform()};
    const Pattern p(static_cast<std::uint8_t>(rng.index(64)));
    const auto [slot, fallback] = s.select_middle(q, p);
    const auto want = nearest_with_pattern(mid, q, p, s.rho());
    if (want) {
      CHECK_FALSE(fallback);
      CHECK(slot == *want);
      CHECK(mid[slot].secondary == p);
      ++kept;
    } else {
      CHECK(fallback);
      CHECK(slot == nearest_primary(mid, q));
      ++fell_back;
    }
    const auto [free_slot, free_fb] = s.select_middle(q, std::nullopt);
    CHECK_FALSE(free_fb);
    CHECK(free_slot == nearest_primary(mid, q));
  }
  CHECK(kept > 0);
  CHECK(fell_back > 0);
}

TEST_CASE("stored middle descriptors are reproduced by their elites") {
  const HBRStack& s = small_stack();
  for (std::size_t i = 0; i < s.middle().size(); i += 7) {
    const Elite& e = s.middle().elites()[i];
    const StepOutcome o = s.run_middle_elite(i, {});
    const auto bd = s.model().normalize_step(o.displacement);
    for (int k = 0; k < 3; ++k) CHECK(bd[k] == e.primary[k]);
    CHECK(o.contact == *e.secondary);
  }
}

TEST_CASE("top skills replay their stored descriptor undamaged") {
  const HBRStack& s = small_stack();
  for (const Elite& e : s.top().elites()) {
    const TopExecution ex = s.exec_top(e, std::nullopt, {});
    REQUIRE(ex.displacement.x == e.primary[0]);
    REQUIRE(ex.displacement.y == e.primary[1]);
    REQUIRE(ex.displacement.yaw == e.yaw);
    REQUIRE_FALSE(ex.fallback);
    REQUIRE(ex.middle_lookups == 3);
    REQUIRE(ex.bottom_lookups == 18);
  }
}

TEST_CASE("top execution chains three middle steps") {
  const HBRStack& s = small_stack();
  const Elite& e = s.top().elites().front();
  const DamageSpec d = DamageSpec::legs({3});
  const TopExecution ex = s.exec_top(e, Pattern(0b111111), d);
  Pose2 p;
  for (const auto& st : ex.steps) {
    CHECK(st.outcome == s.run_middle_elite(st.middle_slot, d));
    p = se2_compose(p, st.outcome.displacement);
  }
  CHECK(ex.displacement == p);
  CHECK_THROWS_AS(s.exec_top(std::vector<double>(8), std::nullopt, {}), std::invalid_argument);
}

TEST_CASE("middle elites that avoid a leg ignore its damage") {
  const HBRStack& s = small_stack();
  int checked = 0;
  for (std::size_t i = 0; i < s.middle().size(); ++i) {
    const Pattern p = *s.middle().elites()[i].secondary;
    const StepOutcome base = s.run_middle_elite(i, {});
    for (int l = 1; l <= kLegs; ++l) {
      if (p.uses_leg(l)) continue;
      REQUIRE(s.run_middle_elite(i, DamageSpec::legs({l})) == base);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("modulation scan covers every skill and pattern") {
  const HBRStack& s = small_stack();
  const auto rows = modulate_scan(s);
  const auto pats = s.feasible_patterns();
  REQUIRE(rows.size() == s.top().size() * pats.size());
  for (std::size_t i = 0; i < rows.size(); i += 97) {
    const auto& r = rows[i];
    const Elite& e = s.top().elites()[r.skill];
    const TopExecution ex = s.exec_top(e, r.pattern, {});
    CHECK(r.achieved == ex.displacement);
    CHECK(r.feasible == !ex.fallback);
    CHECK(r.error == doctest::Approx(std::hypot(ex.displacement.x - e.primary[0], ex.displacement.y - e.primary[1])));
  }
  const auto counts = reproducing_pattern_counts(s, rows, 0.15);
  std::vector<std::size_t> manual(s.top().size());
  for (const auto& r : rows) manual[r.skill] += r.feasible && r.error <= 0.15;
  CHECK(counts == manual);
}

TEST_CASE("stack construction checks") {
  CHECK_THROWS_AS(HBRStack{DistArchive(0.01, 3, false)}, std::invalid_argument);
  DistArchive wrong(0.01, 2, false);
  wrong.insert({{0.1, 0.1, 0.1, 0.1, 0.1, 0.1}, 0.0, {0.1, 0.2}, std::nullopt, 0.0});
  CHECK_THROWS_AS(HBRStack{wrong}, std::invalid_argument);
  HBRStack s(small_stack().bottom());
  CHECK_THROWS_AS(s.set_middle(DistArchive(0.05, 3, true)), std::invalid_argument);
  CHECK_THROWS_AS(s.set_top(GridArchive({10}, {{0, 1}})), std::invalid_argument);
  CHECK_THROWS_AS(s.select_middle(std::vector<double>{0.5, 0.5, 0.5}, std::nullopt), std::invalid_argument);
}
