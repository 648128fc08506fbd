#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "hte/adapt.hpp"
#include "hte/bench.hpp"
#include "support.hpp"

using namespace hte;
using hte::testing::small_stack;
using hte::testing::small_train_params;

namespace {

const Maze& bench_maze() {
  static const Maze m = Maze::load(std::string(HTE_DATA_DIR) + "/maze_benchmark.txt");
  return m;
}

struct Small {
  PatternTable table;
  GridArchive flat2d = make_flat_archive(FlatVariant::bd2);
  GridArchive flat8d = make_flat_archive(FlatVariant::bd8);
  std::vector<std::pair<DamageSpec, GridArchive>> aprol;

  Repertoires view() const {
    Repertoires r;
    r.stack = &small_stack();
    r.patterns = &table;
    r.flat2d = &flat2d;
    r.flat8d = &flat8d;
    for (const auto& [d, a] : aprol) r.aprol.push_back({&a, d});
    return r;
  }
};

const Small& small() {
  static const Small s = [] {
    Small out;
    const TrainParams p = small_train_params();
    out.table = build_pattern_table(small_stack(), AdaptParams{});
    out.flat2d = train_flat(FlatVariant::bd2, p);
    out.flat8d = train_flat(FlatVariant::bd8, p);
    for (DamageSpec d : aprol_priors()) {
      TrainParams q = p;
      q.flat.budget = 2000;
      out.aprol.emplace_back(d, train_flat(FlatVariant::bd2, q, d));
    }
    return out;
  }();
  return s;
}

constexpr Algo kAll[] = {Algo::hte, Algo::perfect_hte, Algo::rte2d, Algo::rte8d, Algo::aprol_lite};

}  // namespace

TEST_CASE("variant names round trip") {
  for (Algo a : kAll) CHECK(parse_algo(algo_name(a)) == a);
  CHECK(parse_algo("perfect_hte") == Algo::perfect_hte);
  CHECK(parse_algo("aprol_lite") == Algo::aprol_lite);
  CHECK_FALSE(parse_algo("HTE"));
  CHECK_FALSE(parse_algo(""));
}

TEST_CASE("epsilon descriptor scales yaw by pi") {
  const auto d = epsilon_descriptor({0.3, -0.2, kPi / 2});
  CHECK(d[0] == 0.3);
  CHECK(d[1] == -0.2);
  CHECK(d[2] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("perfect pattern matches a brute-force choice") {
  const HBRStack& s = small_stack();
  const auto feasible = s.feasible_patterns();
  auto oracle = [&](DamageSpec d) -> std::optional<Pattern> {
    std::optional<Pattern> best;
    for (Pattern p : feasible) {
      if (p.mask() & d.mask()) continue;
      if (!best) {
        best = p;
        continue;
      }
      const int a = std::popcount(unsigned(p.mask())), b = std::popcount(unsigned(best->mask()));
      if (a > b || (a == b && s.pattern_support(p) > s.pattern_support(*best))) best = p;
    }
    return best;
  };
  for (DamageSpec d : DamageSpec::benchmark()) {
    const auto got = perfect_pattern(d, s);
    const auto want = oracle(d);
    REQUIRE(got.has_value() == want.has_value());
    if (!got) continue;
    CHECK((got->mask() & d.mask()) == 0);
    CHECK(std::popcount(unsigned(got->mask())) == std::popcount(unsigned(want->mask())));
    CHECK(s.pattern_support(*got) == s.pattern_support(*want));
  }
  // Undamaged: the fullest pattern present wins.
  const auto intact = perfect_pattern(DamageSpec{}, s);
  REQUIRE(intact);
  for (Pattern p : feasible) CHECK(std::popcount(unsigned(p.mask())) <= std::popcount(unsigned(intact->mask())));
}

TEST_CASE("aprol selection") {
  Rng rng(5);
  SUBCASE("untried repertoires count as perfect") {
    const std::vector<std::vector<double>> h{{0.9, 0.95}, {}, {0.2}};
    CHECK(aprol_select(h, 5, rng) == 1);
  }
  SUBCASE("only the window counts") {
    const std::vector<std::vector<double>> h{{0.1, 0.1, 0.9, 0.9}, {0.55, 0.55, 0.55, 0.55}};
    CHECK(aprol_select(h, 2, rng) == 0);
    CHECK(aprol_select(h, 4, rng) == 1);
  }
  SUBCASE("ties are split") {
    const std::vector<std::vector<double>> h{{0.4}, {0.4}, {0.1}};
    int first = 0;
    for (int i = 0; i < 400; ++i) {
      const auto r = aprol_select(h, 5, rng);
      REQUIRE(r < 2);
      first += r == 0;
    }
    CHECK(first > 150);
    CHECK(first < 250);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(aprol_select({}, 5, rng), std::invalid_argument);
    const std::vector<std::vector<double>> h{{0.4}};
    CHECK_THROWS_AS(aprol_select(h, 0, rng), std::invalid_argument);
  }
}

TEST_CASE("pattern table options reproduce their skill") {
  const HBRStack& s = small_stack();
  const AdaptParams params;
  const PatternTable& t = small().table;
  REQUIRE(t.by_skill.size() == s.top().size());
  std::size_t with_options = 0;
  for (std::size_t i = 0; i < t.by_skill.size(); ++i) {
    const Elite& e = s.top().elites()[i];
    with_options += !t.by_skill[i].empty();
    for (const auto& o : t.by_skill[i]) {
      CHECK(std::hypot(o.realised.x - e.primary[0], o.realised.y - e.primary[1]) <= params.pattern_tolerance + 1e-12);
      CHECK(o.prior_epsilon > 0.0);
      CHECK(o.prior_epsilon <= 1.0);
      const auto run = s.exec_top(e, o.pattern, DamageSpec{});
      CHECK(run.displacement.x == o.realised.x);
      CHECK(run.displacement.y == o.realised.y);
    }
  }
  CHECK(with_options > 0);
}

TEST_CASE("every variant runs a consistent episode") {
  const Small& sm = small();
  const Repertoires reps = sm.view();
  const Maze& maze = bench_maze();
  AdaptParams params;
  params.max_actions = 25;
  for (Algo a : kAll) {
    CAPTURE(algo_name(a));
    const DamageSpec dmg = DamageSpec::legs({1});
    const EpisodeLog log = run_episode(a, reps, maze, dmg, 3, params);
    CHECK(log.algo == a);
    CHECK(log.seed == 3);
    CHECK(log.actions_used == static_cast<int>(log.steps.size()));
    CHECK(log.actions_used <= params.max_actions);
    CHECK(log.success == maze.in_goal(log.steps.empty() ? maze.start() : log.steps.back().pose));
    if (!log.success) CHECK(log.actions_used == params.max_actions);

    // Poses chain through the wall-truncated motion of each executed displacement.
    Pose2 pose = maze.start();
    for (std::size_t k = 0; k < log.steps.size(); ++k) {
      const StepRecord& s = log.steps[k];
      CHECK(s.step == static_cast<int>(k));
      const Motion m = apply_motion(maze, pose, s.executed);
      CHECK(m.to.x == s.pose.x);
      CHECK(m.to.y == s.pose.y);
      CHECK(m.to.yaw == s.pose.yaw);
      CHECK(m.collided == s.collided);
      CHECK(s.epsilon >= 0.0);
      CHECK(s.epsilon <= 1.0);
      if (a == Algo::hte || a == Algo::perfect_hte || a == Algo::rte8d) CHECK(s.pattern.has_value());
      if (a == Algo::aprol_lite) CHECK(s.repertoire < 7);
      else CHECK(s.repertoire == 0);
      pose = s.pose;
    }

    const EpisodeLog again = run_episode(a, reps, maze, dmg, 3, params);
    std::ostringstream x, y;
    write_episode_csv(x, log);
    write_episode_csv(y, again);
    CHECK(x.str() == y.str());
  }
}

TEST_CASE("perfect never asks for a damaged leg") {
  const Repertoires reps = small().view();
  AdaptParams params;
  params.max_actions = 15;
  for (DamageSpec d : DamageSpec::benchmark()) {
    const EpisodeLog log = run_episode(Algo::perfect_hte, reps, bench_maze(), d, 7, params);
    for (const auto& s : log.steps) {
      REQUIRE(s.pattern);
      CHECK((s.pattern->mask() & d.mask()) == 0);
    }
  }
}

TEST_CASE("undamaged hierarchy reaches the goal") {
  const Repertoires reps = small().view();
  int reached = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const EpisodeLog log = run_episode(Algo::hte, reps, bench_maze(), DamageSpec{}, seed);
    reached += log.success;
  }
  CHECK(reached >= 3);
}

TEST_CASE("episode CSV layout") {
  const Repertoires reps = small().view();
  AdaptParams params;
  params.max_actions = 4;
  const EpisodeLog log = run_episode(Algo::rte2d, reps, bench_maze(), DamageSpec::legs({2}), 1, params);
  std::ostringstream os;
  write_episode_csv(os, log);
  std::istringstream in(os.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 18);
    ++lines;
  }
  CHECK(lines == log.actions_used + 1);

  std::ostringstream sum;
  write_summary_csv(sum, log);
  CHECK(sum.str() == "algo,damage,seed,actions_used,success\nrte2d,leg2,1," + std::to_string(log.actions_used) + "," +
                         std::to_string(int(log.success)) + "\n");
}

TEST_CASE("episode argument errors") {
  const Small& sm = small();
  const Maze closed = Maze::parse("#####\n#S#G#\n#####\n");
  CHECK_THROWS_AS(run_episode(Algo::rte2d, sm.view(), closed, {}, 1), std::invalid_argument);
  Repertoires none;
  for (Algo a : kAll) CHECK_THROWS_AS(run_episode(a, none, bench_maze(), {}, 1), std::invalid_argument);
  Repertoires no_table = sm.view();
  no_table.patterns = nullptr;
  AdaptParams one;
  one.max_actions = 1;
  CHECK_NOTHROW(run_episode(Algo::rte2d, no_table, bench_maze(), {}, 1, one));
}
