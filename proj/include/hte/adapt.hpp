#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hte/archive.hpp"
#include "hte/gp.hpp"
#include "hte/hierarchy.hpp"
#include "hte/planner.hpp"

namespace hte {

enum class Algo { hte, perfect_hte, rte2d, rte8d, aprol_lite };

std::string_view algo_name(Algo a);
/// Accepts hte, perfect, rte2d, rte8d, aprol (and the long forms perfect_hte, aprol_lite).
std::optional<Algo> parse_algo(std::string_view name);

struct AdaptParams {
  int max_actions = 80;
  MCTSParams mcts;
  GPParams transition_gp{0.3, 1.0, 1e-2};
  // Input is the skill's (x, y) scaled to [0,1] times skill_scale, then the contact bits times bit_scale.
  GPParams epsilon_gp{4.0, 0.01, 1e-4};
  double skill_scale = 1.0;
  double bit_scale = 1.0;
  double beta = 2.0;
  double eps_k = 4.0;
  double eps_c = 0.5;
  double eps_floor = 0.1;
  int directional_targets = 24;
  double directional_radius = 0.9;
  int candidate_pool = 8;  // hte: nearest skills per directional target ranked by the epsilon GP
  double pattern_tolerance = 0.15;  // units; a pattern is a candidate if it reproduces (x, y) this well
  int aprol_window = 5;
};

/// A candidate way of executing one top-layer skill.
struct PatternOption {
  Pattern pattern;
  double prior_epsilon = 0.0;  // score of the undamaged pattern-constrained execution
  Pose2 realised;              // displacement of that execution
};

/// Candidate patterns per top-layer skill (indexed like top().elites()).
/// HTE plans with skills that have any option, Perfect-HTE with skills whose
/// options include its pattern.
struct PatternTable {
  std::vector<std::vector<PatternOption>> by_skill;
};

PatternTable build_pattern_table(const HBRStack& stack, const AdaptParams& params);

struct AprolRepertoire {
  const GridArchive* archive = nullptr;
  DamageSpec prior;
};

/// Frozen repertoires an episode may draw on. Only the ones the variant needs must be set.
struct Repertoires {
  const HBRStack* stack = nullptr;
  const PatternTable* patterns = nullptr;
  const GridArchive* flat2d = nullptr;
  const GridArchive* flat8d = nullptr;
  std::vector<AprolRepertoire> aprol;
  SimConstants sim;
};

struct StepRecord {
  int step = 0;
  Pose2 skill;  // stored (x, y) and recorded yaw of the requested skill
  std::optional<Pattern> pattern;
  Pose2 predicted;
  Pose2 executed;  // body-frame displacement produced by the legs
  double epsilon = 0.0;
  bool eps_clamped = false;
  Pose2 pose;  // world pose after wall truncation
  bool collided = false;
  bool fallback = false;
  int repertoire = 0;
};

struct EpisodeLog {
  Algo algo = Algo::hte;
  DamageSpec damage;
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  int actions_used = 0;
  bool success = false;
};

/// Reset-free plan/execute/update loop until the goal is reached or the action
/// cap is hit. Throws std::invalid_argument if the maze is unsolvable or a
/// required repertoire is missing.
EpisodeLog run_episode(Algo algo, const Repertoires& reps, const Maze& maze, DamageSpec dmg, std::uint64_t seed,
                       const AdaptParams& params = {});

/// Pattern with the most legs among those present in the middle archive that
/// avoid every damaged leg; ties go to the pattern with more middle elites.
std::optional<Pattern> perfect_pattern(DamageSpec dmg, const HBRStack& stack);

/// Repertoire with the best mean of its last `window` scores; untried ones
/// count as 1.0. Ties are broken with `rng`.
std::size_t aprol_select(std::span<const std::vector<double>> history, int window, Rng& rng);

/// Desired and observed descriptors for the score, yaw scaled by 1/pi.
std::array<double, 3> epsilon_descriptor(const Pose2& p);

void write_episode_csv(std::ostream& os, const EpisodeLog& log);
void write_summary_csv(std::ostream& os, const EpisodeLog& log);

}  // namespace hte
