#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hte/geom.hpp"
#include "hte/gp.hpp"
#include "hte/rng.hpp"

namespace hte {

class MazeError : public std::runtime_error {
 public:
  MazeError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Occupancy-grid maze. Row 0 of the text is the top of the map; world y grows upwards.
class Maze {
 public:
  /// '#' wall, '.' free, 'S' start, 'G' goal. Throws MazeError with 1-based line/column.
  static Maze parse(std::string_view text, double cell_size = 0.5);
  static Maze load(const std::string& path, double cell_size = 0.5);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double cell_size() const { return cell_; }
  bool wall(int row, int col) const;
  bool free_cell(int row, int col) const { return !wall(row, col); }

  const Pose2& start() const { return start_; }
  double goal_x() const { return goal_x_; }
  double goal_y() const { return goal_y_; }
  double goal_radius = 0.3;
  double robot_radius = 0.25;

  bool in_goal(const Pose2& p) const;
  /// Breadth-first search over free cells from start to goal.
  bool solvable() const;
  /// True if a disc of `radius` centred at (x, y) overlaps no wall cell.
  bool disc_free(double x, double y, double radius) const;
  /// Shortest-path distance to the goal through free cells (8-connected, no corner cutting).
  double goal_distance(double x, double y) const;

  int row_of(double y) const;
  int col_of(double x) const;
  double center_x(int col) const { return (col + 0.5) * cell_; }
  double center_y(int row) const { return (rows_ - 1 - row + 0.5) * cell_; }

 private:
  void build_distance_field();

  int rows_ = 0;
  int cols_ = 0;
  double cell_ = 0.5;
  std::vector<char> walls_;
  Pose2 start_;
  int start_row_ = 0, start_col_ = 0, goal_row_ = 0, goal_col_ = 0;
  double goal_x_ = 0, goal_y_ = 0;
  std::vector<double> field_;
};

struct Motion {
  Pose2 to;
  bool collided = false;
};

/// Moves along the straight world-frame segment to se2_compose(from, disp). If the
/// robot disc would enter a wall, stops 1e-3 short of first contact with yaw
/// interpolated linearly.
Motion apply_motion(const Maze& maze, const Pose2& from, const Pose2& disp);

struct MCTSParams {
  int iterations = 500;
  int horizon = 6;
  double uct_c = 1.414;
  std::size_t action_set_size = 40;
  double discount = 1.0;
  double goal_bonus = 10.0;
  double collision_penalty = 0.5;
  // Random-action steps simulated past a new leaf (capped by the horizon). Zero scores the leaf itself.
  int rollout_steps = 0;
};

/// One GP per output (dx, dy, dyaw) over the skill's stored (x, y), trained on
/// observed-minus-stored residuals so the repertoire acts as the prior mean.
class TransitionModel {
 public:
  explicit TransitionModel(GPParams params = {});
  /// Stored skill displacement corrected by the posterior mean residuals.
  Pose2 predict(const Pose2& skill) const;
  void update(const Pose2& skill, const Pose2& observed);
  std::size_t size() const { return dx_.size(); }

 private:
  GPModel dx_, dy_, dyaw_;
};

struct PlanResult {
  std::size_t action = 0;
  std::vector<int> root_visits;
  std::vector<double> root_values;  // mean return per root child
};

/// UCT over sequences of actions whose robot-frame outcomes are given by
/// `predicted`. Returns the most visited root child.
PlanResult mcts_plan(const Maze& maze, const Pose2& pose, std::span<const Pose2> predicted, const MCTSParams& params,
                     Rng& rng);

/// Convenience overload: predicts each skill with the transition model first.
PlanResult mcts_plan(const Maze& maze, const Pose2& pose, std::span<const Pose2> skills, const TransitionModel& model,
                     const MCTSParams& params, Rng& rng);

}  // namespace hte
