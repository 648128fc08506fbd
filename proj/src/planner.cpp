#include "hte/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

namespace hte {

MazeError::MazeError(const std::string& what, int line, int column)
    : std::runtime_error("maze:" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

Maze Maze::parse(std::string_view text, double cell_size) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (char ch : text) {
      if (ch == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    if (!cur.empty()) lines.push_back(cur);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
  }
  if (lines.size() < 3) throw MazeError("need at least three rows", static_cast<int>(lines.size()) + 1, 1);

  Maze m;
  m.cell_ = cell_size;
  m.rows_ = static_cast<int>(lines.size());
  m.cols_ = static_cast<int>(lines.front().size());
  if (m.cols_ < 3) throw MazeError("need at least three columns", 1, m.cols_ + 1);
  m.walls_.assign(static_cast<std::size_t>(m.rows_ * m.cols_), 0);
  bool have_start = false, have_goal = false;
  for (int r = 0; r < m.rows_; ++r) {
    const std::string& line = lines[static_cast<std::size_t>(r)];
    if (static_cast<int>(line.size()) != m.cols_)
      throw MazeError("ragged row, expected " + std::to_string(m.cols_) + " columns", r + 1,
                      std::min(static_cast<int>(line.size()), m.cols_) + 1);
    for (int c = 0; c < m.cols_; ++c) {
      const char ch = line[static_cast<std::size_t>(c)];
      const bool border = r == 0 || c == 0 || r == m.rows_ - 1 || c == m.cols_ - 1;
      switch (ch) {
        case '#':
          m.walls_[static_cast<std::size_t>(r * m.cols_ + c)] = 1;
          break;
        case '.':
          break;
        case 'S':
          if (have_start) throw MazeError("duplicate start cell", r + 1, c + 1);
          have_start = true;
          m.start_row_ = r;
          m.start_col_ = c;
          break;
        case 'G':
          if (have_goal) throw MazeError("duplicate goal cell", r + 1, c + 1);
          have_goal = true;
          m.goal_row_ = r;
          m.goal_col_ = c;
          break;
        default:
          throw MazeError(std::string("unexpected character '") + ch + "'", r + 1, c + 1);
      }
      if (border && ch != '#') throw MazeError("border must be walled", r + 1, c + 1);
    }
  }
  if (!have_start) throw MazeError("missing start cell 'S'", m.rows_, 1);
  if (!have_goal) throw MazeError("missing goal cell 'G'", m.rows_, 1);
  m.start_ = {m.center_x(m.start_col_), m.center_y(m.start_row_), 0.0};
  m.goal_x_ = m.center_x(m.goal_col_);
  m.goal_y_ = m.center_y(m.goal_row_);
  m.build_distance_field();
  return m;
}

Maze Maze::load(const std::string& path, double cell_size) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open maze file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), cell_size);
}

bool Maze::wall(int row, int col) const {
  if (row < 0 || col < 0 || row >= rows_ || col >= cols_) return true;
  return walls_[static_cast<std::size_t>(row * cols_ + col)] != 0;
}

int Maze::row_of(double y) const { return rows_ - 1 - static_cast<int>(std::floor(y / cell_)); }
int Maze::col_of(double x) const { return static_cast<int>(std::floor(x / cell_)); }

bool Maze::in_goal(const Pose2& p) const { return std::hypot(p.x - goal_x_, p.y - goal_y_) <= goal_radius; }

bool Maze::solvable() const {
  std::vector<char> seen(walls_.size(), 0);
  std::queue<std::pair<int, int>> q;
  q.emplace(start_row_, start_col_);
  seen[static_cast<std::size_t>(start_row_ * cols_ + start_col_)] = 1;
  constexpr int dr[] = {1, -1, 0, 0};
  constexpr int dc[] = {0, 0, 1, -1};
  while (!q.empty()) {
    const auto [r, c] = q.front();
    q.pop();
    if (r == goal_row_ && c == goal_col_) return true;
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr[k], nc = c + dc[k];
      if (wall(nr, nc)) continue;
      auto& s = seen[static_cast<std::size_t>(nr * cols_ + nc)];
      if (s) continue;
      s = 1;
      q.emplace(nr, nc);
    }
  }
  return false;
}

namespace {

double square_distance(double x, double y, double x0, double y0, double x1, double y1) {
  const double dx = std::max({x0 - x, 0.0, x - x1});
  const double dy = std::max({y0 - y, 0.0, y - y1});
  return std::hypot(dx, dy);
}

}  // namespace

bool Maze::disc_free(double x, double y, double radius) const {
  const int c0 = col_of(x - radius), c1 = col_of(x + radius);
  const int r0 = row_of(y + radius), r1 = row_of(y - radius);
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) {
      if (!wall(r, c)) continue;
      const double x0 = c * cell_, y0 = (rows_ - 1 - r) * cell_;
      if (square_distance(x, y, x0, y0, x0 + cell_, y0 + cell_) < radius) return false;
    }
  return true;
}

void Maze::build_distance_field() {
  const double inf = std::numeric_limits<double>::infinity();
  field_.assign(walls_.size(), inf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const int g = goal_row_ * cols_ + goal_col_;
  field_[static_cast<std::size_t>(g)] = 0.0;
  pq.emplace(0.0, g);
  while (!pq.empty()) {
    const auto [d, id] = pq.top();
    pq.pop();
    if (d > field_[static_cast<std::size_t>(id)]) continue;
    const int r = id / cols_, c = id % cols_;
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const int nr = r + dr, nc = c + dc;
        if (wall(nr, nc)) continue;
        if (dr != 0 && dc != 0 && (wall(r + dr, c) || wall(r, c + dc))) continue;
        const double nd = d + cell_ * ((dr != 0 && dc != 0) ? std::sqrt(2.0) : 1.0);
        auto& f = field_[static_cast<std::size_t>(nr * cols_ + nc)];
        if (nd < f) {
          f = nd;
          pq.emplace(nd, nr * cols_ + nc);
        }
      }
  }
}

double Maze::goal_distance(double x, double y) const {
  const int r = row_of(y), c = col_of(x);
  double best = std::numeric_limits<double>::infinity();
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) {
      const int nr = r + dr, nc = c + dc;
      if (wall(nr, nc)) continue;
      if (dr != 0 && dc != 0 && (wall(r + dr, c) || wall(r, c + dc))) continue;
      const double f = field_[static_cast<std::size_t>(nr * cols_ + nc)];
      best = std::min(best, f + std::hypot(x - center_x(nc), y - center_y(nr)));
    }
  return best;
}

namespace {

constexpr double kEps = 1e-12;

// Earliest t in [0, 1] at which p + t d enters the open box, or +inf.
double enter_box(double px, double py, double dx, double dy, double x0, double y0, double x1, double y1) {
  double enter = -std::numeric_limits<double>::infinity();
  double exit = std::numeric_limits<double>::infinity();
  const double p[2] = {px, py}, d[2] = {dx, dy}, lo[2] = {x0, y0}, hi[2] = {x1, y1};
  for (int a = 0; a < 2; ++a) {
    if (d[a] == 0.0) {
      if (p[a] <= lo[a] || p[a] >= hi[a]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double ta = (lo[a] - p[a]) / d[a];
    double tb = (hi[a] - p[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    enter = std::max(enter, ta);
    exit = std::min(exit, tb);
  }
  if (enter < exit && exit > kEps && enter <= 1.0) return std::max(enter, 0.0);
  return std::numeric_limits<double>::infinity();
}

double enter_circle(double px, double py, double dx, double dy, double cx, double cy, double r) {
  const double a = dx * dx + dy * dy;
  if (a == 0.0) return std::numeric_limits<double>::infinity();
  const double fx = px - cx, fy = py - cy;
  const double b = 2.0 * (fx * dx + fy * dy);
  const double c = fx * fx + fy * fy - r * r;
  const double disc = b * b - 4.0 * a * c;
  if (disc <= 0.0) return std::numeric_limits<double>::infinity();
  const double s = std::sqrt(disc);
  const double t1 = (-b - s) / (2.0 * a);
  const double t2 = (-b + s) / (2.0 * a);
  if (t2 > kEps && t1 <= 1.0) return std::max(t1, 0.0);
  return std::numeric_limits<double>::infinity();
}

}  // namespace

Motion apply_motion(const Maze& maze, const Pose2& from, const Pose2& disp) {
  const Pose2 target = se2_compose(from, disp);
  const double dx = target.x - from.x, dy = target.y - from.y;
  const double len = std::hypot(dx, dy);
  if (len == 0.0) return {target, false};
  const double r = maze.robot_radius;
  const double cs = maze.cell_size();
  const int c0 = maze.col_of(std::min(from.x, target.x) - r) - 1;
  const int c1 = maze.col_of(std::max(from.x, target.x) + r) + 1;
  const int r0 = maze.row_of(std::max(from.y, target.y) + r) - 1;
  const int r1 = maze.row_of(std::min(from.y, target.y) - r) + 1;
  double t_hit = std::numeric_limits<double>::infinity();
  for (int row = std::max(r0, 0); row <= std::min(r1, maze.rows() - 1); ++row)
    for (int col = std::max(c0, 0); col <= std::min(c1, maze.cols() - 1); ++col) {
      if (!maze.wall(row, col)) continue;
      const double x0 = col * cs, y0 = (maze.rows() - 1 - row) * cs, x1 = x0 + cs, y1 = y0 + cs;
      // Minkowski sum of the square and the disc: two slabs and four corner circles.
      t_hit = std::min(t_hit, enter_box(from.x, from.y, dx, dy, x0 - r, y0, x1 + r, y1));
      t_hit = std::min(t_hit, enter_box(from.x, from.y, dx, dy, x0, y0 - r, x1, y1 + r));
      t_hit = std::min(t_hit, enter_circle(from.x, from.y, dx, dy, x0, y0, r));
      t_hit = std::min(t_hit, enter_circle(from.x, from.y, dx, dy, x1, y0, r));
      t_hit = std::min(t_hit, enter_circle(from.x, from.y, dx, dy, x0, y1, r));
      t_hit = std::min(t_hit, enter_circle(from.x, from.y, dx, dy, x1, y1, r));
    }
  if (!(t_hit <= 1.0)) return {target, false};
  const double t = std::max(0.0, t_hit - 1e-3 / len);
  return {{from.x + t * dx, from.y + t * dy, wrap_angle(from.yaw + t * disp.yaw)}, true};
}

TransitionModel::TransitionModel(GPParams params) : dx_(2, params), dy_(2, params), dyaw_(2, params) {}

Pose2 TransitionModel::predict(const Pose2& skill) const {
  const double in[2] = {skill.x, skill.y};
  return {skill.x + dx_.predict(in).mean, skill.y + dy_.predict(in).mean,
          wrap_angle(skill.yaw + dyaw_.predict(in).mean)};
}

void TransitionModel::update(const Pose2& skill, const Pose2& observed) {
  const double in[2] = {skill.x, skill.y};
  dx_.update(in, observed.x - skill.x);
  dy_.update(in, observed.y - skill.y);
  dyaw_.update(in, wrap_angle(observed.yaw - skill.yaw));
}

namespace {

struct Node {
  Pose2 pose;
  int depth = 0;
  bool terminal = false;
  bool collided = false;  // on the edge leading here
  int visits = 0;
  double value = 0.0;
  std::vector<int> children;
  std::vector<std::size_t> untried;
};

}  // namespace

PlanResult mcts_plan(const Maze& maze, const Pose2& pose, std::span<const Pose2> predicted, const MCTSParams& params,
                     Rng& rng) {
  const std::size_t A = predicted.size();
  if (A == 0) throw std::invalid_argument("mcts_plan: empty action set");
  if (params.iterations <= 0 || params.horizon <= 0) throw std::invalid_argument("mcts_plan: non-positive budget");
  if (maze.in_goal(pose)) throw std::invalid_argument("mcts_plan: pose already inside the goal");

  const double d0 = std::max(maze.goal_distance(pose.x, pose.y), 1e-9);
  std::vector<Node> tree;
  tree.reserve(static_cast<std::size_t>(params.iterations) + 1);
  auto make_node = [&](const Pose2& p, int depth, bool collided) {
    Node n;
    n.pose = p;
    n.depth = depth;
    n.collided = collided;
    n.terminal = maze.in_goal(p) || depth >= params.horizon;
    n.children.assign(A, -1);
    if (!n.terminal) {
      n.untried.resize(A);
      for (std::size_t a = 0; a < A; ++a) n.untried[a] = a;
    }
    tree.push_back(std::move(n));
    return static_cast<int>(tree.size() - 1);
  };
  make_node(pose, 0, false);

  std::vector<int> path;
  for (int it = 0; it < params.iterations; ++it) {
    path.assign(1, 0);
    int cur = 0;
    // Selection and expansion.
    while (!tree[static_cast<std::size_t>(cur)].terminal) {
      Node& n = tree[static_cast<std::size_t>(cur)];
      if (!n.untried.empty()) {
        const std::size_t k = rng.index(n.untried.size());
        const std::size_t a = n.untried[k];
        n.untried[k] = n.untried.back();
        n.untried.pop_back();
        const Motion m = apply_motion(maze, n.pose, predicted[a]);
        const int depth = n.depth + 1;
        const int child = make_node(m.to, depth, m.collided);
        tree[static_cast<std::size_t>(cur)].children[a] = child;
        path.push_back(child);
        cur = child;
        break;
      }
      const double log_n = std::log(static_cast<double>(n.visits));
      int best = -1;
      double best_u = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < A; ++a) {
        const int ch = n.children[a];
        const Node& c = tree[static_cast<std::size_t>(ch)];
        const double u = c.value / c.visits + params.uct_c * std::sqrt(log_n / c.visits);
        if (u > best_u) {
          best_u = u;
          best = ch;
        }
      }
      path.push_back(best);
      cur = best;
    }
    // Collision penalties along the tree path, then an optional random rollout.
    double discount = 1.0, penalty = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
      if (tree[static_cast<std::size_t>(path[i])].collided) penalty += discount * params.collision_penalty;
      discount *= params.discount;
    }
    Pose2 p = tree[static_cast<std::size_t>(cur)].pose;
    int depth = tree[static_cast<std::size_t>(cur)].depth;
    bool reached = maze.in_goal(p);
    for (int r = 0; r < params.rollout_steps && !reached && depth < params.horizon; ++r) {
      const Motion m = apply_motion(maze, p, predicted[rng.index(A)]);
      if (m.collided) penalty += discount * params.collision_penalty;
      discount *= params.discount;
      p = m.to;
      ++depth;
      reached = maze.in_goal(p);
    }
    const double d = maze.goal_distance(p.x, p.y);
    double ret = (d0 - d) / d0 - penalty;
    if (reached) ret += params.goal_bonus * std::pow(params.discount, depth - 1);
    for (int id : path) {
      tree[static_cast<std::size_t>(id)].visits += 1;
      tree[static_cast<std::size_t>(id)].value += ret;
    }
  }

  PlanResult out;
  out.root_visits.assign(A, 0);
  out.root_values.assign(A, 0.0);
  const Node& root = tree.front();
  int best_visits = -1;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < A; ++a) {
    const int ch = root.children[a];
    if (ch < 0) continue;
    const Node& c = tree[static_cast<std::size_t>(ch)];
    out.root_visits[a] = c.visits;
    out.root_values[a] = c.value / c.visits;
    if (c.visits > best_visits || (c.visits == best_visits && out.root_values[a] > best_value)) {
      best_visits = c.visits;
      best_value = out.root_values[a];
      out.action = a;
    }
  }
  return out;
}

PlanResult mcts_plan(const Maze& maze, const Pose2& pose, std::span<const Pose2> skills, const TransitionModel& model,
                     const MCTSParams& params, Rng& rng) {
  std::vector<Pose2> predicted;
  predicted.reserve(skills.size());
  for (const Pose2& s : skills) predicted.push_back(model.predict(s));
  return mcts_plan(maze, pose, predicted, params, rng);
}

}  // namespace hte
