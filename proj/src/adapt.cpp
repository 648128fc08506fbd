#include "hte/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hte {

std::string_view algo_name(Algo a) {
  switch (a) {
    case Algo::hte: return "hte";
    case Algo::perfect_hte: return "perfect";
    case Algo::rte2d: return "rte2d";
    case Algo::rte8d: return "rte8d";
    case Algo::aprol_lite: return "aprol";
  }
  return "?";
}

std::optional<Algo> parse_algo(std::string_view name) {
  if (name == "hte") return Algo::hte;
  if (name == "perfect" || name == "perfect_hte") return Algo::perfect_hte;
  if (name == "rte2d") return Algo::rte2d;
  if (name == "rte8d") return Algo::rte8d;
  if (name == "aprol" || name == "aprol_lite") return Algo::aprol_lite;
  return std::nullopt;
}

std::array<double, 3> epsilon_descriptor(const Pose2& p) { return {p.x, p.y, p.yaw / kPi}; }

namespace {

Pose2 skill_pose(const Elite& e) { return {e.primary.at(0), e.primary.at(1), e.yaw}; }

double score(const Pose2& observed, const Pose2& desired, const AdaptParams& p) {
  const auto o = epsilon_descriptor(observed);
  const auto d = epsilon_descriptor(desired);
  return epsilon_score(o, d, p.eps_k, p.eps_c, p.eps_floor);
}

bool floor_active(const Pose2& desired, const AdaptParams& p) {
  const auto d = epsilon_descriptor(desired);
  return 2.0 * std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) - p.eps_c < p.eps_floor;
}

// True if every one of the three steps finds an elite with the pattern within rho.
bool realisable(const HBRStack& stack, std::span<const double> g, Pattern pattern) {
  for (std::size_t k = 0; k < 3; ++k)
    if (stack.select_middle(g.subspan(3 * k, 3), pattern).second) return false;
  return true;
}

}  // namespace

PatternTable build_pattern_table(const HBRStack& stack, const AdaptParams& params) {
  PatternTable table;
  const auto patterns = stack.feasible_patterns();
  const auto& skills = stack.top().elites();
  table.by_skill.resize(skills.size());
  for (std::size_t s = 0; s < skills.size(); ++s) {
    const Pose2 desired = skill_pose(skills[s]);
    for (Pattern p : patterns) {
      if (!realisable(stack, skills[s].genotype, p)) continue;
      const Pose2 got = stack.exec_top(skills[s], p, DamageSpec{}).displacement;
      if (std::hypot(got.x - desired.x, got.y - desired.y) > params.pattern_tolerance) continue;
      table.by_skill[s].push_back({p, score(got, desired, params), got});
    }
  }
  return table;
}

std::optional<Pattern> perfect_pattern(DamageSpec dmg, const HBRStack& stack) {
  std::optional<Pattern> best;
  for (Pattern p : stack.feasible_patterns()) {
    if ((p.mask() & dmg.mask()) != 0) continue;
    if (!best || p.count() > best->count() ||
        (p.count() == best->count() && stack.pattern_support(p) > stack.pattern_support(*best)))
      best = p;
  }
  return best;
}

std::size_t aprol_select(std::span<const std::vector<double>> history, int window, Rng& rng) {
  if (history.empty()) throw std::invalid_argument("aprol_select: no repertoires");
  if (window < 1) throw std::invalid_argument("aprol_select: window must be positive");
  std::vector<double> value(history.size(), 1.0);
  for (std::size_t r = 0; r < history.size(); ++r) {
    const auto& h = history[r];
    if (h.empty()) continue;
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(window), h.size());
    double sum = 0.0;
    for (std::size_t i = h.size() - n; i < h.size(); ++i) sum += h[i];
    value[r] = sum / static_cast<double>(n);
  }
  const double top = *std::max_element(value.begin(), value.end());
  std::vector<std::size_t> ties;
  for (std::size_t r = 0; r < value.size(); ++r)
    if (value[r] == top) ties.push_back(r);
  return ties[ties.size() == 1 ? 0 : rng.index(ties.size())];
}

namespace {

// Skills the planner may choose from. `source` maps each back to its slot in
// the repertoire (or its cell group for rte8d).
struct ActionSpace {
  std::vector<Elite> skills;
  std::vector<std::size_t> source;
  PrimaryIndex index;

  void build_index() { index = PrimaryIndex(skills); }
};

ActionSpace all_of(std::span<const Elite> elites) {
  ActionSpace s;
  s.skills.assign(elites.begin(), elites.end());
  for (std::size_t i = 0; i < elites.size(); ++i) s.source.push_back(i);
  s.build_index();
  return s;
}

// Top skills passing `keep`; every skill if none does.
template <class Keep>
ActionSpace top_subset(std::span<const Elite> elites, Keep keep) {
  ActionSpace s;
  for (std::size_t i = 0; i < elites.size(); ++i)
    if (keep(i)) {
      s.skills.push_back(elites[i]);
      s.source.push_back(i);
    }
  if (s.skills.empty()) return all_of(elites);
  s.build_index();
  return s;
}

// Directional targets on a ring plus random fill. With a scorer, each target
// takes the best-scoring skill among its `candidate_pool` nearest instead of
// the single nearest one.
std::vector<std::size_t> sample_actions(const ActionSpace& space, const AdaptParams& p, Rng& rng,
                                        const std::function<double(std::size_t)>& scorer = {}) {
  std::vector<std::size_t> out;
  const std::size_t want = std::min(p.mcts.action_set_size, space.skills.size());
  auto add = [&](std::size_t s) {
    if (out.size() < want && std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  };
  const std::size_t pool = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, p.candidate_pool)),
                                                 space.skills.size());
  std::vector<std::pair<double, std::size_t>> near(space.skills.size());
  for (int k = 0; k < p.directional_targets; ++k) {
    const double a = 2.0 * kPi * k / p.directional_targets;
    const std::array<double, 2> q{p.directional_radius * std::cos(a), p.directional_radius * std::sin(a)};
    if (!scorer || pool == 1) {
      add(space.index.nearest(q).first);
      continue;
    }
    for (std::size_t i = 0; i < space.skills.size(); ++i) {
      const auto& bd = space.skills[i].primary;
      near[i] = {(bd[0] - q[0]) * (bd[0] - q[0]) + (bd[1] - q[1]) * (bd[1] - q[1]), i};
    }
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(pool), near.end());
    std::size_t best = near[0].second;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pool; ++j) {
      const double v = scorer(near[j].second);
      if (v > best_v) best_v = v, best = near[j].second;
    }
    add(best);
  }
  // Random fill; bounded retries keep tiny archives from looping forever.
  for (std::size_t tries = 0; out.size() < want && tries < 64 * want; ++tries) add(rng.index(space.skills.size()));
  return out;
}

// Groups a flat 8-D container by (x, y) cell. Each group is represented for
// planning by its fittest slot.
struct CellGroups {
  std::vector<Elite> representatives;
  std::vector<std::vector<std::size_t>> slots;
};

CellGroups group_cells(const GridArchive& a) {
  CellGroups g;
  std::map<std::vector<int>, std::size_t> where;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Elite& e = a.elites()[i];
    auto [it, fresh] = where.try_emplace(a.cell_coords(e.primary), g.slots.size());
    if (fresh) {
      g.slots.emplace_back();
      g.representatives.push_back(e);
    } else if (e.fitness > g.representatives[it->second].fitness) {
      g.representatives[it->second] = e;
    }
    g.slots[it->second].push_back(i);
  }
  return g;
}

std::vector<double> eps_input(const Elite& skill, Pattern pattern, const AdaptParams& p) {
  constexpr double lo = -1.8, span = 3.6;
  std::vector<double> x{p.skill_scale * (skill.primary[0] - lo) / span, p.skill_scale * (skill.primary[1] - lo) / span};
  for (int b : pattern.bits()) x.push_back(b * p.bit_scale);
  return x;
}

// Exact-key prior for the epsilon GP: unseen inputs get `fallback`.
struct PriorTable {
  std::map<std::vector<double>, double> values;
  double fallback = 1.0;
  double operator()(std::span<const double> x) const {
    auto it = values.find(std::vector<double>(x.begin(), x.end()));
    return it == values.end() ? fallback : it->second;
  }
};

struct Realisation {
  Pose2 executed;
  std::optional<Pattern> pattern;
  bool fallback = false;
  std::size_t slot = 0;  // slot actually executed (rte8d may swap within a cell)
};

}  // namespace

EpisodeLog run_episode(Algo algo, const Repertoires& reps, const Maze& maze, DamageSpec dmg, std::uint64_t seed,
                       const AdaptParams& params) {
  if (!maze.solvable()) throw std::invalid_argument("run_episode: maze has no path from S to G");
  if (params.max_actions < 0) throw std::invalid_argument("run_episode: max_actions must be non-negative");
  const bool hierarchical = algo == Algo::hte || algo == Algo::perfect_hte;
  if (hierarchical && (!reps.stack || reps.stack->top().empty()))
    throw std::invalid_argument("run_episode: a trained hierarchy is required");
  if (algo == Algo::hte && !reps.patterns) throw std::invalid_argument("run_episode: hte needs a pattern table");
  if (algo == Algo::hte && reps.patterns->by_skill.size() != reps.stack->top().size())
    throw std::invalid_argument("run_episode: pattern table does not match the top layer");
  if (algo == Algo::rte2d && (!reps.flat2d || reps.flat2d->empty()))
    throw std::invalid_argument("run_episode: rte2d needs a flat 2-D repertoire");
  if (algo == Algo::rte8d && (!reps.flat8d || reps.flat8d->empty()))
    throw std::invalid_argument("run_episode: rte8d needs a flat 8-D repertoire");
  if (algo == Algo::aprol_lite) {
    if (reps.aprol.empty()) throw std::invalid_argument("run_episode: aprol needs at least one repertoire");
    for (const auto& r : reps.aprol)
      if (!r.archive || r.archive->empty()) throw std::invalid_argument("run_episode: empty aprol repertoire");
  }

  EpisodeLog log;
  log.algo = algo;
  log.damage = dmg;
  log.seed = seed;
  Rng rng(Rng::mix(seed, dmg.mask()));
  const HexapodModel flat_model(reps.sim);

  std::optional<Pattern> perfect;
  if (algo == Algo::perfect_hte) {
    perfect = perfect_pattern(dmg, *reps.stack);
    if (!perfect)
      std::cerr << "warning: no stored pattern avoids damage " << dmg.name() << "; running without a pattern\n";
  }

  // Action spaces: one for every variant except aprol, which has one per repertoire.
  // Hierarchical variants only plan with skills that can realise a pattern.
  auto has_option = [&](std::size_t slot, std::optional<Pattern> p) {
    if (!reps.patterns) return true;
    const auto& opts = reps.patterns->by_skill[slot];
    if (!p) return !opts.empty();
    return std::any_of(opts.begin(), opts.end(), [&](const PatternOption& o) { return o.pattern == *p; });
  };
  std::vector<ActionSpace> spaces;
  CellGroups groups;
  switch (algo) {
    case Algo::hte:
      spaces.push_back(top_subset(reps.stack->top().elites(), [&](std::size_t i) { return has_option(i, {}); }));
      break;
    case Algo::perfect_hte:
      spaces.push_back(perfect ? top_subset(reps.stack->top().elites(), [&](std::size_t i) { return has_option(i, perfect); })
                               : all_of(reps.stack->top().elites()));
      break;
    case Algo::rte2d: spaces.push_back(all_of(reps.flat2d->elites())); break;
    case Algo::rte8d:
      groups = group_cells(*reps.flat8d);
      spaces.push_back(all_of(groups.representatives));
      break;
    case Algo::aprol_lite:
      for (const auto& r : reps.aprol) spaces.push_back(all_of(r.archive->elites()));
      break;
  }
  std::vector<TransitionModel> transitions(spaces.size(), TransitionModel(params.transition_gp));
  std::vector<std::vector<double>> aprol_history(spaces.size());

  auto prior = std::make_shared<PriorTable>();
  if (algo == Algo::hte) {
    const auto& skills = reps.stack->top().elites();
    for (std::size_t s = 0; s < skills.size(); ++s)
      for (const auto& o : reps.patterns->by_skill[s]) prior->values[eps_input(skills[s], o.pattern, params)] =
          o.prior_epsilon;
  }
  GPModel eps_gp(2 + kLegs, params.epsilon_gp, [prior](std::span<const double> x) { return (*prior)(x); });

  Pose2 pose = maze.start();
  while (log.actions_used < params.max_actions && !maze.in_goal(pose)) {
    const std::size_t r = algo == Algo::aprol_lite ? aprol_select(aprol_history, params.aprol_window, rng) : 0;
    const ActionSpace& space = spaces[r];
    TransitionModel& tm = transitions[r];

    // HTE ranks nearby skills by the best posterior epsilon over their patterns.
    std::function<double(std::size_t)> scorer;
    if (algo == Algo::hte)
      scorer = [&](std::size_t a) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& o : reps.patterns->by_skill[space.source[a]])
          best = std::max(best, eps_gp.predict(eps_input(space.skills[a], o.pattern, params)).mean);
        return best;
      };
    const auto actions = sample_actions(space, params, rng, scorer);

    // Hierarchical variants fix each candidate's pattern before planning (the
    // epsilon GP does not change in between, so this is the choice UCB would
    // make after planning) and predict from that pattern's undamaged realisation.
    std::vector<const PatternOption*> option(actions.size(), nullptr);
    std::vector<Pose2> base(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const std::size_t a = actions[i];
      base[i] = skill_pose(space.skills[a]);
      if (!hierarchical || !reps.patterns) continue;
      const auto& opts = reps.patterns->by_skill[space.source[a]];
      if (opts.empty()) continue;
      if (algo == Algo::hte) {
        std::vector<std::vector<double>> inputs;
        for (const auto& o : opts) inputs.push_back(eps_input(space.skills[a], o.pattern, params));
        option[i] = &opts[ucb_select(eps_gp, inputs, params.beta, rng)];
      } else if (perfect) {
        auto it = std::find_if(opts.begin(), opts.end(), [&](const PatternOption& o) { return o.pattern == *perfect; });
        if (it != opts.end()) option[i] = &*it;
      }
      if (option[i]) base[i] = option[i]->realised;
    }
    std::vector<Pose2> predicted;
    predicted.reserve(actions.size());
    for (const Pose2& b : base) predicted.push_back(tm.predict(b));
    const PlanResult plan = mcts_plan(maze, pose, predicted, params.mcts, rng);
    const Elite& planned = space.skills[actions[plan.action]];
    const std::size_t chosen = space.source[actions[plan.action]];

    Realisation real;
    real.slot = chosen;
    const Elite* executed_skill = &planned;
    switch (algo) {
      case Algo::hte:
      case Algo::perfect_hte: {
        if (algo == Algo::perfect_hte) real.pattern = perfect;
        else if (option[plan.action]) real.pattern = option[plan.action]->pattern;
        const TopExecution ex = reps.stack->exec_top(planned, real.pattern, dmg);
        real.executed = ex.displacement;
        real.fallback = ex.fallback;
        break;
      }
      case Algo::rte2d:
      case Algo::aprol_lite:
        real.executed = run_flat(flat_model, planned.genotype, dmg).displacement;
        break;
      case Algo::rte8d: {
        const auto& slots = groups.slots[chosen];
        const auto& elites = reps.flat8d->elites();
        std::vector<std::vector<double>> inputs;
        for (std::size_t s : slots) inputs.push_back(eps_input(elites[s], *elites[s].secondary, params));
        real.slot = slots[ucb_select(eps_gp, inputs, params.beta, rng)];
        executed_skill = &elites[real.slot];
        real.pattern = executed_skill->secondary;
        real.executed = run_flat(flat_model, executed_skill->genotype, dmg).displacement;
        break;
      }
    }

    const Pose2 desired = skill_pose(*executed_skill);
    const Motion m = apply_motion(maze, pose, real.executed);
    const double eps = score(real.executed, desired, params);

    if (real.pattern && (algo == Algo::hte || algo == Algo::rte8d))
      eps_gp.update(eps_input(*executed_skill, *real.pattern, params), eps);
    tm.update(base[plan.action], real.executed);
    if (algo == Algo::aprol_lite) aprol_history[r].push_back(eps);

    StepRecord rec;
    rec.step = log.actions_used;
    rec.skill = desired;
    rec.pattern = real.pattern;
    rec.predicted = predicted[plan.action];
    rec.executed = real.executed;
    rec.epsilon = eps;
    rec.eps_clamped = floor_active(desired, params);
    rec.pose = m.to;
    rec.collided = m.collided;
    rec.fallback = real.fallback;
    rec.repertoire = static_cast<int>(r);
    log.steps.push_back(rec);
    ++log.actions_used;
    pose = m.to;
  }
  log.success = maze.in_goal(pose);
  return log;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_episode_csv(std::ostream& os, const EpisodeLog& log) {
  os << "step,skill_x,skill_y,skill_yaw,pattern,pred_x,pred_y,pred_yaw,exec_x,exec_y,exec_yaw,epsilon,eps_clamped,"
        "pose_x,pose_y,pose_yaw,collided,fallback,repertoire\n";
  for (const auto& s : log.steps) {
    os << s.step << ',' << num(s.skill.x) << ',' << num(s.skill.y) << ',' << num(s.skill.yaw) << ','
       << (s.pattern ? s.pattern->str() : std::string("none")) << ',' << num(s.predicted.x) << ','
       << num(s.predicted.y) << ',' << num(s.predicted.yaw) << ',' << num(s.executed.x) << ','
       << num(s.executed.y) << ',' << num(s.executed.yaw) << ',' << num(s.epsilon) << ',' << int(s.eps_clamped)
       << ',' << num(s.pose.x) << ',' << num(s.pose.y) << ',' << num(s.pose.yaw) << ',' << int(s.collided) << ','
       << int(s.fallback) << ',' << s.repertoire << '\n';
  }
}

void write_summary_csv(std::ostream& os, const EpisodeLog& log) {
  os << "algo,damage,seed,actions_used,success\n";
  os << algo_name(log.algo) << ',' << log.damage.name() << ',' << log.seed << ',' << log.actions_used << ','
     << int(log.success) << '\n';
}

}  // namespace hte
