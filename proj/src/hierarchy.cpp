#include "hte/hierarchy.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace hte {

GridArchive make_top_archive() { return GridArchive({100, 100}, {{-1.8, 1.8}, {-1.8, 1.8}}); }

HBRStack::HBRStack(DistArchive bottom, SimConstants sim, double rho)
    : bottom_(std::move(bottom)), middle_(0.05, 3, true), top_(make_top_archive()), model_(sim), rho_(rho) {
  if (bottom_.empty()) throw std::invalid_argument("HBRStack: bottom layer has no elites");
  if (bottom_.primary_dims() != 3) throw std::invalid_argument("HBRStack: bottom descriptors must be 3-D");
  bottom_index_ = PrimaryIndex(bottom_.elites());
  bottom_signals_.reserve(bottom_.size());
  for (const Elite& e : bottom_.elites()) bottom_signals_.push_back(leg_signal(LegParams::from(e.genotype), sim));
}

HBRStack::HBRStack(DistArchive bottom, DistArchive middle, GridArchive top, SimConstants sim, double rho)
    : HBRStack(std::move(bottom), sim, rho) {
  set_middle(std::move(middle));
  set_top(std::move(top));
}

void HBRStack::set_middle(DistArchive middle) {
  if (middle.empty()) throw std::invalid_argument("HBRStack: middle layer has no elites");
  if (middle.primary_dims() != 3 || !middle.has_secondary())
    throw std::invalid_argument("HBRStack: middle layer needs 3 primary dims and contact bits");
  middle_ = std::move(middle);
  index_middle();
}

void HBRStack::set_top(GridArchive top) {
  if (top.dims().size() != 2) throw std::invalid_argument("HBRStack: top layer must be a 2-D grid");
  top_ = std::move(top);
}

void HBRStack::index_middle() {
  middle_index_ = PrimaryIndex(middle_.elites());
  for (Pattern p : Pattern::all()) pattern_index_[p.mask()] = PrimaryIndex(middle_.elites(), p);
}

std::array<std::size_t, kLegs> HBRStack::resolve_legs(std::span<const double> g) const {
  if (g.size() != kMiddleGenes) throw std::invalid_argument("resolve_legs: middle genotype must have 18 values");
  std::array<std::size_t, kLegs> slots{};
  for (std::size_t l = 0; l < slots.size(); ++l) slots[l] = bottom_index_.nearest(g.subspan(3 * l, 3)).first;
  return slots;
}

StepOutcome HBRStack::run_legs(const std::array<std::size_t, kLegs>& slots, DamageSpec dmg) const {
  std::array<LegSignals, kLegs> signals;
  for (std::size_t l = 0; l < signals.size(); ++l) signals[l] = bottom_signals_[slots[l]];
  return model_.gait_step(signals, dmg);
}

StepOutcome HBRStack::run_middle_elite(std::size_t slot, DamageSpec dmg) const {
  return run_legs(resolve_legs(middle_.elites().at(slot).genotype), dmg);
}

std::pair<std::size_t, bool> HBRStack::select_middle(std::span<const double> q, std::optional<Pattern> pattern) const {
  if (middle_.empty()) throw std::invalid_argument("exec_middle: middle layer is empty");
  if (pattern) {
    const PrimaryIndex& idx = pattern_index_[pattern->mask()];
    if (!idx.empty()) {
      const auto [slot, d2] = idx.nearest(q);
      if (std::sqrt(d2) <= rho_) return {slot, false};
    }
  }
  return {middle_index_.nearest(q).first, pattern.has_value()};
}

MiddleExecution HBRStack::exec_middle(std::span<const double> q, std::optional<Pattern> pattern, DamageSpec dmg) const {
  MiddleExecution out;
  std::tie(out.middle_slot, out.fallback) = select_middle(q, pattern);
  out.outcome = run_middle_elite(out.middle_slot, dmg);
  return out;
}

TopExecution HBRStack::exec_top(std::span<const double> g, std::optional<Pattern> pattern, DamageSpec dmg) const {
  if (g.size() != kTopGenes) throw std::invalid_argument("exec_top: skill genotype must have 9 values");
  TopExecution out;
  Pose2 pose;
  for (std::size_t k = 0; k < 3; ++k) {
    out.steps[k] = exec_middle(g.subspan(3 * k, 3), pattern, dmg);
    out.middle_lookups += 1;
    out.bottom_lookups += kLegs;
    out.fallback = out.fallback || out.steps[k].fallback;
    pose = se2_compose(pose, out.steps[k].outcome.displacement);
  }
  out.displacement = pose;
  return out;
}

std::vector<Pattern> HBRStack::feasible_patterns() const {
  std::vector<Pattern> out;
  for (Pattern p : Pattern::all())
    if (!pattern_index_[p.mask()].empty()) out.push_back(p);
  return out;
}

std::size_t HBRStack::pattern_support(Pattern p) const { return pattern_index_[p.mask()].size(); }

std::vector<ModulationRow> modulate_scan(const HBRStack& stack) {
  std::vector<ModulationRow> rows;
  const auto patterns = stack.feasible_patterns();
  const auto& skills = stack.top().elites();
  rows.reserve(skills.size() * patterns.size());
  for (std::size_t s = 0; s < skills.size(); ++s) {
    for (Pattern p : patterns) {
      const TopExecution ex = stack.exec_top(skills[s], p, DamageSpec{});
      ModulationRow r;
      r.skill = s;
      r.pattern = p;
      r.achieved = ex.displacement;
      r.feasible = !ex.fallback;
      r.error = std::hypot(ex.displacement.x - skills[s].primary[0], ex.displacement.y - skills[s].primary[1]);
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<std::size_t> reproducing_pattern_counts(const HBRStack& stack, std::span<const ModulationRow> rows,
                                                    double tolerance) {
  std::vector<std::size_t> counts(stack.top().size(), 0);
  for (const auto& r : rows)
    if (r.feasible && r.error <= tolerance) ++counts.at(r.skill);
  return counts;
}

}  // namespace hte
