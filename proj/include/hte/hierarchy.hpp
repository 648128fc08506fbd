#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hte/archive.hpp"
#include "hte/hexasim.hpp"

namespace hte {

constexpr std::size_t kMiddleGenes = 18;  // 6 legs x 3 bottom-descriptor coordinates
constexpr std::size_t kTopGenes = 9;      // 3 steps x 3 middle-primary coordinates

/// Default top-layer grid: 100 x 100 over [-1.8, 1.8]^2 body lengths.
GridArchive make_top_archive();

struct MiddleExecution {
  StepOutcome outcome;
  std::size_t middle_slot = 0;
  bool fallback = false;  // a pattern was requested but no elite within rho had it
};

struct TopExecution {
  Pose2 displacement;
  std::array<MiddleExecution, 3> steps;
  bool fallback = false;
  std::size_t middle_lookups = 0;
  std::size_t bottom_lookups = 0;
};

/// Three chained repertoires: leg controllers, one-second walking steps (with
/// contact bits as secondary descriptor) and three-second skills. Lower layers
/// are frozen once set; lookup indices and leg signals are precomputed.
class HBRStack {
 public:
  HBRStack(DistArchive bottom, SimConstants sim = {}, double rho = 0.15);
  HBRStack(DistArchive bottom, DistArchive middle, GridArchive top, SimConstants sim = {}, double rho = 0.15);

  void set_middle(DistArchive middle);
  void set_top(GridArchive top);

  const DistArchive& bottom() const { return bottom_; }
  const DistArchive& middle() const { return middle_; }
  const GridArchive& top() const { return top_; }
  const HexapodModel& model() const { return model_; }
  double rho() const { return rho_; }

  /// Bottom slots chosen for the six legs of an 18-value middle genotype.
  std::array<std::size_t, kLegs> resolve_legs(std::span<const double> middle_genotype) const;
  StepOutcome run_legs(const std::array<std::size_t, kLegs>& bottom_slots, DamageSpec dmg) const;
  StepOutcome run_middle_elite(std::size_t middle_slot, DamageSpec dmg) const;

  /// Middle slot chosen for a request, and whether a requested pattern fell back.
  std::pair<std::size_t, bool> select_middle(std::span<const double> q, std::optional<Pattern> pattern) const;
  MiddleExecution exec_middle(std::span<const double> q, std::optional<Pattern> pattern, DamageSpec dmg) const;
  TopExecution exec_top(std::span<const double> top_genotype, std::optional<Pattern> pattern, DamageSpec dmg) const;
  TopExecution exec_top(const Elite& skill, std::optional<Pattern> pattern, DamageSpec dmg) const {
    return exec_top(skill.genotype, pattern, dmg);
  }

  /// Contact patterns that occur in the middle archive, ascending by mask.
  std::vector<Pattern> feasible_patterns() const;
  std::size_t pattern_support(Pattern p) const;

 private:
  void index_middle();

  DistArchive bottom_;
  DistArchive middle_;
  GridArchive top_;
  HexapodModel model_;
  double rho_;
  PrimaryIndex bottom_index_;
  std::vector<LegSignals> bottom_signals_;
  PrimaryIndex middle_index_;
  std::array<PrimaryIndex, 64> pattern_index_;
};

struct ModulationRow {
  std::size_t skill = 0;  // top-archive slot
  Pattern pattern;
  Pose2 achieved;
  bool feasible = false;  // every step realised the pattern without fallback
  double error = 0.0;     // distance between achieved and stored (x, y)
};

/// Re-executes every top skill under every pattern present in the middle
/// archive, undamaged, one pattern for all three steps.
std::vector<ModulationRow> modulate_scan(const HBRStack& stack);

/// Per skill: number of patterns that are feasible and reproduce (x, y) within `tolerance`.
std::vector<std::size_t> reproducing_pattern_counts(const HBRStack& stack, std::span<const ModulationRow> rows,
                                                    double tolerance);

}  // namespace hte
