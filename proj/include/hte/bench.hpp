#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hte/adapt.hpp"
#include "hte/config.hpp"

namespace hte {

/// Damage priors of the APROL-lite repertoires: intact, then each single leg.
std::vector<DamageSpec> aprol_priors();

/// Owning counterpart of Repertoires, as stored in one repertoire directory.
struct RepertoireSet {
  std::optional<HBRStack> stack;
  std::optional<PatternTable> patterns;
  std::optional<GridArchive> flat2d;
  std::optional<GridArchive> flat8d;
  std::vector<std::pair<DamageSpec, GridArchive>> aprol;
  SimConstants sim;

  Repertoires view() const;
};

struct LayerSelection {
  bool bottom = true, middle = true, top = true, flat2d = true, flat8d = true, aprol = true;
  /// Comma-separated subset of bottom,middle,top,flat2d,flat8d,aprol, or "all" / "hierarchy" / "flat".
  static std::optional<LayerSelection> parse(const std::string& text);
};

using Log = std::function<void(const std::string&)>;

/// Trains the selected repertoires into `dir` (created if needed). Layers not
/// selected but needed by a selected upper layer are loaded from `dir`.
void train_repertoires(const std::string& dir, const Config& cfg, LayerSelection layers, const Log& log = {});

/// Loads what the listed variants need; throws before any episode runs if a file is missing.
RepertoireSet load_repertoires(const std::string& dir, const Config& cfg, const std::vector<Algo>& algos);

struct EpisodeRow {
  Algo algo = Algo::hte;
  DamageSpec damage;
  std::size_t replicate = 0;  // repertoire index
  std::uint64_t seed = 0;
  int actions = 0;
  bool success = false;
};

struct AggregateRow {
  Algo algo = Algo::hte;
  std::string damage;  // damage name, or "all" pooled over damages
  std::size_t n = 0;
  double median = 0, p25 = 0, p75 = 0;
  double failure_fraction = 0;
};

struct BenchPlan {
  std::vector<Algo> algos;
  std::vector<DamageSpec> damages;
  int episodes = 20;
  unsigned jobs = 1;
  AdaptParams adapt;
};

std::uint64_t episode_seed(std::size_t replicate, int episode);

/// Every variant x damage x repertoire x episode seed. Rows come back in that
/// nesting order whatever `jobs` is.
std::vector<EpisodeRow> run_bench(const Maze& maze, const std::vector<const RepertoireSet*>& sets, const BenchPlan& plan,
                                  const Log& log = {});

std::vector<AggregateRow> aggregate(const std::vector<EpisodeRow>& rows);

void write_episode_rows(std::ostream& os, const std::vector<EpisodeRow>& rows);
std::vector<EpisodeRow> read_episode_rows(std::istream& is);
void write_aggregate(std::ostream& os, const std::vector<AggregateRow>& rows);

/// Box plot of per-replication medians across damages, one box per variant.
std::string actions_boxplot(const std::vector<EpisodeRow>& rows);
/// Failure percentage per variant.
std::string failure_bars(const std::vector<EpisodeRow>& rows);

}  // namespace hte
