#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hte/hexasim.hpp"

namespace hte {

using Genotype = std::vector<double>;

/// A stored solution. `yaw` is the heading change measured when the elite was
/// evaluated; the top layer needs it because its descriptor keeps only (x, y).
struct Elite {
  Genotype genotype;
  double fitness = 0.0;
  std::vector<double> primary;
  std::optional<Pattern> secondary;
  double yaw = 0.0;

  friend bool operator==(const Elite&, const Elite&) = default;
};

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// Grid-discretised repertoire. With `pattern_axis` set, the six contact bits
/// form an extra 64-slot axis, which gives the flat 8-D container.
class GridArchive {
 public:
  GridArchive(std::vector<int> dims, std::vector<Bounds> bounds, bool pattern_axis = false);

  /// Stores `e` if its cell is empty or it is strictly fitter than the occupant.
  bool insert(Elite e);

  std::size_t cell_of(std::span<const double> primary, std::optional<Pattern> secondary) const;
  std::vector<int> cell_coords(std::span<const double> primary) const;

  const std::vector<Elite>& elites() const { return elites_; }
  std::size_t size() const { return elites_.size(); }
  bool empty() const { return elites_.empty(); }
  std::size_t capacity() const;
  const Elite* at_cell(std::size_t cell) const;
  /// Cell index of the elite stored in slot i.
  std::size_t cell_of_slot(std::size_t i) const { return slot_cell_[i]; }

  const std::vector<int>& dims() const { return dims_; }
  const std::vector<Bounds>& bounds() const { return bounds_; }
  bool pattern_axis() const { return pattern_axis_; }

 private:
  std::vector<int> dims_;
  std::vector<Bounds> bounds_;
  bool pattern_axis_;
  std::vector<Elite> elites_;
  std::vector<std::size_t> slot_cell_;
  std::unordered_map<std::size_t, std::size_t> cell_slot_;
};

/// Distance-threshold ("l-value") repertoire over the concatenation of the
/// primary descriptor and the contact bits.
class DistArchive {
 public:
  DistArchive(double l, std::size_t primary_dims, bool has_secondary);

  /// Stores `e` when no stored descriptor lies within l; when exactly one does,
  /// `e` replaces it if strictly fitter. With two or more neighbours within l
  /// the candidate is rejected, since replacing either could break the spacing.
  bool insert(Elite e);

  double distance(const Elite& a, const Elite& b) const;

  const std::vector<Elite>& elites() const { return elites_; }
  std::size_t size() const { return elites_.size(); }
  bool empty() const { return elites_.empty(); }
  double l() const { return l_; }
  std::size_t primary_dims() const { return dims_; }
  bool has_secondary() const { return has_secondary_; }

 private:
  using CellKey = std::vector<std::int64_t>;
  struct KeyHash {
    std::size_t operator()(const CellKey& k) const;
  };

  CellKey key_of(std::span<const double> primary) const;
  void check(const Elite& e) const;

  double l_;
  std::size_t dims_;
  bool has_secondary_;
  std::vector<Elite> elites_;
  std::unordered_map<CellKey, std::vector<std::size_t>, KeyHash> cells_;
};

double primary_distance_sq(std::span<const double> a, std::span<const double> b);

/// Nearest elite by primary descriptor only. Ties go to the fitter elite, then
/// to the earlier slot. Linear scan; throws std::invalid_argument when empty.
std::size_t nearest_primary(std::span<const Elite> elites, std::span<const double> q);

/// Nearest elite carrying `pattern`, if its primary distance is within `radius`.
std::optional<std::size_t> nearest_with_pattern(std::span<const Elite> elites, std::span<const double> q,
                                                Pattern pattern, double radius);

/// Static k-d tree over the primary descriptors of a frozen elite list, with the
/// same tie-breaking as nearest_primary. Optionally restricted to one pattern.
class PrimaryIndex {
 public:
  PrimaryIndex() = default;
  explicit PrimaryIndex(std::span<const Elite> elites, std::optional<Pattern> only = std::nullopt);

  bool empty() const { return ids_.empty(); }
  std::size_t size() const { return ids_.size(); }
  /// Returns (slot, squared distance).
  std::pair<std::size_t, double> nearest(std::span<const double> q) const;

 private:
  struct Node {
    std::size_t id;  // slot in the source list
    int axis;
    int left = -1;
    int right = -1;
  };
  int build(std::vector<std::size_t>& ids, std::size_t lo, std::size_t hi, int depth);
  void search(int node, std::span<const double> q, std::size_t& best, double& best_d) const;
  bool better(std::size_t cand, double d, std::size_t best, double best_d) const;

  std::vector<std::vector<double>> points_;  // by slot
  std::vector<double> fitness_;              // by slot
  std::vector<std::size_t> ids_;
  std::vector<Node> nodes_;
  int root_ = -1;
  std::size_t dims_ = 0;
};

struct Projection {
  std::size_t effective_size = 0;
  double mean_fitness = 0.0;
};

/// Bins elites by their first two primary dims, keeping the best per cell.
Projection project_effective(std::span<const Elite> elites, int cells_per_axis, Bounds x, Bounds y);

}  // namespace hte
