#include "hte/archive.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace hte {

namespace {

int bin(double v, Bounds b, int n) {
  const double t = (v - b.lo) / (b.hi - b.lo) * n;
  if (!(t >= 0.0)) return 0;  // also catches NaN
  if (t >= n) return n - 1;
  return static_cast<int>(std::floor(t));
}

}  // namespace

GridArchive::GridArchive(std::vector<int> dims, std::vector<Bounds> bounds, bool pattern_axis)
    : dims_(std::move(dims)), bounds_(std::move(bounds)), pattern_axis_(pattern_axis) {
  if (dims_.empty() || dims_.size() != bounds_.size())
    throw std::invalid_argument("GridArchive: dims and bounds must be non-empty and match");
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i] <= 0) throw std::invalid_argument("GridArchive: non-positive axis size");
    if (!(bounds_[i].hi > bounds_[i].lo)) throw std::invalid_argument("GridArchive: empty bounds");
  }
}

std::size_t GridArchive::capacity() const {
  std::size_t n = pattern_axis_ ? 64 : 1;
  for (int d : dims_) n *= static_cast<std::size_t>(d);
  return n;
}

std::vector<int> GridArchive::cell_coords(std::span<const double> primary) const {
  if (primary.size() != dims_.size()) throw std::invalid_argument("GridArchive: descriptor dimension mismatch");
  std::vector<int> c(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) c[i] = bin(primary[i], bounds_[i], dims_[i]);
  return c;
}

std::size_t GridArchive::cell_of(std::span<const double> primary, std::optional<Pattern> secondary) const {
  const auto c = cell_coords(primary);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) idx = idx * static_cast<std::size_t>(dims_[i]) + static_cast<std::size_t>(c[i]);
  if (pattern_axis_) {
    if (!secondary) throw std::invalid_argument("GridArchive: pattern axis needs a secondary descriptor");
    idx = idx * 64 + secondary->mask();
  }
  return idx;
}

bool GridArchive::insert(Elite e) {
  const std::size_t cell = cell_of(e.primary, e.secondary);
  auto it = cell_slot_.find(cell);
  if (it == cell_slot_.end()) {
    cell_slot_.emplace(cell, elites_.size());
    slot_cell_.push_back(cell);
    elites_.push_back(std::move(e));
    return true;
  }
  Elite& cur = elites_[it->second];
  if (e.fitness > cur.fitness) {
    cur = std::move(e);
    return true;
  }
  return false;
}

const Elite* GridArchive::at_cell(std::size_t cell) const {
  auto it = cell_slot_.find(cell);
  return it == cell_slot_.end() ? nullptr : &elites_[it->second];
}

DistArchive::DistArchive(double l, std::size_t primary_dims, bool has_secondary)
    : l_(l), dims_(primary_dims), has_secondary_(has_secondary) {
  if (!(l > 0.0)) throw std::invalid_argument("DistArchive: l must be positive");
  if (primary_dims == 0) throw std::invalid_argument("DistArchive: need at least one primary dim");
}

std::size_t DistArchive::KeyHash::operator()(const CellKey& k) const {
  std::size_t h = 1469598103934665603ULL;
  for (auto v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ULL;
  return h;
}

DistArchive::CellKey DistArchive::key_of(std::span<const double> primary) const {
  CellKey k(dims_);
  for (std::size_t i = 0; i < dims_; ++i) k[i] = static_cast<std::int64_t>(std::floor(primary[i] / l_));
  return k;
}

void DistArchive::check(const Elite& e) const {
  if (e.primary.size() != dims_) throw std::invalid_argument("DistArchive: descriptor dimension mismatch");
  if (e.secondary.has_value() != has_secondary_) throw std::invalid_argument("DistArchive: secondary descriptor mismatch");
}

double DistArchive::distance(const Elite& a, const Elite& b) const {
  double d2 = primary_distance_sq(a.primary, b.primary);
  if (a.secondary && b.secondary) d2 += std::popcount(static_cast<unsigned>(a.secondary->mask() ^ b.secondary->mask()));
  return std::sqrt(d2);
}

bool DistArchive::insert(Elite e) {
  check(e);
  const CellKey base = key_of(e.primary);
  // Any descriptor within l differs by at most one cell per primary axis.
  std::vector<std::size_t> near;
  CellKey probe = base;
  const std::size_t combos = static_cast<std::size_t>(std::pow(3.0, static_cast<double>(dims_)));
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t r = c;
    for (std::size_t i = 0; i < dims_; ++i) {
      probe[i] = base[i] + static_cast<std::int64_t>(r % 3) - 1;
      r /= 3;
    }
    auto it = cells_.find(probe);
    if (it == cells_.end()) continue;
    for (std::size_t id : it->second)
      if (distance(e, elites_[id]) <= l_) near.push_back(id);
  }
  if (near.empty()) {
    cells_[base].push_back(elites_.size());
    elites_.push_back(std::move(e));
    return true;
  }
  if (near.size() > 1) return false;
  const std::size_t id = near.front();
  if (!(e.fitness > elites_[id].fitness)) return false;
  const CellKey old = key_of(elites_[id].primary);
  if (old != base) {
    auto& v = cells_[old];
    v.erase(std::find(v.begin(), v.end(), id));
    if (v.empty()) cells_.erase(old);
    cells_[base].push_back(id);
  }
  elites_[id] = std::move(e);
  return true;
}

double primary_distance_sq(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t nearest_primary(std::span<const Elite> elites, std::span<const double> q) {
  if (elites.empty()) throw std::invalid_argument("nearest_primary: empty archive");
  std::size_t best = 0;
  double best_d = primary_distance_sq(elites[0].primary, q);
  for (std::size_t i = 1; i < elites.size(); ++i) {
    const double d = primary_distance_sq(elites[i].primary, q);
    if (d < best_d || (d == best_d && elites[i].fitness > elites[best].fitness)) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

std::optional<std::size_t> nearest_with_pattern(std::span<const Elite> elites, std::span<const double> q,
                                                Pattern pattern, double radius) {
  std::optional<std::size_t> best;
  double best_d = 0.0;
  for (std::size_t i = 0; i < elites.size(); ++i) {
    if (elites[i].secondary != pattern) continue;
    const double d = primary_distance_sq(elites[i].primary, q);
    if (!best || d < best_d || (d == best_d && elites[i].fitness > elites[*best].fitness)) {
      best = i;
      best_d = d;
    }
  }
  if (best && std::sqrt(best_d) <= radius) return best;
  return std::nullopt;
}

PrimaryIndex::PrimaryIndex(std::span<const Elite> elites, std::optional<Pattern> only) {
  points_.reserve(elites.size());
  fitness_.reserve(elites.size());
  for (std::size_t i = 0; i < elites.size(); ++i) {
    points_.push_back(elites[i].primary);
    fitness_.push_back(elites[i].fitness);
    if (!only || elites[i].secondary == only) ids_.push_back(i);
  }
  if (ids_.empty()) return;
  dims_ = points_[ids_.front()].size();
  nodes_.reserve(ids_.size());
  std::vector<std::size_t> work = ids_;
  root_ = build(work, 0, work.size(), 0);
}

int PrimaryIndex::build(std::vector<std::size_t>& ids, std::size_t lo, std::size_t hi, int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % static_cast<int>(dims_);
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(ids.begin() + static_cast<std::ptrdiff_t>(lo), ids.begin() + static_cast<std::ptrdiff_t>(mid),
                   ids.begin() + static_cast<std::ptrdiff_t>(hi), [&](std::size_t a, std::size_t b) {
                     const double va = points_[a][static_cast<std::size_t>(axis)];
                     const double vb = points_[b][static_cast<std::size_t>(axis)];
                     return va < vb || (va == vb && a < b);
                   });
  const int me = static_cast<int>(nodes_.size());
  nodes_.push_back({ids[mid], axis});
  const int left = build(ids, lo, mid, depth + 1);
  const int right = build(ids, mid + 1, hi, depth + 1);
  nodes_[static_cast<std::size_t>(me)].left = left;
  nodes_[static_cast<std::size_t>(me)].right = right;
  return me;
}

bool PrimaryIndex::better(std::size_t cand, double d, std::size_t best, double best_d) const {
  if (d != best_d) return d < best_d;
  if (fitness_[cand] != fitness_[best]) return fitness_[cand] > fitness_[best];
  return cand < best;
}

void PrimaryIndex::search(int node, std::span<const double> q, std::size_t& best, double& best_d) const {
  if (node < 0) return;
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  const auto& p = points_[n.id];
  const double d = primary_distance_sq(p, q);
  if (best == SIZE_MAX || better(n.id, d, best, best_d)) {
    best = n.id;
    best_d = d;
  }
  const double diff = q[static_cast<std::size_t>(n.axis)] - p[static_cast<std::size_t>(n.axis)];
  const int near = diff < 0 ? n.left : n.right;
  const int far = diff < 0 ? n.right : n.left;
  search(near, q, best, best_d);
  // Equal distances on the far side can still win the tie-break.
  if (diff * diff <= best_d) search(far, q, best, best_d);
}

std::pair<std::size_t, double> PrimaryIndex::nearest(std::span<const double> q) const {
  if (ids_.empty()) throw std::invalid_argument("PrimaryIndex: empty index");
  if (q.size() != dims_) throw std::invalid_argument("PrimaryIndex: query dimension mismatch");
  std::size_t best = SIZE_MAX;
  double best_d = std::numeric_limits<double>::infinity();
  search(root_, q, best, best_d);
  return {best, best_d};
}

Projection project_effective(std::span<const Elite> elites, int cells_per_axis, Bounds x, Bounds y) {
  std::map<std::pair<int, int>, double> best;
  for (const Elite& e : elites) {
    if (e.primary.size() < 2) throw std::invalid_argument("project_effective: need two primary dims");
    const std::pair<int, int> key{bin(e.primary[0], x, cells_per_axis), bin(e.primary[1], y, cells_per_axis)};
    auto [it, fresh] = best.emplace(key, e.fitness);
    if (!fresh) it->second = std::max(it->second, e.fitness);
  }
  Projection p;
  p.effective_size = best.size();
  if (!best.empty()) {
    double s = 0.0;
    for (const auto& [k, f] : best) s += f;
    p.mean_fitness = s / static_cast<double>(best.size());
  }
  return p;
}

}  // namespace hte
