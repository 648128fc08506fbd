#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hte/archive.hpp"
#include "hte/hierarchy.hpp"
#include "hte/rng.hpp"

namespace hte {

struct EvoParams {
  std::size_t population = 200;
  double mutation_rate = 0.1;
  double eta = 10.0;
  std::size_t budget = 10000;  // total evaluations, including the random seed batch
  std::uint64_t seed = 1;
  std::size_t genotype_size = 6;
  unsigned jobs = 1;

  void validate() const;
};

struct Evaluation {
  double fitness = 0.0;
  std::vector<double> primary;
  std::optional<Pattern> secondary;
  double yaw = 0.0;
};

/// Returns nullopt (or throws) when the genotype cannot be evaluated.
using Evaluator = std::function<std::optional<Evaluation>(const Genotype&)>;
using Progress = std::function<void(std::size_t evaluations)>;

struct RunStats {
  std::size_t evaluations = 0;
  std::size_t failures = 0;
  std::size_t inserted = 0;
};

/// Bounded polynomial mutation on [0, 1], applied gene-wise with probability `rate`.
Genotype polynomial_mutation(const Genotype& g, double rate, double eta, Rng& rng);

Genotype random_genotype(std::size_t n, Rng& rng);

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

/// MAP-Elites: a batch of random genotypes, then batches of mutated copies of
/// uniformly chosen elites until the budget is spent. Candidates are generated
/// sequentially from the seed, evaluated in parallel and inserted in candidate
/// order, so the result does not depend on `jobs`. `progress` fires after every
/// `progress_every`-th evaluation.
template <class Archive>
RunStats map_elites_run(Archive& archive, const Evaluator& evaluate, const EvoParams& p, const Progress& progress = {},
                        std::size_t progress_every = 1000) {
  p.validate();
  Rng rng(p.seed);
  RunStats stats;
  while (stats.evaluations < p.budget) {
    const std::size_t n = std::min(p.population, p.budget - stats.evaluations);
    std::vector<Genotype> batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (archive.empty() || stats.evaluations == 0) {
        batch.push_back(random_genotype(p.genotype_size, rng));
      } else {
        const Elite& parent = archive.elites()[rng.index(archive.size())];
        batch.push_back(polynomial_mutation(parent.genotype, p.mutation_rate, p.eta, rng));
      }
    }
    std::vector<std::optional<Evaluation>> results(n);
    parallel_for(n, p.jobs, [&](std::size_t i) {
      try {
        results[i] = evaluate(batch[i]);
      } catch (const std::exception&) {
        results[i].reset();
      }
    });
    for (std::size_t i = 0; i < n; ++i) {
      ++stats.evaluations;
      if (!results[i]) {
        ++stats.failures;
      } else {
        Elite e{std::move(batch[i]), results[i]->fitness, std::move(results[i]->primary), results[i]->secondary,
                results[i]->yaw};
        if (archive.insert(std::move(e))) ++stats.inserted;
      }
      if (progress && progress_every > 0 && stats.evaluations % progress_every == 0) progress(stats.evaluations);
    }
  }
  return stats;
}

struct LayerSettings {
  std::size_t budget;
  double mutation_rate;
};

/// Settings for bottom-up hierarchy training and for the flat baselines.
struct TrainParams {
  LayerSettings bottom{20000, 0.17};
  LayerSettings middle{600000, 0.11};
  LayerSettings top{120000, 0.14};
  LayerSettings flat{200000, 0.14};
  double l_bottom = 0.01;
  double l_middle = 0.05;
  std::size_t population = 200;
  double eta = 10.0;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  SimConstants sim;
  double rho = 0.15;
};

/// Evaluator of the bottom layer: leg descriptor and effort.
Evaluator bottom_evaluator(const SimConstants& sim);
/// Evaluator of the middle layer on a stack whose bottom layer is set.
Evaluator middle_evaluator(const HBRStack& stack);
/// Evaluator of the top layer on a stack whose bottom and middle layers are set.
Evaluator top_evaluator(const HBRStack& stack);

enum class FlatVariant { bd2, bd8 };

/// Evaluator of a 36-gene flat controller, optionally under a damage prior.
Evaluator flat_evaluator(const HexapodModel& model, FlatVariant variant, DamageSpec prior = {});

GridArchive make_flat_archive(FlatVariant variant);

/// Single layers; each throws std::runtime_error if it ends up empty.
DistArchive train_bottom(const TrainParams& p, const Progress& progress = {});
DistArchive train_middle(const HBRStack& stack, const TrainParams& p, const Progress& progress = {});
GridArchive train_top(const HBRStack& stack, const TrainParams& p, const Progress& progress = {});

/// Trains bottom, middle and top layers in sequence.
HBRStack train_hierarchy(const TrainParams& p, const Progress& progress = {});

GridArchive train_flat(FlatVariant variant, const TrainParams& p, DamageSpec prior = {});

}  // namespace hte
