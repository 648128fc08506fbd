#include "hte/evolve.hpp"

#include <cmath>

namespace hte {

void EvoParams::validate() const {
  if (population == 0) throw std::invalid_argument("EvoParams: population must be positive");
  if (!(mutation_rate > 0.0 && mutation_rate <= 1.0)) throw std::invalid_argument("EvoParams: mutation rate outside (0,1]");
  if (!(eta > 0.0)) throw std::invalid_argument("EvoParams: eta must be positive");
  if (budget < population) throw std::invalid_argument("EvoParams: budget smaller than population");
  if (genotype_size == 0) throw std::invalid_argument("EvoParams: empty genotype");
}

Genotype polynomial_mutation(const Genotype& g, double rate, double eta, Rng& rng) {
  Genotype out = g;
  const double pw = 1.0 / (eta + 1.0);
  for (double& x : out) {
    if (!(rng.uniform() < rate)) continue;
    const double r = rng.uniform();
    double dq;
    if (r < 0.5) {
      const double xy = 1.0 - x;
      const double val = 2.0 * r + (1.0 - 2.0 * r) * std::pow(xy, eta + 1.0);
      dq = std::pow(val, pw) - 1.0;
    } else {
      const double xy = x;
      const double val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * std::pow(xy, eta + 1.0);
      dq = 1.0 - std::pow(val, pw);
    }
    x = std::clamp(x + dq, 0.0, 1.0);
  }
  return out;
}

Genotype random_genotype(std::size_t n, Rng& rng) {
  Genotype g(n);
  for (double& v : g) v = rng.uniform();
  return g;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
}

Evaluator bottom_evaluator(const SimConstants& sim) {
  return [sim](const Genotype& g) -> std::optional<Evaluation> {
    const LegDescriptor d = leg_descriptor(LegParams::from(g), sim);
    return Evaluation{d.fitness, {d.bd.begin(), d.bd.end()}, std::nullopt, 0.0};
  };
}

Evaluator middle_evaluator(const HBRStack& stack) {
  return [&stack](const Genotype& g) -> std::optional<Evaluation> {
    const StepOutcome o = stack.run_legs(stack.resolve_legs(g), DamageSpec{});
    const auto bd = stack.model().normalize_step(o.displacement);
    return Evaluation{circular_fitness(o.displacement), {bd.begin(), bd.end()}, o.contact, o.displacement.yaw};
  };
}

Evaluator top_evaluator(const HBRStack& stack) {
  return [&stack](const Genotype& g) -> std::optional<Evaluation> {
    const TopExecution ex = stack.exec_top(g, std::nullopt, DamageSpec{});
    const Pose2& d = ex.displacement;
    return Evaluation{circular_fitness(d), {d.x, d.y}, std::nullopt, d.yaw};
  };
}

Evaluator flat_evaluator(const HexapodModel& model, FlatVariant variant, DamageSpec prior) {
  return [&model, variant, prior](const Genotype& g) -> std::optional<Evaluation> {
    const FlatOutcome o = run_flat(model, g, prior);
    const Pose2& d = o.displacement;
    Evaluation e{circular_fitness(d), {d.x, d.y}, std::nullopt, d.yaw};
    if (variant == FlatVariant::bd8) e.secondary = o.step.contact;
    return e;
  };
}

GridArchive make_flat_archive(FlatVariant variant) {
  return GridArchive({100, 100}, {{-1.8, 1.8}, {-1.8, 1.8}}, variant == FlatVariant::bd8);
}

namespace {

EvoParams layer_params(const TrainParams& p, const LayerSettings& s, std::size_t genes, std::uint64_t salt) {
  EvoParams e;
  e.population = p.population;
  e.mutation_rate = s.mutation_rate;
  e.eta = p.eta;
  e.budget = s.budget;
  e.seed = Rng::mix(p.seed, salt);
  e.genotype_size = genes;
  e.jobs = p.jobs;
  return e;
}

}  // namespace

DistArchive train_bottom(const TrainParams& p, const Progress& progress) {
  DistArchive bottom(p.l_bottom, 3, false);
  map_elites_run(bottom, bottom_evaluator(p.sim), layer_params(p, p.bottom, 6, 1), progress);
  if (bottom.empty()) throw std::runtime_error("train_bottom: no elites");
  return bottom;
}

DistArchive train_middle(const HBRStack& stack, const TrainParams& p, const Progress& progress) {
  DistArchive middle(p.l_middle, 3, true);
  map_elites_run(middle, middle_evaluator(stack), layer_params(p, p.middle, kMiddleGenes, 2), progress);
  if (middle.empty()) throw std::runtime_error("train_middle: no elites");
  return middle;
}

GridArchive train_top(const HBRStack& stack, const TrainParams& p, const Progress& progress) {
  GridArchive top = make_top_archive();
  map_elites_run(top, top_evaluator(stack), layer_params(p, p.top, kTopGenes, 3), progress);
  if (top.empty()) throw std::runtime_error("train_top: no elites");
  return top;
}

HBRStack train_hierarchy(const TrainParams& p, const Progress& progress) {
  HBRStack stack(train_bottom(p, progress), p.sim, p.rho);
  stack.set_middle(train_middle(stack, p, progress));
  stack.set_top(train_top(stack, p, progress));
  return stack;
}

GridArchive train_flat(FlatVariant variant, const TrainParams& p, DamageSpec prior) {
  const HexapodModel model(p.sim);
  GridArchive archive = make_flat_archive(variant);
  const std::uint64_t salt = 10 + (variant == FlatVariant::bd8 ? 1 : 0) + 2ULL * prior.mask();
  map_elites_run(archive, flat_evaluator(model, variant, prior), layer_params(p, p.flat, kFlatGenes, salt));
  return archive;
}

}  // namespace hte
