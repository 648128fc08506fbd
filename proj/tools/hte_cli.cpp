#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hte/adapt.hpp"
#include "hte/bench.hpp"
#include "hte/config.hpp"
#include "hte/persist.hpp"
#include "hte/stats.hpp"
#include "hte/svg.hpp"

#ifndef HTE_DATA_DIR
#define HTE_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace hte;

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 1;
  std::size_t budget = 0;
  std::string layers = "all";
  std::vector<std::string> damage;
  std::vector<std::string> algo;
  int max_actions = 80;
  int reps = 0;
  unsigned jobs = 1;
  std::string out = "out";
  std::vector<std::string> repertoires;
  std::string maze = std::string(HTE_DATA_DIR) + "/maze_benchmark.txt";
  std::string input;
  std::vector<std::string> set;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool given(const CLI::App& cmd, const std::string& name) {
  const CLI::Option* opt = cmd.get_option_no_throw(name);
  return opt && opt->count() > 0;
}

Config make_config(const Options& o, const CLI::App& cmd) {
  Config c;
  if (!o.config.empty()) c.load_file(o.config);
  for (const auto& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got " + kv);
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (given(cmd, "--seed")) c.train.seed = o.seed;
  if (given(cmd, "--jobs")) c.train.jobs = o.jobs;
  if (given(cmd, "--max-actions")) c.adapt.max_actions = o.max_actions;
  if (given(cmd, "--reps")) c.bench.episodes = o.reps;
  if (given(cmd, "--budget")) {
    if (o.budget < 1000) throw UsageError("--budget must be at least 1000");
    c.train.bottom.budget = o.budget / 10;
    c.train.middle.budget = 3 * o.budget / 10;
    c.train.top.budget = o.budget - c.train.bottom.budget - c.train.middle.budget;
    c.train.flat.budget = o.budget;
  }
  return c;
}

std::vector<Algo> algos_of(const Options& o, std::vector<Algo> fallback) {
  if (o.algo.empty()) return fallback;
  std::vector<Algo> out;
  for (const auto& a : o.algo) {
    const auto v = parse_algo(a);
    if (!v) throw UsageError("unknown --algo " + a);
    out.push_back(*v);
  }
  return out;
}

std::vector<DamageSpec> damages_of(const Options& o, std::vector<DamageSpec> fallback) {
  if (o.damage.empty()) return fallback;
  std::vector<DamageSpec> out;
  for (const auto& d : o.damage) {
    const auto v = DamageSpec::parse(d);
    if (!v) throw UsageError("unknown --damage " + d);
    out.push_back(*v);
  }
  return out;
}

std::string single_repertoire(const Options& o) {
  if (o.repertoires.size() != 1) throw UsageError("exactly one --repertoires directory is required");
  return o.repertoires[0];
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void say(const std::string& s) { std::cerr << s << '\n'; }

int cmd_train(const Options& o, const CLI::App& cmd) {
  const Config c = make_config(o, cmd);
  const auto layers = LayerSelection::parse(o.layers);
  if (!layers) throw UsageError("bad --layers " + o.layers);
  train_repertoires(o.out, c, *layers, say);
  return 0;
}

int cmd_inspect(const Options& o, const CLI::App& cmd) {
  const Config c = make_config(o, cmd);
  const std::string dir = single_repertoire(o);
  const std::string fp = c.train.sim.fingerprint();
  fs::create_directories(o.out);
  std::ostringstream csv;
  csv << "repertoire,elites,effective_size,mean_fitness\n";
  const Bounds b{-1.8, 1.8};
  for (const char* name : {"top", "flat2d", "flat8d"}) {
    const fs::path p = fs::path(dir) / (std::string(name) + ".hbr");
    if (!fs::exists(p)) continue;
    const GridArchive a = load_grid(p.string(), fp);
    const Projection pr = project_effective(a.elites(), 100, b, b);
    csv << name << ',' << a.size() << ',' << pr.effective_size << ',' << num(pr.mean_fitness) << '\n';
    std::vector<double> cells(100 * 100, NAN);
    for (const Elite& e : a.elites()) {
      const auto xy = a.cell_coords(e.primary);
      double& v = cells[static_cast<std::size_t>(xy[1]) * 100 + xy[0]];
      v = std::isnan(v) ? e.fitness : std::max(v, e.fitness);
    }
    write_file(fs::path(o.out) / (std::string("projection_") + name + ".svg"),
               svg_heatmap(cells, 100, 100, std::string(name) + " projected fitness"));
  }
  write_file(fs::path(o.out) / "projection.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

int cmd_modulate(const Options& o, const CLI::App& cmd) {
  const Config c = make_config(o, cmd);
  const RepertoireSet set = load_repertoires(single_repertoire(o), c, {Algo::perfect_hte});
  const HBRStack& stack = *set.stack;
  const auto rows = modulate_scan(stack);
  const auto counts = reproducing_pattern_counts(stack, rows, c.adapt.pattern_tolerance);
  fs::create_directories(o.out);

  std::ostringstream scan;
  scan << "skill,pattern,achieved_x,achieved_y,achieved_yaw,feasible,error\n";
  for (const auto& r : rows)
    scan << r.skill << ',' << r.pattern.str() << ',' << num(r.achieved.x) << ',' << num(r.achieved.y) << ','
         << num(r.achieved.yaw) << ',' << int(r.feasible) << ',' << num(r.error) << '\n';
  write_file(fs::path(o.out) / "modulation.csv", scan.str());

  const auto& skills = stack.top().elites();
  std::vector<double> norms, cnt;
  std::ostringstream per;
  per << "skill,x,y,norm,patterns\n";
  std::vector<double> cells(100 * 100, NAN);
  for (std::size_t s = 0; s < skills.size(); ++s) {
    const double n = std::hypot(skills[s].primary[0], skills[s].primary[1]);
    norms.push_back(n);
    cnt.push_back(static_cast<double>(counts[s]));
    per << s << ',' << num(skills[s].primary[0]) << ',' << num(skills[s].primary[1]) << ',' << num(n) << ','
        << counts[s] << '\n';
    const auto xy = stack.top().cell_coords(skills[s].primary);
    cells[static_cast<std::size_t>(xy[1]) * 100 + xy[0]] = static_cast<double>(counts[s]);
  }
  write_file(fs::path(o.out) / "patterns_per_skill.csv", per.str());
  write_file(fs::path(o.out) / "patterns_per_skill.svg", svg_heatmap(cells, 100, 100, "reproducing patterns per skill"));

  const double cut = percentile_nearest_rank(norms, 33);
  std::size_t central = 0, multi = 0;
  for (std::size_t s = 0; s < skills.size(); ++s)
    if (norms[s] < cut) ++central, multi += counts[s] >= 2 ? 1 : 0;
  std::cout << "skills " << skills.size() << "\ncentral_skills " << central << "\ncentral_with_2plus_patterns "
            << num(central ? static_cast<double>(multi) / static_cast<double>(central) : 0.0) << "\nspearman_norm_count "
            << num(spearman(norms, cnt)) << '\n';
  return 0;
}

int cmd_adapt(const Options& o, const CLI::App& cmd) {
  const Config c = make_config(o, cmd);
  const auto algos = algos_of(o, {Algo::hte});
  const auto damages = damages_of(o, {DamageSpec{}});
  if (algos.size() != 1 || damages.size() != 1) throw UsageError("adapt takes one --algo and one --damage");
  const Maze maze = Maze::load(o.maze, c.maze_cell);
  const RepertoireSet set = load_repertoires(single_repertoire(o), c, algos);
  const EpisodeLog log = run_episode(algos[0], set.view(), maze, damages[0], o.seed, c.adapt);
  fs::create_directories(o.out);
  {
    std::ofstream os(fs::path(o.out) / "episode.csv", std::ios::binary);
    write_episode_csv(os, log);
  }
  std::ofstream os(fs::path(o.out) / "summary.csv", std::ios::binary);
  write_summary_csv(os, log);
  write_summary_csv(std::cout, log);
  return 0;
}

void write_bench_outputs(const fs::path& out, const std::vector<EpisodeRow>& rows) {
  fs::create_directories(out);
  {
    std::ofstream os(out / "episodes.csv", std::ios::binary);
    write_episode_rows(os, rows);
  }
  std::ostringstream agg;
  write_aggregate(agg, aggregate(rows));
  write_file(out / "aggregate.csv", agg.str());
  write_file(out / "actions_boxplot.svg", actions_boxplot(rows));
  write_file(out / "failures.svg", failure_bars(rows));
  std::cout << agg.str();
}

int cmd_bench(const Options& o, const CLI::App& cmd) {
  const Config c = make_config(o, cmd);
  if (o.repertoires.empty()) throw UsageError("bench needs at least one --repertoires directory");
  BenchPlan plan;
  plan.algos = algos_of(o, {Algo::perfect_hte, Algo::hte, Algo::rte2d, Algo::rte8d, Algo::aprol_lite});
  const auto bench = DamageSpec::benchmark();
  plan.damages = damages_of(o, {bench.begin(), bench.end()});
  plan.episodes = c.bench.episodes;
  plan.jobs = o.jobs;
  plan.adapt = c.adapt;
  const Maze maze = Maze::load(o.maze, c.maze_cell);
  std::vector<RepertoireSet> sets;
  for (const auto& d : o.repertoires) sets.push_back(load_repertoires(d, c, plan.algos));
  std::vector<const RepertoireSet*> ptrs;
  for (const auto& s : sets) ptrs.push_back(&s);
  write_bench_outputs(o.out, run_bench(maze, ptrs, plan, say));
  return 0;
}

int cmd_plot(const Options& o) {
  if (o.input.empty()) throw UsageError("plot needs --in episodes.csv");
  std::ifstream is(o.input);
  if (!is) throw std::runtime_error("cannot open " + o.input);
  write_bench_outputs(o.out, read_episode_rows(is));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical trial-and-error lab for a kinematic hexapod"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "key = value file");
    c->add_option("--set", o.set, "override one config key (key=value)");
    c->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    c->add_option("--out", o.out, "output directory");
  };
  auto* train = app.add_subcommand("train", "train repertoires into --out");
  common(train);
  train->add_option("--seed", o.seed, "training seed");
  train->add_option("--budget", o.budget, "evaluations per method (hierarchy splits 10/30/60 %)");
  train->add_option("--layers", o.layers, "all, hierarchy, flat or a list of bottom,middle,top,flat2d,flat8d,aprol");

  auto* inspect = app.add_subcommand("inspect", "projection statistics and maps");
  common(inspect);
  inspect->add_option("--repertoires", o.repertoires, "repertoire directory")->required();

  auto* modulate = app.add_subcommand("modulate", "secondary-pattern modulation scan");
  common(modulate);
  modulate->add_option("--repertoires", o.repertoires, "repertoire directory")->required();

  auto* adapt = app.add_subcommand("adapt", "run one damage-recovery episode");
  common(adapt);
  adapt->add_option("--repertoires", o.repertoires, "repertoire directory")->required();
  adapt->add_option("--algo", o.algo, "hte, perfect, rte2d, rte8d or aprol");
  adapt->add_option("--damage", o.damage, "none, leg1..leg6 or middle-both");
  adapt->add_option("--seed", o.seed, "episode seed");
  adapt->add_option("--max-actions", o.max_actions, "action cap")->check(CLI::NonNegativeNumber);
  adapt->add_option("--maze", o.maze, "maze text file");

  auto* bench = app.add_subcommand("bench", "variants x damages x episode seeds");
  common(bench);
  bench->add_option("--repertoires", o.repertoires, "one directory per repertoire replicate")->required();
  bench->add_option("--algo", o.algo, "subset of variants (default: all five)")->delimiter(',');
  bench->add_option("--damage", o.damage, "subset of damages (default: the seven benchmark cases)")->delimiter(',');
  bench->add_option("--reps", o.reps, "episode seeds per repertoire")->check(CLI::PositiveNumber);
  bench->add_option("--max-actions", o.max_actions, "action cap")->check(CLI::NonNegativeNumber);
  bench->add_option("--maze", o.maze, "maze text file");

  auto* plot = app.add_subcommand("plot", "aggregate CSV and SVGs from an episode CSV");
  plot->add_option("--in", o.input, "episodes.csv from bench")->required();
  plot->add_option("--out", o.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*train) return cmd_train(o, *train);
    if (*inspect) return cmd_inspect(o, *inspect);
    if (*modulate) return cmd_modulate(o, *modulate);
    if (*adapt) return cmd_adapt(o, *adapt);
    if (*bench) return cmd_bench(o, *bench);
    if (*plot) return cmd_plot(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
