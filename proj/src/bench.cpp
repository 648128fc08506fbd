#include "hte/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hte/persist.hpp"
#include "hte/stats.hpp"
#include "hte/svg.hpp"

namespace hte {

namespace fs = std::filesystem;

std::vector<DamageSpec> aprol_priors() {
  std::vector<DamageSpec> out{DamageSpec{}};
  for (int l = 1; l <= kLegs; ++l) out.push_back(DamageSpec::legs({l}));
  return out;
}

Repertoires RepertoireSet::view() const {
  Repertoires r;
  r.stack = stack ? &*stack : nullptr;
  r.patterns = patterns ? &*patterns : nullptr;
  r.flat2d = flat2d ? &*flat2d : nullptr;
  r.flat8d = flat8d ? &*flat8d : nullptr;
  for (const auto& [prior, a] : aprol) r.aprol.push_back({&a, prior});
  r.sim = sim;
  return r;
}

std::optional<LayerSelection> LayerSelection::parse(const std::string& text) {
  if (text == "all") return LayerSelection{};
  LayerSelection s{false, false, false, false, false, false};
  std::istringstream in(text);
  for (std::string w; std::getline(in, w, ',');) {
    if (w == "bottom") s.bottom = true;
    else if (w == "middle") s.middle = true;
    else if (w == "top") s.top = true;
    else if (w == "flat2d") s.flat2d = true;
    else if (w == "flat8d") s.flat8d = true;
    else if (w == "aprol") s.aprol = true;
    else if (w == "hierarchy") s.bottom = s.middle = s.top = true;
    else if (w == "flat") s.flat2d = s.flat8d = s.aprol = true;
    else return std::nullopt;
  }
  return s;
}

namespace {

std::string path_of(const std::string& dir, const std::string& name) { return (fs::path(dir) / (name + ".hbr")).string(); }

std::string aprol_name(DamageSpec d) { return "aprol_" + d.name(); }

void require(const std::string& path) {
  if (!fs::exists(path)) throw std::runtime_error("missing repertoire file " + path);
}

}  // namespace

void train_repertoires(const std::string& dir, const Config& cfg, LayerSelection layers, const Log& log) {
  fs::create_directories(dir);
  const TrainParams& p = cfg.train;
  const std::string fp = p.sim.fingerprint();
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };

  if (layers.bottom || layers.middle || layers.top) {
    DistArchive bottom = layers.bottom ? train_bottom(p) : load_dist(path_of(dir, "bottom"), fp);
    if (layers.bottom) {
      save_repertoire(path_of(dir, "bottom"), bottom, fp);
      say("bottom: " + std::to_string(bottom.size()) + " elites");
    }
    if (layers.middle || layers.top) {
      HBRStack stack(std::move(bottom), p.sim, p.rho);
      DistArchive middle = layers.middle ? train_middle(stack, p) : load_dist(path_of(dir, "middle"), fp);
      if (layers.middle) {
        save_repertoire(path_of(dir, "middle"), middle, fp);
        say("middle: " + std::to_string(middle.size()) + " elites");
      }
      stack.set_middle(std::move(middle));
      if (layers.top) {
        GridArchive top = train_top(stack, p);
        save_repertoire(path_of(dir, "top"), top, fp);
        say("top: " + std::to_string(top.size()) + " elites");
      }
    }
  }
  std::optional<GridArchive> flat2d;
  if (layers.flat2d) {
    flat2d = train_flat(FlatVariant::bd2, p);
    save_repertoire(path_of(dir, "flat2d"), *flat2d, fp);
    say("flat2d: " + std::to_string(flat2d->size()) + " elites");
  }
  if (layers.flat8d) {
    GridArchive a = train_flat(FlatVariant::bd8, p);
    save_repertoire(path_of(dir, "flat8d"), a, fp);
    say("flat8d: " + std::to_string(a.size()) + " elites");
  }
  if (layers.aprol) {
    for (DamageSpec d : aprol_priors()) {
      // The intact prior is the same run as flat2d (same seed stream).
      GridArchive a = d.none() && flat2d ? *flat2d : train_flat(FlatVariant::bd2, p, d);
      save_repertoire(path_of(dir, aprol_name(d)), a, fp);
      say(aprol_name(d) + ": " + std::to_string(a.size()) + " elites");
    }
  }
}

RepertoireSet load_repertoires(const std::string& dir, const Config& cfg, const std::vector<Algo>& algos) {
  auto needs = [&](std::initializer_list<Algo> any) {
    return std::any_of(algos.begin(), algos.end(),
                       [&](Algo a) { return std::find(any.begin(), any.end(), a) != any.end(); });
  };
  const bool hier = needs({Algo::hte, Algo::perfect_hte});
  std::vector<std::string> files;
  if (hier)
    for (const char* n : {"bottom", "middle", "top"}) files.push_back(path_of(dir, n));
  if (needs({Algo::rte2d})) files.push_back(path_of(dir, "flat2d"));
  if (needs({Algo::rte8d})) files.push_back(path_of(dir, "flat8d"));
  if (needs({Algo::aprol_lite}))
    for (DamageSpec d : aprol_priors()) files.push_back(path_of(dir, aprol_name(d)));
  for (const auto& f : files) require(f);

  RepertoireSet set;
  set.sim = cfg.train.sim;
  const std::string fp = set.sim.fingerprint();
  if (hier) {
    set.stack.emplace(load_dist(path_of(dir, "bottom"), fp), load_dist(path_of(dir, "middle"), fp),
                      load_grid(path_of(dir, "top"), fp), set.sim, cfg.train.rho);
    set.patterns = build_pattern_table(*set.stack, cfg.adapt);
  }
  if (needs({Algo::rte2d})) set.flat2d = load_grid(path_of(dir, "flat2d"), fp);
  if (needs({Algo::rte8d})) set.flat8d = load_grid(path_of(dir, "flat8d"), fp);
  if (needs({Algo::aprol_lite}))
    for (DamageSpec d : aprol_priors()) set.aprol.emplace_back(d, load_grid(path_of(dir, aprol_name(d)), fp));
  return set;
}

std::uint64_t episode_seed(std::size_t replicate, int episode) {
  return 1000 * static_cast<std::uint64_t>(replicate) + static_cast<std::uint64_t>(episode) + 1;
}

std::vector<EpisodeRow> run_bench(const Maze& maze, const std::vector<const RepertoireSet*>& sets, const BenchPlan& plan,
                                  const Log& log) {
  if (sets.empty()) throw std::invalid_argument("run_bench: no repertoire sets");
  if (!maze.solvable()) throw std::invalid_argument("run_bench: maze has no path from S to G");
  std::vector<EpisodeRow> rows;
  for (Algo a : plan.algos)
    for (DamageSpec d : plan.damages)
      for (std::size_t r = 0; r < sets.size(); ++r)
        for (int e = 0; e < plan.episodes; ++e) rows.push_back({a, d, r, episode_seed(r, e), 0, false});

  std::vector<Repertoires> views;
  for (const auto* s : sets) views.push_back(s->view());
  parallel_for(rows.size(), plan.jobs, [&](std::size_t i) {
    EpisodeRow& row = rows[i];
    const EpisodeLog ep = run_episode(row.algo, views[row.replicate], maze, row.damage, row.seed, plan.adapt);
    row.actions = ep.actions_used;
    row.success = ep.success;
  });
  if (log) log("bench: " + std::to_string(rows.size()) + " episodes");
  return rows;
}

std::vector<AggregateRow> aggregate(const std::vector<EpisodeRow>& rows) {
  std::vector<Algo> algos;
  std::vector<std::string> damages;
  for (const auto& r : rows) {
    if (std::find(algos.begin(), algos.end(), r.algo) == algos.end()) algos.push_back(r.algo);
    if (std::find(damages.begin(), damages.end(), r.damage.name()) == damages.end()) damages.push_back(r.damage.name());
  }
  damages.push_back("all");
  std::vector<AggregateRow> out;
  for (Algo a : algos)
    for (const auto& d : damages) {
      std::vector<double> actions;
      std::size_t failures = 0;
      for (const auto& r : rows) {
        if (r.algo != a || (d != "all" && r.damage.name() != d)) continue;
        actions.push_back(r.actions);
        failures += r.success ? 0 : 1;
      }
      if (actions.empty()) continue;
      AggregateRow g;
      g.algo = a;
      g.damage = d;
      g.n = actions.size();
      g.median = percentile_nearest_rank(actions, 50);
      g.p25 = percentile_nearest_rank(actions, 25);
      g.p75 = percentile_nearest_rank(actions, 75);
      g.failure_fraction = static_cast<double>(failures) / static_cast<double>(actions.size());
      out.push_back(g);
    }
  return out;
}

void write_episode_rows(std::ostream& os, const std::vector<EpisodeRow>& rows) {
  os << "algo,damage,replicate,seed,actions_used,success\n";
  for (const auto& r : rows)
    os << algo_name(r.algo) << ',' << r.damage.name() << ',' << r.replicate << ',' << r.seed << ',' << r.actions << ','
       << int(r.success) << '\n';
}

std::vector<EpisodeRow> read_episode_rows(std::istream& is) {
  std::vector<EpisodeRow> rows;
  std::string line;
  int n = 0;
  if (!std::getline(is, line) || line != "algo,damage,replicate,seed,actions_used,success")
    throw std::runtime_error("episode CSV: unexpected header");
  ++n;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string f[6];
    for (auto& x : f) std::getline(in, x, ',');
    const auto algo = parse_algo(f[0]);
    const auto dmg = DamageSpec::parse(f[1]);
    if (!algo || !dmg) throw std::runtime_error("episode CSV line " + std::to_string(n) + ": bad algo or damage");
    try {
      rows.push_back({*algo, *dmg, std::stoul(f[2]), std::stoull(f[3]), std::stoi(f[4]), f[5] == "1"});
    } catch (const std::exception&) {
      throw std::runtime_error("episode CSV line " + std::to_string(n) + ": bad number");
    }
  }
  return rows;
}

void write_aggregate(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << "algo,damage,n,median,p25,p75,failure_fraction\n";
  for (const auto& r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", r.failure_fraction);
    os << algo_name(r.algo) << ',' << r.damage << ',' << r.n << ',' << r.median << ',' << r.p25 << ',' << r.p75 << ','
       << buf << '\n';
  }
}

namespace {

std::vector<Algo> algos_in(const std::vector<EpisodeRow>& rows) {
  std::vector<Algo> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), r.algo) == out.end()) out.push_back(r.algo);
  return out;
}

}  // namespace

std::string actions_boxplot(const std::vector<EpisodeRow>& rows) {
  std::vector<Series> groups;
  for (Algo a : algos_in(rows)) {
    // One replication = one (repertoire, episode seed); its value is the median over damages.
    std::map<std::pair<std::size_t, std::uint64_t>, std::vector<double>> reps;
    for (const auto& r : rows)
      if (r.algo == a) reps[{r.replicate, r.seed}].push_back(r.actions);
    Series s{std::string(algo_name(a)), {}};
    for (const auto& [key, v] : reps) s.values.push_back(percentile_nearest_rank(v, 50));
    groups.push_back(std::move(s));
  }
  return svg_boxplot(groups, "Actions to reach the goal (median over damages)", "actions");
}

std::string failure_bars(const std::vector<EpisodeRow>& rows) {
  std::vector<std::string> labels;
  std::vector<double> values;
  for (Algo a : algos_in(rows)) {
    std::size_t n = 0, fail = 0;
    for (const auto& r : rows)
      if (r.algo == a) ++n, fail += r.success ? 0 : 1;
    labels.emplace_back(algo_name(a));
    values.push_back(100.0 * static_cast<double>(fail) / static_cast<double>(n));
  }
  return svg_bars(labels, values, "Failed episodes", "% of episodes");
}

}  // namespace hte
