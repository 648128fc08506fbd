#include "hte/config.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hte {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("bad value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

std::string show(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
template <class T>
std::string show(T v) {
  return std::to_string(v);
}

struct Field {
  std::function<void(Config&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const Config&)> get;
};

template <class T>
Field make(std::function<T&(Config&)> ref) {
  return {[ref](Config& c, std::string_view k, std::string_view v) { ref(c) = parse_number<T>(k, v); },
          [ref](const Config& c) { return show(ref(const_cast<Config&>(c))); }};
}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = [] {
    std::map<std::string, Field, std::less<>> m;
    using D = std::function<double&(Config&)>;
    using Z = std::function<std::size_t&(Config&)>;
    using I = std::function<int&(Config&)>;
    m["sim.stride"] = make<double>(D([](Config& c) -> double& { return c.train.sim.stride; }));
    m["sim.smoothing_window"] = make<int>(I([](Config& c) -> int& { return c.train.sim.smoothing_window; }));
    m["sim.contact_threshold"] = make<double>(D([](Config& c) -> double& { return c.train.sim.contact_threshold; }));
    m["sim.displacement_range"] =
        make<double>(D([](Config& c) -> double& { return c.train.sim.displacement_range; }));
    m["sim.yaw_range"] = make<double>(D([](Config& c) -> double& { return c.train.sim.yaw_range; }));
    m["train.seed"] = make<std::uint64_t>(
        std::function<std::uint64_t&(Config&)>([](Config& c) -> std::uint64_t& { return c.train.seed; }));
    m["train.jobs"] =
        make<unsigned>(std::function<unsigned&(Config&)>([](Config& c) -> unsigned& { return c.train.jobs; }));
    m["train.population"] = make<std::size_t>(Z([](Config& c) -> std::size_t& { return c.train.population; }));
    m["train.eta"] = make<double>(D([](Config& c) -> double& { return c.train.eta; }));
    m["train.l_bottom"] = make<double>(D([](Config& c) -> double& { return c.train.l_bottom; }));
    m["train.l_middle"] = make<double>(D([](Config& c) -> double& { return c.train.l_middle; }));
    m["train.rho"] = make<double>(D([](Config& c) -> double& { return c.train.rho; }));
    auto layer = [&](const std::string& name, LayerSettings TrainParams::*s) {
      m["train." + name + ".budget"] = make<std::size_t>(Z([s](Config& c) -> std::size_t& { return (c.train.*s).budget; }));
      m["train." + name + ".mutation_rate"] =
          make<double>(D([s](Config& c) -> double& { return (c.train.*s).mutation_rate; }));
    };
    layer("bottom", &TrainParams::bottom);
    layer("middle", &TrainParams::middle);
    layer("top", &TrainParams::top);
    layer("flat", &TrainParams::flat);
    m["adapt.max_actions"] = make<int>(I([](Config& c) -> int& { return c.adapt.max_actions; }));
    m["adapt.beta"] = make<double>(D([](Config& c) -> double& { return c.adapt.beta; }));
    m["adapt.eps_k"] = make<double>(D([](Config& c) -> double& { return c.adapt.eps_k; }));
    m["adapt.eps_c"] = make<double>(D([](Config& c) -> double& { return c.adapt.eps_c; }));
    m["adapt.eps_floor"] = make<double>(D([](Config& c) -> double& { return c.adapt.eps_floor; }));
    m["adapt.directional_targets"] = make<int>(I([](Config& c) -> int& { return c.adapt.directional_targets; }));
    m["adapt.directional_radius"] = make<double>(D([](Config& c) -> double& { return c.adapt.directional_radius; }));
    m["adapt.pattern_tolerance"] = make<double>(D([](Config& c) -> double& { return c.adapt.pattern_tolerance; }));
    m["adapt.skill_scale"] = make<double>(D([](Config& c) -> double& { return c.adapt.skill_scale; }));
    m["adapt.candidate_pool"] = make<int>(I([](Config& c) -> int& { return c.adapt.candidate_pool; }));
    m["adapt.bit_scale"] = make<double>(D([](Config& c) -> double& { return c.adapt.bit_scale; }));
    m["adapt.aprol_window"] = make<int>(I([](Config& c) -> int& { return c.adapt.aprol_window; }));
    auto gp = [&](const std::string& name, GPParams AdaptParams::*g) {
      m[name + ".lengthscale"] = make<double>(D([g](Config& c) -> double& { return (c.adapt.*g).lengthscale; }));
      m[name + ".signal_var"] = make<double>(D([g](Config& c) -> double& { return (c.adapt.*g).signal_var; }));
      m[name + ".noise_var"] = make<double>(D([g](Config& c) -> double& { return (c.adapt.*g).noise_var; }));
    };
    gp("gp.transition", &AdaptParams::transition_gp);
    gp("gp.epsilon", &AdaptParams::epsilon_gp);
    m["mcts.iterations"] = make<int>(I([](Config& c) -> int& { return c.adapt.mcts.iterations; }));
    m["mcts.horizon"] = make<int>(I([](Config& c) -> int& { return c.adapt.mcts.horizon; }));
    m["mcts.rollout_steps"] = make<int>(I([](Config& c) -> int& { return c.adapt.mcts.rollout_steps; }));
    m["mcts.uct_c"] = make<double>(D([](Config& c) -> double& { return c.adapt.mcts.uct_c; }));
    m["mcts.action_set_size"] =
        make<std::size_t>(Z([](Config& c) -> std::size_t& { return c.adapt.mcts.action_set_size; }));
    m["mcts.discount"] = make<double>(D([](Config& c) -> double& { return c.adapt.mcts.discount; }));
    m["mcts.goal_bonus"] = make<double>(D([](Config& c) -> double& { return c.adapt.mcts.goal_bonus; }));
    m["mcts.collision_penalty"] = make<double>(D([](Config& c) -> double& { return c.adapt.mcts.collision_penalty; }));
    m["bench.repertoire_seeds"] =
        make<std::size_t>(Z([](Config& c) -> std::size_t& { return c.bench.repertoire_seeds; }));
    m["bench.episodes"] = make<int>(I([](Config& c) -> int& { return c.bench.episodes; }));
    m["maze.cell"] = make<double>(D([](Config& c) -> double& { return c.maze_cell; }));
    return m;
  }();
  return table;
}

}  // namespace

void Config::set(std::string_view key, std::string_view value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown key '" + std::string(key) + "'");
  it->second.set(*this, key, trim(value));
}

std::string Config::get(std::string_view key) const {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown key '" + std::string(key) + "'");
  return it->second.get(*this);
}

std::vector<std::string> Config::keys() {
  std::vector<std::string> out;
  for (const auto& [k, f] : fields()) out.push_back(k);
  return out;
}

void Config::load_text(std::string_view text, const std::string& origin) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path);
}

}  // namespace hte
