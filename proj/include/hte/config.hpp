#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hte/adapt.hpp"
#include "hte/evolve.hpp"

namespace hte {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchSettings {
  std::size_t repertoire_seeds = 2;
  int episodes = 20;  // episode seeds per (variant, damage, repertoire)
};

/// Every tunable constant of the pipeline.
struct Config {
  TrainParams train;
  AdaptParams adapt;
  BenchSettings bench;
  double maze_cell = 0.5;

  /// Sets one value by key, e.g. "mcts.iterations". Throws ConfigError on an
  /// unknown key or an unparsable value.
  void set(std::string_view key, std::string_view value);

  /// Applies a key = value file; '#' starts a comment. Errors name the line.
  void load_file(const std::string& path);
  void load_text(std::string_view text, const std::string& origin = "config");

  /// All known keys, in a stable order.
  static std::vector<std::string> keys();
  /// Current value of a key, printed so that it parses back exactly.
  std::string get(std::string_view key) const;
};

}  // namespace hte
