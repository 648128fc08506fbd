#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path& work() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "hte_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Exit status of `hte_cli <args>`, output silenced.
int run(const std::string& args) {
  const std::string cmd = std::string("\"") + HTE_CLI_PATH + "\" " + args + " > \"" +
                          (work() / "stdout.txt").string() + "\" 2> \"" + (work() / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string& trained() {
  static const std::string dir = [] {
    const std::string d = (work() / "reps").string();
    REQUIRE(run("train --budget 4000 --seed 3 --out " + d) == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run("") == 1);
  CHECK(run("fly") == 1);
  CHECK(run("adapt") == 1);
  CHECK(run("train --budget 10 --out x") == 1);
  CHECK(run("train --layers top,legs --out x") == 1);
  CHECK(run("adapt --repertoires x --algo nope") == 1);
  CHECK(run("adapt --repertoires x --damage leg9") == 1);
  CHECK(run("adapt --repertoires x --set mcts.nope=1") == 1);
  CHECK(run("adapt --repertoires x --set mcts.iterations") == 1);
  CHECK(run("bench --repertoires x --reps 0") == 1);
  CHECK(run("--help") == 0);
  CHECK(run("train --help") == 0);
}

TEST_CASE("runtime errors exit with 2") {
  CHECK(run("adapt --repertoires " + (work() / "missing").string()) == 2);
  CHECK(run("plot --in " + (work() / "missing.csv").string() + " --out " + (work() / "p").string()) == 2);
  CHECK(run("adapt --repertoires " + trained() + " --maze " + (work() / "nomaze.txt").string()) == 2);
}

TEST_CASE("train, inspect, modulate, adapt, bench and plot") {
  const std::string reps = trained();
  for (const char* f : {"bottom", "middle", "top", "flat2d", "flat8d"})
    CHECK(fs::exists(fs::path(reps) / (std::string(f) + ".hbr")));

  const fs::path out = work() / "out";
  CHECK(run("inspect --repertoires " + reps + " --out " + (out / "inspect").string()) == 0);
  CHECK(fs::exists(out / "inspect" / "projection.csv"));
  CHECK(run("modulate --repertoires " + reps + " --out " + (out / "mod").string()) == 0);
  CHECK(fs::exists(out / "mod" / "modulation.csv"));

  const std::string adapt = "adapt --repertoires " + reps + " --algo hte --damage leg2 --seed 4 --max-actions 12 --out ";
  REQUIRE(run(adapt + (out / "a1").string()) == 0);
  REQUIRE(run(adapt + (out / "a2").string()) == 0);
  const std::string ep = slurp(out / "a1" / "episode.csv");
  CHECK(ep.rfind("step,skill_x", 0) == 0);
  CHECK(ep == slurp(out / "a2" / "episode.csv"));
  CHECK(slurp(out / "a1" / "summary.csv") == slurp(out / "a2" / "summary.csv"));

  REQUIRE(run("bench --repertoires " + reps + " --repertoires " + reps +
              " --algo perfect,rte2d --damage leg1,middle-both --reps 2 --max-actions 5 --jobs 2 --out " +
              (out / "b").string()) == 0);
  const std::string agg = slurp(out / "b" / "aggregate.csv");
  CHECK(agg.find("perfect,all,8,") != std::string::npos);
  CHECK(agg.find("rte2d,middle-both,4,") != std::string::npos);
  CHECK(fs::exists(out / "b" / "actions_boxplot.svg"));

  REQUIRE(run("plot --in " + (out / "b" / "episodes.csv").string() + " --out " + (out / "p").string()) == 0);
  CHECK(slurp(out / "p" / "aggregate.csv") == agg);
}
