#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ktsbm/order_selection.hpp"
#include "ktsbm/sbm_core.hpp"

namespace fs = std::filesystem;
using namespace ktsbm;

namespace {

const fs::path kWork = fs::path(KTSBM_TEST_WORKDIR) / "cli_work";

int run(const std::string& args, const std::string& capture = "") {
  std::string cmd = std::string(KTSBM_CLI) + " " + args;
  cmd += capture.empty() ? " > /dev/null 2>&1" : " > " + (kWork / capture).string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct Workdir {
  Workdir() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

}  // namespace

TEST_CASE_FIXTURE(Workdir, "sample writes canonical files deterministically") {
  write(kWork / "zero.json", R"({"pi":[1.0],"P":[[0.0]],"n":4})");
  REQUIRE(run("sample --config " + (kWork / "zero.json").string() + " --out " + (kWork / "z").string()) == 0);
  CHECK(slurp(kWork / "z/graph.txt") == "4 0\n");

  write(kWork / "two.json", R"({"pi":[0.5,0.5],"P":[[0.8,0.2],[0.2,0.8]],"n":100})");
  const std::string cfg = (kWork / "two.json").string();
  REQUIRE(run("sample --config " + cfg + " --seed 9 --out " + (kWork / "a").string()) == 0);
  REQUIRE(run("sample --config " + cfg + " --seed 9 --out " + (kWork / "b").string()) == 0);
  CHECK(slurp(kWork / "a/graph.txt") == slurp(kWork / "b/graph.txt"));
  CHECK(slurp(kWork / "a/labels.txt") == slurp(kWork / "b/labels.txt"));

  std::istringstream labels(slurp(kWork / "a/labels.txt"));
  int lines = 0;
  for (std::string line; std::getline(labels, line); ++lines) CHECK((line == "1" || line == "2"));
  CHECK(lines == 100);
  CHECK(fs::exists(kWork / "a/config.json"));
}

TEST_CASE_FIXTURE(Workdir, "estimate matches the in-process estimator") {
  write(kWork / "m.json", R"({"pi":[0.5,0.5],"P":[[0.9,0.1],[0.1,0.9]],"n":8})");
  REQUIRE(run("sample --config " + (kWork / "m.json").string() + " --seed 4 --out " + (kWork / "s").string()) == 0);
  REQUIRE(run("estimate " + (kWork / "s/graph.txt").string() + " --out " + (kWork / "e").string()) == 0);
  std::ifstream in(kWork / "s/graph.txt");
  const auto x = read_graph(in);
  const auto est = estimate_order(x, PenaltySpec{1.0}, 8);
  const auto j = nlohmann::json::parse(slurp(kWork / "e/estimate.json"));
  CHECK(j["k_hat"].get<int>() == est.k_hat);
  for (std::size_t i = 0; i < est.table.rows.size(); ++i)
    CHECK(j["table"][i]["score"].get<double>() == est.table.rows[i].score);

  REQUIRE(run("estimate " + (kWork / "s/graph.txt").string() + " --kt mc:1000000 --seed 3 --out " +
              (kWork / "mc").string()) == 0);
  const auto mc = nlohmann::json::parse(slurp(kWork / "mc/estimate.json"));
  CHECK(mc["k_hat"].get<int>() == est.k_hat);
}

TEST_CASE_FIXTURE(Workdir, "estimate on an empty 6-node graph") {
  write(kWork / "empty.txt", "6 0\n");
  REQUIRE(run("estimate " + (kWork / "empty.txt").string(), "out.txt") == 0);
  CHECK(slurp(kWork / "out.txt").find("k_hat = 1") != std::string::npos);
}

TEST_CASE_FIXTURE(Workdir, "exit codes") {
  write(kWork / "loop.txt", "3 1\n3 3\n");
  CHECK(run("estimate " + (kWork / "loop.txt").string(), "err.txt") == 2);
  CHECK(slurp(kWork / "err.txt").find("line 2") != std::string::npos);
  CHECK(run("estimate " + (kWork / "loop.txt").string() + " --kt fast") == 2);
  CHECK(run("frobnicate") == 2);
  write(kWork / "big.txt", "40 0\n");
  CHECK(run("estimate " + (kWork / "big.txt").string() + " --k-max 3") == 3);
  CHECK(run("estimate " + (kWork / "big.txt").string() + " --k-max 3 --kt mc:1000") == 0);
  CHECK(run("verify normalization") == 0);
  CHECK(run("verify gamma_ineq --count 200") == 0);
  CHECK(run("verify prop31 --n 4 --k 1") == 0);
  CHECK(run("verify lemmaA2 --n 4") == 0);
  CHECK(run("verify normalization --tol -1") == 4);
  CHECK(run("verify nonsense") == 2);
}

TEST_CASE_FIXTURE(Workdir, "consistency output is byte-identical across thread counts") {
  write(kWork / "c.json",
        R"({"k0":1,"pi0":[1.0],"P0":[[0.5]],"regime":"dense","c":1.0,"alpha":0.0,"n_grid":[4,6,8],)"
        R"("trials":30,"epsilon":1.0,"k_max":8,"kt":"exact","master_seed":77,"output_path":"unused"})");
  const std::string cfg = (kWork / "c.json").string();
  REQUIRE(run("consistency --config " + cfg + " --threads 1 --out " + (kWork / "t1").string()) == 0);
  REQUIRE(run("consistency --config " + cfg + " --threads 8 --out " + (kWork / "t8").string()) == 0);
  CHECK(slurp(kWork / "t1/trials.csv") == slurp(kWork / "t8/trials.csv"));
  CHECK(slurp(kWork / "t1/summary.csv") == slurp(kWork / "t8/summary.csv"));
  const auto resolved = nlohmann::json::parse(slurp(kWork / "t1/config.json"));
  CHECK(resolved["master_seed"].get<std::uint64_t>() == 77);
  CHECK(resolved["output_path"].get<std::string>() == (kWork / "t1").string());

  write(kWork / "big.json", R"({"k0":1,"pi0":[1.0],"P0":[[0.5]],"n_grid":[50],"trials":1})");
  CHECK(run("consistency --config " + (kWork / "big.json").string() + " --out " + (kWork / "big").string()) == 3);
}

TEST_CASE_FIXTURE(Workdir, "gap subcommand") {
  write(kWork / "p.json", R"({"pi":[0.5,0.5],"P":[[0.8,0.2],[0.2,0.8]]})");
  REQUIRE(run("gap " + (kWork / "p.json").string() + " --regime dense --out " + (kWork / "g").string(), "gap.txt") ==
          0);
  const auto j = nlohmann::json::parse(slurp(kWork / "g/gap.json"));
  CHECK(j["dense"]["gap"].get<double>() == doctest::Approx(0.096373).epsilon(1e-5));
  write(kWork / "dup.json", R"({"pi":[0.5,0.5],"P":[[0.3,0.3],[0.3,0.3]]})");
  REQUIRE(run("gap " + (kWork / "dup.json").string(), "dup.txt") == 0);
  CHECK(slurp(kWork / "dup.txt").find("reducible") != std::string::npos);
}
