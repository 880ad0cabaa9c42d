#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include <pdmm/pdmm.hpp>

#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = "test_out/cli";

int run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + PDMM_CLI_PATH + "' " + args +
                          " >" + (kWork / "stdout.txt").string() + " 2>" +
                          (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string captured_stdout() {
  return pdmm::read_text_file((kWork / "stdout.txt").string());
}

void reset_workdir() {
  fs::remove_all(kWork);
  fs::create_directories(kWork);
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("cli usage and argument errors") {
  reset_workdir();
  REQUIRE(run_cli("--help") == 0);
  REQUIRE(captured_stdout().find("gen") != std::string::npos);
  REQUIRE(run_cli("") == 1);
  REQUIRE(run_cli("frobnicate") == 1);
  REQUIRE(run_cli("gen --m 4") == 1);  // missing required options
}

TEST_CASE("gen writes a loadable instance bundle") {
  reset_workdir();
  const fs::path out = kWork / "inst.json";
  REQUIRE(run_cli("gen --m 6 --n 4 --edge-prob 0.7 --seed 7 --out " +
                  quoted(out)) == 0);
  REQUIRE(captured_stdout().find("edges=") != std::string::npos);

  const auto j = nlohmann::json::parse(pdmm::read_text_file(out.string()));
  REQUIRE(j.at("m").get<int>() == 6);
  REQUIRE(j.at("n").get<int>() == 4);
  const pdmm::Graph g = pdmm::graph_from_json(j.at("graph").dump());
  REQUIRE(g.m == 6);
  const auto p = pdmm::averaging_from_json(j.at("P").dump());
  REQUIRE(pdmm::validate_averaging(p, g).ok());
  const pdmm::StackedPoint costs = pdmm::stacked_from_json(j.at("costs"));
  REQUIRE(costs.m == 6);
  REQUIRE(costs.n == 4);

  // Same seed, same bytes.
  const fs::path again = kWork / "inst2.json";
  REQUIRE(run_cli("gen --m 6 --n 4 --edge-prob 0.7 --seed 7 --out " +
                  quoted(again)) == 0);
  REQUIRE(pdmm::read_text_file(again.string()) ==
          pdmm::read_text_file(out.string()));
}

TEST_CASE("gen fails loudly when no connected graph can be drawn") {
  reset_workdir();
  const fs::path out = kWork / "never.json";
  REQUIRE(run_cli("gen --m 8 --n 2 --edge-prob 0.001 --seed 1 --out " +
                  quoted(out)) == 2);
  REQUIRE_FALSE(fs::exists(out));
}

TEST_CASE("run solves a config and reruns identically") {
  reset_workdir();
  const fs::path cfg_path = kWork / "config.json";
  pdmm::ExperimentConfig cfg;
  cfg.m = 6;
  cfg.n = 8;
  cfg.p_edge = 0.6;
  cfg.seed = 3;
  cfg.solver.rho = 1.0;
  cfg.solver.tau = 0.5;
  cfg.solver.max_iters = 40;
  pdmm::write_text_file(cfg_path.string(), pdmm::experiment_to_json(cfg));

  const fs::path dir_a = kWork / "a";
  const fs::path dir_b = kWork / "b";
  REQUIRE(run_cli("run --config " + quoted(cfg_path) + " --out-dir " +
                  quoted(dir_a)) == 0);
  const std::string summary = captured_stdout();
  REQUIRE(summary == pdmm::read_text_file((dir_a / "summary.json").string()));
  REQUIRE(nlohmann::json::parse(summary).at("variants").contains("bregman"));

  REQUIRE(run_cli("run --config " + quoted(cfg_path) + " --out-dir " +
                  quoted(dir_b) + " --threads 4") == 0);
  for (const char* name : {"bregman.csv", "euclid.csv"}) {
    const std::string a = pdmm::read_text_file((dir_a / name).string());
    const std::string b = pdmm::read_text_file((dir_b / name).string());
    REQUIRE(pdmm::strip_wall_column(a) == pdmm::strip_wall_column(b));
    REQUIRE(pdmm::trace_from_csv(a).size() == 41);
  }
}

TEST_CASE("run rejects broken configs") {
  reset_workdir();
  const fs::path bad_mirror = kWork / "bad_mirror.json";
  pdmm::write_text_file(
      bad_mirror.string(),
      "{\"m\": 4, \"n\": 3, \"p_edge\": 0.9, \"seed\": 1, \"solver\": "
      "{\"rho\": 1.0, \"tau\": 0.5, \"mirror\": \"hyperbolic\"}}");
  REQUIRE(run_cli("run --config " + quoted(bad_mirror)) == 1);

  const fs::path malformed = kWork / "malformed.json";
  pdmm::write_text_file(malformed.string(), "{\"m\": 4,");
  REQUIRE(run_cli("run --config " + quoted(malformed)) == 1);

  REQUIRE(run_cli("run --config " + quoted(kWork / "absent.json")) == 1);
}

TEST_CASE("optimize-p tightens the spectral gap") {
  reset_workdir();
  const pdmm::Graph g = pdmm::gen_erdos_renyi(7, 0.5, 23);
  const fs::path graph_path = kWork / "graph.json";
  pdmm::write_text_file(graph_path.string(), pdmm::graph_to_json(g));

  const fs::path out = kWork / "p.json";
  REQUIRE(run_cli("optimize-p --graph " + quoted(graph_path) +
                  " --iters 60 --out " + quoted(out)) == 0);
  const auto tuned =
      pdmm::averaging_from_json(pdmm::read_text_file(out.string()));
  REQUIRE(pdmm::validate_averaging(tuned, g).ok());
  const auto baseline = pdmm::build_laplacian_averaging(g);
  REQUIRE(tuned.lambda2_magnitude() <=
          baseline.lambda2_magnitude() + 1e-12);
}

TEST_CASE("report renders the traces it is given") {
  reset_workdir();
  const fs::path cfg_path = kWork / "config.json";
  pdmm::ExperimentConfig cfg;
  cfg.m = 5;
  cfg.n = 6;
  cfg.p_edge = 0.8;
  cfg.seed = 4;
  cfg.solver.rho = 1.0;
  cfg.solver.tau = 0.5;
  cfg.solver.max_iters = 30;
  pdmm::write_text_file(cfg_path.string(), pdmm::experiment_to_json(cfg));
  const fs::path dir = kWork / "run";
  REQUIRE(run_cli("run --config " + quoted(cfg_path) + " --out-dir " +
                  quoted(dir)) == 0);

  const fs::path svg_path = kWork / "report.svg";
  REQUIRE(run_cli("report --traces " + quoted(dir / "bregman.csv") + " " +
                  quoted(dir / "euclid.csv") + " --svg " +
                  quoted(svg_path)) == 0);
  REQUIRE(captured_stdout().find("bregman: 31 rows") != std::string::npos);

  const std::string svg = pdmm::read_text_file(svg_path.string());
  const auto records =
      pdmm::trace_from_csv(pdmm::read_text_file((dir / "bregman.csv").string()));
  std::size_t positive = 0;
  for (const auto& r : records)
    if (!std::isnan(r.consensus_residual) && r.consensus_residual > 0.0)
      ++positive;
  const auto series = oracle::svg_series(oracle::svg_panel(svg, "consensus"));
  REQUIRE(series.size() == 2);
  for (const auto& s : series)
    if (s.name == "bregman") REQUIRE(s.points.size() == positive);

  REQUIRE(run_cli("report --traces " + quoted(kWork / "missing.csv") +
                  " --svg " + quoted(svg_path)) == 1);
}
