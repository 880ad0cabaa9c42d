#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <pdmm/pdmm.hpp>

namespace {

int cmd_gen(int m, int n, double p_edge, std::uint64_t seed,
            const std::string& out) {
  pdmm::Instance inst = pdmm::generate_instance(m, n, p_edge, seed);
  pdmm::AveragingMatrix p = pdmm::build_laplacian_averaging(inst.graph);
  pdmm::write_text_file(out, pdmm::instance_to_json(inst, p_edge, seed, p));
  std::cout << "instance: m=" << m << " n=" << n
            << " edges=" << inst.graph.edges.size()
            << " lambda2=" << pdmm::fmt10(p.lambda2_magnitude()) << "\n"
            << "wrote " << out << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int threads) {
  pdmm::ExperimentConfig cfg =
      pdmm::experiment_from_json(pdmm::read_text_file(config_path));
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (threads > 0) cfg.threads = threads;
  pdmm::ExperimentResult res = pdmm::run_experiment(cfg);
  std::cout << res.summary_json;
  if (!res.all_ok()) {
    for (const auto& o : res.outcomes)
      if (!o.trace.ok())
        std::cerr << pdmm::variant_name(o.variant)
                  << " failed: " << o.trace.error << "\n";
    return 2;
  }
  return 0;
}

int cmd_optimize_p(const std::string& graph_path, int iters,
                   const std::string& out) {
  pdmm::Graph g = pdmm::graph_from_json(pdmm::read_text_file(graph_path));
  pdmm::AveragingMatrix baseline = pdmm::build_laplacian_averaging(g);
  pdmm::AveragingMatrix tuned = pdmm::optimize_averaging_matrix(g, iters);
  pdmm::write_text_file(out, pdmm::averaging_to_json(tuned));
  std::cout << "lambda2: laplacian=" << pdmm::fmt10(baseline.lambda2_magnitude())
            << " optimized=" << pdmm::fmt10(tuned.lambda2_magnitude()) << "\n"
            << "wrote " << out << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& trace_paths,
               const std::string& svg_path) {
  std::vector<pdmm::TraceFile> traces;
  for (const auto& path : trace_paths) {
    pdmm::TraceFile tf;
    tf.stem = std::filesystem::path(path).stem().string();
    tf.records = pdmm::trace_from_csv(pdmm::read_text_file(path));
    traces.push_back(std::move(tf));
  }
  pdmm::write_text_file(svg_path, pdmm::render_report_svg(traces));
  std::cout << pdmm::report_text_summary(traces) << "wrote " << svg_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed consensus optimization over a graph"};
  app.require_subcommand(1);

  int gen_m = 10, gen_n = 100;
  double gen_p = 0.5;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate a random instance bundle");
  gen->add_option("--m", gen_m, "vertex count")->required();
  gen->add_option("--n", gen_n, "block dimension")->required();
  gen->add_option("--edge-prob", gen_p, "edge probability");
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--out", gen_out, "output json path")->required();

  std::string run_config, run_out_dir;
  int run_threads = 0;
  auto* runc = app.add_subcommand("run", "solve an instance described by a config");
  runc->add_option("--config", run_config, "experiment config json")->required();
  runc->add_option("--out-dir", run_out_dir, "directory for traces and summary");
  runc->add_option("--threads", run_threads, "worker threads (overrides config)");

  std::string opt_graph, opt_out;
  int opt_iters = 200;
  auto* opt = app.add_subcommand("optimize-p", "tune averaging weights for a graph");
  opt->add_option("--graph", opt_graph, "graph json")->required();
  opt->add_option("--iters", opt_iters, "subgradient iterations");
  opt->add_option("--out", opt_out, "output json path")->required();

  std::vector<std::string> rep_traces;
  std::string rep_svg;
  auto* rep = app.add_subcommand("report", "plot trace csv files");
  rep->add_option("--traces", rep_traces, "trace csv paths")
      ->required()
      ->expected(-1);
  rep->add_option("--svg", rep_svg, "output svg path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) return cmd_gen(gen_m, gen_n, gen_p, gen_seed, gen_out);
    if (*runc) return cmd_run(run_config, run_out_dir, run_threads);
    if (*opt) return cmd_optimize_p(opt_graph, opt_iters, opt_out);
    if (*rep) return cmd_report(rep_traces, rep_svg);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
