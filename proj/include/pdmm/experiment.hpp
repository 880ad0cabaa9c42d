#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdmm/random.hpp"
#include "pdmm/run.hpp"
#include "pdmm/serialize.hpp"

namespace pdmm {

// Cost vectors are drawn from a stream decoupled from the topology stream,
// so regenerating the graph never shifts the costs.
inline constexpr std::uint64_t kCostStreamSalt = 0x9e3779b97f4a7c15ULL;

struct Instance {
  Graph graph;
  StackedPoint costs;
};

inline Instance generate_instance(int m, int n, double p_edge,
                                  std::uint64_t seed) {
  Instance inst{gen_erdos_renyi(m, p_edge, seed), StackedPoint(m, n)};
  NormalSampler normals(seed ^ kCostStreamSalt);
  for (int i = 0; i < m; ++i) {
    auto block = inst.costs.block(i);
    for (int k = 0; k < n; ++k) block[k] = normals.next();
  }
  return inst;
}

inline ProblemInstance linear_simplex_problem(const StackedPoint& costs) {
  ProblemInstance prob;
  prob.m = costs.m;
  prob.n = costs.n;
  prob.feasible = FeasibleSet::probability_simplex(costs.n);
  for (int i = 0; i < costs.m; ++i) {
    const auto block = costs.block(i);
    prob.objectives.push_back(
        LocalObjective::linear({block.begin(), block.end()}));
  }
  return prob;
}

inline std::string instance_to_json(const Instance& inst, double p_edge,
                                    std::uint64_t seed,
                                    const AveragingMatrix& p) {
  std::string s = "{\n";
  s += "\"m\": " + std::to_string(inst.graph.m) + ",\n";
  s += "\"n\": " + std::to_string(inst.costs.n) + ",\n";
  s += "\"seed\": " + std::to_string(seed) + ",\n";
  s += "\"p_edge\": " + fmt17(p_edge) + ",\n";
  s += "\"graph\": " + graph_to_json(inst.graph) + ",\n";
  s += "\"P\": " + averaging_to_json(p) + ",\n";
  s += "\"costs\": " + stacked_to_json(inst.costs);
  s += "}\n";
  return s;
}

struct ExperimentConfig {
  int m = 10;
  int n = 100;
  double p_edge = 0.5;
  std::uint64_t seed = 1;
  SolverConfig solver;
  std::vector<Variant> variants{Variant::kBregman, Variant::kEuclid};
  std::string p_matrix = "laplacian";
  std::string out_dir;
  int threads = 1;
  int optimize_iters = 0;

  void validate() const {
    if (m < 2) throw std::invalid_argument("experiment: m must be >= 2");
    if (n < 1) throw std::invalid_argument("experiment: n must be >= 1");
    if (!(p_edge > 0.0 && p_edge <= 1.0))
      throw std::invalid_argument("experiment: p_edge must be in (0, 1]");
    if (variants.empty())
      throw std::invalid_argument("experiment: no variants requested");
    if (p_matrix != "laplacian" && p_matrix != "optimized")
      throw std::invalid_argument("experiment: p_matrix must be laplacian or optimized");
    if (threads < 1) throw std::invalid_argument("experiment: threads must be >= 1");
    if (optimize_iters < 0)
      throw std::invalid_argument("experiment: optimize_iters must be >= 0");
  }
};

inline Variant variant_from_name(const std::string& name) {
  if (name == "euclid") return Variant::kEuclid;
  if (name == "bregman") return Variant::kBregman;
  throw std::invalid_argument("unknown variant: " + name);
}

inline ExperimentConfig experiment_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  cfg.m = j.at("m").get<int>();
  cfg.n = j.at("n").get<int>();
  cfg.p_edge = j.at("p_edge").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.solver = solver_config_from_json(j.at("solver"));
  if (j.contains("variants")) {
    cfg.variants.clear();
    for (const auto& v : j["variants"])
      cfg.variants.push_back(variant_from_name(v.get<std::string>()));
  }
  if (j.contains("p_matrix")) cfg.p_matrix = j["p_matrix"].get<std::string>();
  if (j.contains("t_max")) cfg.solver.max_iters = j["t_max"].get<long>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  if (j.contains("optimize_iters"))
    cfg.optimize_iters = j["optimize_iters"].get<int>();
  return cfg;
}

inline std::string experiment_to_json(const ExperimentConfig& cfg) {
  std::string s = "{\n";
  s += "\"m\": " + std::to_string(cfg.m) + ",\n";
  s += "\"n\": " + std::to_string(cfg.n) + ",\n";
  s += "\"p_edge\": " + fmt17(cfg.p_edge) + ",\n";
  s += "\"seed\": " + std::to_string(cfg.seed) + ",\n";
  s += "\"solver\": " + solver_config_to_json(cfg.solver) + ",\n";
  s += "\"variants\": [";
  for (std::size_t i = 0; i < cfg.variants.size(); ++i) {
    if (i) s += ", ";
    s += std::string("\"") + variant_name(cfg.variants[i]) + "\"";
  }
  s += "],\n";
  s += "\"p_matrix\": \"" + cfg.p_matrix + "\",\n";
  if (!cfg.out_dir.empty()) s += "\"out_dir\": \"" + cfg.out_dir + "\",\n";
  s += "\"threads\": " + std::to_string(cfg.threads) + ",\n";
  s += "\"optimize_iters\": " + std::to_string(cfg.optimize_iters) + "\n";
  s += "}\n";
  return s;
}

// First t >= 1 whose consensus residual is at or below thr, -1 if never
// reached. t=0 is skipped: the default starts are trivially consensual, so
// counting from the first update measures actual work.
inline long first_consensus_at_or_below(
    const std::vector<DiagnosticsRecord>& records, double thr) {
  for (const auto& r : records)
    if (r.t >= 1 && !std::isnan(r.consensus_residual) &&
        r.consensus_residual <= thr)
      return r.t;
  return -1;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

struct VariantOutcome {
  Variant variant;
  RunTrace trace;
  std::string csv_path;
};

struct ExperimentResult {
  Graph graph;
  AveragingMatrix p;
  ReferenceSolution reference;
  std::optional<SaddleCertificate> certificate;
  std::vector<VariantOutcome> outcomes;
  std::string summary_json;

  bool all_ok() const {
    for (const auto& o : outcomes)
      if (!o.trace.ok()) return false;
    return true;
  }
};

inline std::string summarize_experiment(const ExperimentConfig& cfg,
                                        const ExperimentResult& res) {
  std::string s = "{\n";
  s += "\"m\": " + std::to_string(cfg.m) + ",\n";
  s += "\"n\": " + std::to_string(cfg.n) + ",\n";
  s += "\"p_edge\": " + fmt17(cfg.p_edge) + ",\n";
  s += "\"seed\": " + std::to_string(cfg.seed) + ",\n";
  s += "\"p_matrix\": \"" + cfg.p_matrix + "\",\n";
  s += "\"lambda2\": " + fmt17(res.p.lambda2_magnitude()) + ",\n";
  s += "\"f_star\": " + fmt17(res.reference.f_star) + ",\n";
  s += std::string("\"certificate\": ") +
       (res.certificate ? "true" : "false") + ",\n";
  s += "\"variants\": {\n";
  for (std::size_t v = 0; v < res.outcomes.size(); ++v) {
    const auto& o = res.outcomes[v];
    const auto& recs = o.trace.records;
    s += std::string("\"") + variant_name(o.variant) + "\": {\n";
    s += "  \"iterations\": " + std::to_string(o.trace.iterations) + ",\n";
    if (!recs.empty()) {
      const auto& last = recs.back();
      s += "  \"wall_nanos\": " + std::to_string(last.wall_nanos) + ",\n";
      s += "  \"final_objective_gap\": " +
           (std::isnan(last.objective_gap) ? "null" : fmt17(last.objective_gap)) +
           ",\n";
      s += "  \"final_consensus_residual\": " +
           (std::isnan(last.consensus_residual)
                ? "null"
                : fmt17(last.consensus_residual)) +
           ",\n";
    }
    s += "  \"iters_to_consensus\": {";
    const double thrs[] = {1e-2, 1e-4, 1e-6};
    const char* names[] = {"1e-2", "1e-4", "1e-6"};
    for (int k = 0; k < 3; ++k) {
      if (k) s += ", ";
      s += std::string("\"") + names[k] +
           "\": " + std::to_string(first_consensus_at_or_below(recs, thrs[k]));
    }
    s += "},\n";
    s += "  \"error\": " +
         (o.trace.error.empty() ? std::string("null")
                                : "\"" + json_escape(o.trace.error) + "\"") +
         "\n";
    s += v + 1 < res.outcomes.size() ? "},\n" : "}\n";
  }
  s += "}\n}\n";
  return s;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Instance inst = generate_instance(cfg.m, cfg.n, cfg.p_edge, cfg.seed);
  AveragingMatrix p = cfg.p_matrix == "optimized"
                          ? optimize_averaging_matrix(
                                inst.graph,
                                cfg.optimize_iters > 0 ? cfg.optimize_iters : 200)
                          : build_laplacian_averaging(inst.graph);
  ProblemInstance problem = linear_simplex_problem(inst.costs);

  ExperimentResult res{std::move(inst.graph), std::move(p),
                       reference_solution(problem), std::nullopt,
                       {}, {}};

  if (problem.all_linear()) {
    try {
      res.certificate =
          certificate_search(problem, res.p, res.reference.x_block);
    } catch (const std::exception&) {
      res.certificate = std::nullopt;
    }
  }

  const bool have_dir = !cfg.out_dir.empty();
  if (have_dir) std::filesystem::create_directories(cfg.out_dir);

  for (Variant v : cfg.variants) {
    RunOptions opts;
    opts.threads = cfg.threads;
    opts.f_star = res.reference.f_star;
    if (res.certificate) opts.certificate = &*res.certificate;
    VariantOutcome out;
    out.variant = v;
    out.trace = run(problem, res.p, cfg.solver, v, opts);
    if (have_dir) {
      out.csv_path = (std::filesystem::path(cfg.out_dir) /
                      (std::string(variant_name(v)) + ".csv"))
                         .string();
      write_text_file(out.csv_path, trace_to_csv(out.trace.records));
    }
    res.outcomes.push_back(std::move(out));
  }

  res.summary_json = summarize_experiment(cfg, res);
  if (have_dir)
    write_text_file(
        (std::filesystem::path(cfg.out_dir) / "summary.json").string(),
        res.summary_json);
  return res;
}

struct TraceFile {
  std::string stem;
  std::vector<DiagnosticsRecord> records;
};

inline std::string fmt10(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

namespace detail {

struct PanelSpec {
  std::string id;
  std::string title;
  double DiagnosticsRecord::*field;
  double y_offset;
};

// Log-scale panel with gridlines that carry their data coordinates, so a
// plot can be read back numerically without guessing at the axis mapping.
inline void render_panel(std::string& svg, const PanelSpec& spec,
                         const std::vector<TraceFile>& traces,
                         bool with_legend) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
  const double x0 = 70, x1 = 1020;
  const double ytop = spec.y_offset + 46, ybot = spec.y_offset + 380;

  long tmax = 1;
  double vmin = 0.0, vmax = 0.0;
  bool any = false;
  for (const auto& tf : traces) {
    for (const auto& r : tf.records) {
      tmax = std::max(tmax, r.t);
      const double v = r.*(spec.field);
      if (std::isnan(v) || v <= 0.0) continue;
      if (!any || v < vmin) vmin = v;
      if (!any || v > vmax) vmax = v;
      any = true;
    }
  }

  svg += "<g id=\"panel-" + spec.id + "\">\n";
  svg += "<text x=\"" + fmt10(x0) + "\" y=\"" + fmt10(spec.y_offset + 24) +
         "\" font-size=\"16\" fill=\"#222\">" + spec.title + "</text>\n";
  svg += "<rect x=\"" + fmt10(x0) + "\" y=\"" + fmt10(ytop) + "\" width=\"" +
         fmt10(x1 - x0) + "\" height=\"" + fmt10(ybot - ytop) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";

  if (!any) {
    svg += "<text x=\"" + fmt10((x0 + x1) / 2) + "\" y=\"" +
           fmt10((ytop + ybot) / 2) +
           "\" font-size=\"14\" fill=\"#888\">no positive values</text>\n</g>\n";
    return;
  }

  int lo = static_cast<int>(std::floor(std::log10(vmin)));
  int hi = static_cast<int>(std::ceil(std::log10(vmax)));
  if (hi == lo) ++hi;
  const auto ymap = [&](double v) {
    return ybot - (std::log10(v) - lo) / (hi - lo) * (ybot - ytop);
  };
  const auto xmap = [&](long t) {
    return x0 + static_cast<double>(t) / static_cast<double>(tmax) * (x1 - x0);
  };

  const int stride = std::max(1, (hi - lo + 11) / 12);
  for (int e = lo; e <= hi; e += (e + stride > hi && e < hi) ? hi - e : stride) {
    const double y = ymap(std::pow(10.0, e));
    svg += "<line class=\"grid\" data-log10=\"" + std::to_string(e) +
           "\" x1=\"" + fmt10(x0) + "\" x2=\"" + fmt10(x1) + "\" y1=\"" +
           fmt10(y) + "\" y2=\"" + fmt10(y) +
           "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + fmt10(x0 - 8) + "\" y=\"" + fmt10(y + 4) +
           "\" font-size=\"11\" text-anchor=\"end\" fill=\"#555\">1e" +
           std::to_string(e) + "</text>\n";
    if (e == hi) break;
  }
  long prev_tick = -1;
  for (int k = 0; k <= 4; ++k) {
    const long t = tmax * k / 4;
    if (t == prev_tick) continue;
    prev_tick = t;
    const double x = xmap(t);
    svg += "<line class=\"grid\" data-t=\"" + std::to_string(t) + "\" x1=\"" +
           fmt10(x) + "\" x2=\"" + fmt10(x) + "\" y1=\"" + fmt10(ytop) +
           "\" y2=\"" + fmt10(ybot) + "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + fmt10(x) + "\" y=\"" + fmt10(ybot + 16) +
           "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#555\">" +
           std::to_string(t) + "</text>\n";
  }

  for (std::size_t s = 0; s < traces.size(); ++s) {
    const char* color = kPalette[s % 6];
    std::string points;
    for (const auto& r : traces[s].records) {
      const double v = r.*(spec.field);
      if (std::isnan(v) || v <= 0.0) continue;
      if (!points.empty()) points += " ";
      points += fmt10(xmap(r.t)) + "," + fmt10(ymap(v));
    }
    svg += "<polyline class=\"series\" data-series=\"" + traces[s].stem +
           "\" fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    if (with_legend) {
      const double ly = ytop + 14 + 16 * static_cast<double>(s);
      svg += "<line x1=\"" + fmt10(x1 - 170) + "\" x2=\"" + fmt10(x1 - 140) +
             "\" y1=\"" + fmt10(ly) + "\" y2=\"" + fmt10(ly) + "\" stroke=\"" +
             std::string(color) + "\" stroke-width=\"2\"/>\n";
      svg += "<text x=\"" + fmt10(x1 - 132) + "\" y=\"" + fmt10(ly + 4) +
             "\" font-size=\"12\" fill=\"#222\">" + traces[s].stem +
             "</text>\n";
    }
  }
  svg += "</g>\n";
}

}  // namespace detail

inline std::string render_report_svg(const std::vector<TraceFile>& traces) {
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1060\" "
      "height=\"840\" viewBox=\"0 0 1060 840\" font-family=\"sans-serif\">\n"
      "<rect x=\"0\" y=\"0\" width=\"1060\" height=\"840\" fill=\"#fff\"/>\n";
  detail::render_panel(
      svg, {"gap", "objective gap", &DiagnosticsRecord::objective_gap, 0.0},
      traces, true);
  detail::render_panel(svg,
                       {"consensus", "consensus residual",
                        &DiagnosticsRecord::consensus_residual, 420.0},
                       traces, false);
  svg += "</svg>\n";
  return svg;
}

inline std::string report_text_summary(const std::vector<TraceFile>& traces) {
  std::string out;
  for (const auto& tf : traces) {
    out += tf.stem + ": " + std::to_string(tf.records.size()) + " rows";
    if (!tf.records.empty()) {
      const auto& last = tf.records.back();
      out += ", final t=" + std::to_string(last.t);
      if (!std::isnan(last.objective_gap))
        out += ", gap=" + fmt10(last.objective_gap);
      if (!std::isnan(last.consensus_residual))
        out += ", consensus=" + fmt10(last.consensus_residual);
    }
    out += "\n";
  }
  return out;
}

}  // namespace pdmm
