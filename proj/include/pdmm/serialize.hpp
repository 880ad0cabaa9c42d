#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdmm/averaging.hpp"
#include "pdmm/diagnostics.hpp"
#include "pdmm/graph.hpp"
#include "pdmm/solver.hpp"
#include "pdmm/stacked.hpp"

namespace pdmm {

// All floating point output goes through here: 17 significant digits, enough
// to round-trip any double, and stable across runs for byte-level diffing.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("short write to " + path);
}

inline std::string graph_to_json(const Graph& g) {
  std::string s = "{\n  \"m\": " + std::to_string(g.m) + ",\n  \"edges\": [";
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (e) s += ", ";
    s += "[" + std::to_string(g.edges[e].first) + ", " +
         std::to_string(g.edges[e].second) + "]";
  }
  s += "]\n}\n";
  return s;
}

inline Graph graph_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const int m = j.at("m").get<int>();
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges"))
    edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return Graph::from_edges(m, std::move(edges));
}

inline std::string averaging_to_json(const AveragingMatrix& p) {
  const int m = p.size();
  std::string s = "{\n  \"m\": " + std::to_string(m) + ",\n  \"rows\": [\n";
  for (int i = 0; i < m; ++i) {
    s += "    [";
    for (int j = 0; j < m; ++j) {
      if (j) s += ", ";
      s += fmt17(p.entry(i, j));
    }
    s += i + 1 < m ? "],\n" : "]\n";
  }
  s += "  ]\n}\n";
  return s;
}

inline AveragingMatrix averaging_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const int m = j.at("m").get<int>();
  const auto& rows = j.at("rows");
  if (static_cast<int>(rows.size()) != m)
    throw std::invalid_argument("averaging matrix: row count mismatch");
  Matrix p(m);
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(rows[i].size()) != m)
      throw std::invalid_argument("averaging matrix: ragged rows");
    for (int k = 0; k < m; ++k) p.at(i, k) = rows[i][k].get<double>();
  }
  return AveragingMatrix::from_entries(std::move(p));
}

inline std::string stacked_to_json(const StackedPoint& x) {
  std::string s = "{\n  \"m\": " + std::to_string(x.m) +
                  ",\n  \"n\": " + std::to_string(x.n) + ",\n  \"data\": [";
  for (std::size_t k = 0; k < x.data.size(); ++k) {
    if (k) s += ", ";
    s += fmt17(x.data[k]);
  }
  s += "]\n}\n";
  return s;
}

inline StackedPoint stacked_from_json(const nlohmann::json& j) {
  StackedPoint x(j.at("m").get<int>(), j.at("n").get<int>());
  const auto& data = j.at("data");
  if (data.size() != x.data.size())
    throw std::invalid_argument("stacked point: data length mismatch");
  for (std::size_t k = 0; k < x.data.size(); ++k)
    x.data[k] = data[k].get<double>();
  return x;
}

inline StackedPoint stacked_from_json_text(const std::string& text) {
  return stacked_from_json(nlohmann::json::parse(text));
}

inline std::string mirror_name(MirrorKind k) {
  return k == MirrorKind::kNegativeEntropy ? "entropy" : "euclidean";
}

inline MirrorKind mirror_from_name(const std::string& name) {
  if (name == "entropy") return MirrorKind::kNegativeEntropy;
  if (name == "euclidean") return MirrorKind::kSquaredEuclidean;
  throw std::invalid_argument("unknown mirror map: " + name);
}

inline std::string solver_config_to_json(const SolverConfig& cfg) {
  std::string s = "{\n";
  s += "  \"rho\": " + fmt17(cfg.rho) + ",\n";
  s += "  \"tau\": " + fmt17(cfg.tau) + ",\n";
  if (cfg.delta.size() == 1) {
    s += "  \"delta\": " + fmt17(cfg.delta[0]) + ",\n";
  } else {
    s += "  \"delta\": [";
    for (std::size_t i = 0; i < cfg.delta.size(); ++i) {
      if (i) s += ", ";
      s += fmt17(cfg.delta[i]);
    }
    s += "],\n";
  }
  s += "  \"gamma\": " + fmt17(cfg.gamma) + ",\n";
  s += "  \"mirror\": \"" + mirror_name(cfg.mirror.kind) + "\",\n";
  s += "  \"max_iters\": " + std::to_string(cfg.max_iters) + ",\n";
  s += "  \"stop_tol\": " + fmt17(cfg.stop_tol) + ",\n";
  s += "  \"seed\": " + std::to_string(cfg.seed) + ",\n";
  s += std::string("  \"strict\": ") + (cfg.strict ? "true" : "false") + "\n";
  s += "}\n";
  return s;
}

inline SolverConfig solver_config_from_json(const nlohmann::json& j) {
  SolverConfig cfg;
  cfg.rho = j.at("rho").get<double>();
  cfg.tau = j.at("tau").get<double>();
  if (j.contains("delta")) {
    if (j["delta"].is_array()) {
      cfg.delta.clear();
      for (const auto& d : j["delta"]) cfg.delta.push_back(d.get<double>());
      if (cfg.delta.empty())
        throw std::invalid_argument("config: empty delta list");
    } else {
      cfg.delta = {j["delta"].get<double>()};
    }
  }
  if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
  cfg.mirror = MirrorMap{mirror_from_name(j.at("mirror").get<std::string>())};
  cfg.prox_kind = cfg.mirror.kind;
  if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<long>();
  if (j.contains("stop_tol")) cfg.stop_tol = j["stop_tol"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("strict")) cfg.strict = j["strict"].get<bool>();
  return cfg;
}

inline const char* kTraceHeader = "t,objective_gap,consensus_residual,R,V,wall_nanos";

inline std::string trace_to_csv(const std::vector<DiagnosticsRecord>& records) {
  std::string s = kTraceHeader;
  s += "\n";
  const auto field = [](double v) {
    return std::isnan(v) ? std::string() : fmt17(v);
  };
  for (const auto& r : records) {
    s += std::to_string(r.t);
    s += ",";
    s += field(r.objective_gap);
    s += ",";
    s += field(r.consensus_residual);
    s += ",";
    s += field(r.residual);
    s += ",";
    s += field(r.lyapunov);
    s += ",";
    s += std::to_string(r.wall_nanos);
    s += "\n";
  }
  return s;
}

inline std::vector<DiagnosticsRecord> trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw std::invalid_argument("trace csv: bad header");
  std::vector<DiagnosticsRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(pos));
        break;
      }
      cells.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (cells.size() != 6)
      throw std::invalid_argument("trace csv: bad row: " + line);
    // stod rejects subnormals (ERANGE); from_chars parses them exactly.
    const auto num = [&line](const std::string& c) {
      if (c.empty()) return kMissing;
      double v = 0.0;
      const auto [end, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || end != c.data() + c.size())
        throw std::invalid_argument("trace csv: bad number: " + line);
      return v;
    };
    DiagnosticsRecord r;
    r.t = std::stol(cells[0]);
    r.objective_gap = num(cells[1]);
    r.consensus_residual = num(cells[2]);
    r.residual = num(cells[3]);
    r.lyapunov = num(cells[4]);
    r.wall_nanos = std::stoll(cells[5]);
    records.push_back(r);
  }
  return records;
}

// Strips the wall_nanos column so traces can be compared across runs.
inline std::string strip_wall_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    const std::size_t cut = line.rfind(',');
    out += cut == std::string::npos ? line : line.substr(0, cut);
    out += "\n";
  }
  return out;
}

}  // namespace pdmm
