#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tricover/engine.hpp"
#include "tricover/stats.hpp"
#include "tricover/world.hpp"

namespace tricover {

/// Shortest text that parses back to the same double.
inline std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

/// RFC 4180 field quoting.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_field(fields[i]);
  }
  os << "\r\n";
}

/// Splits one RFC 4180 record (quoted fields may not span lines here).
inline std::vector<std::string> parse_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  write_csv_row(os, {"t", "robot", "x", "y", "theta", "mode"});
  for (const auto& s : traj) {
    write_csv_row(os, {fmt_double(s.t), std::to_string(s.robot), fmt_double(s.x), fmt_double(s.y), fmt_double(s.theta),
                       std::string(s.mode)});
  }
}

inline void write_stats_csv(std::ostream& os, const SweepStats& stats) {
  write_csv_row(os, {"team_size", "min", "max", "avg", "std"});
  for (const auto& r : stats) {
    write_csv_row(os, {std::to_string(r.team_size), fmt_double(r.min), fmt_double(r.max), fmt_double(r.avg), fmt_double(r.std)});
  }
}

/// Reads a stats table written by write_stats_csv.
inline SweepStats read_stats_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("stats csv: empty input");
  const auto header = parse_csv_line(line);
  if (header != std::vector<std::string>{"team_size", "min", "max", "avg", "std"}) {
    throw std::invalid_argument("stats csv: unexpected header");
  }
  SweepStats out;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto f = parse_csv_line(line);
    if (f.size() != 5) throw std::invalid_argument("stats csv: row " + std::to_string(row) + " needs 5 fields");
    SweepRow r;
    r.team_size = std::stoi(f[0]);
    r.min = std::strtod(f[1].c_str(), nullptr);
    r.max = std::strtod(f[2].c_str(), nullptr);
    r.avg = std::strtod(f[3].c_str(), nullptr);
    r.std = std::strtod(f[4].c_str(), nullptr);
    out.push_back(r);
  }
  return out;
}

/// Single-run metrics as `metric,value` rows.
inline void write_metrics_csv(std::ostream& os, const RunMetrics& m) {
  write_csv_row(os, {"metric", "value"});
  auto row = [&](const char* k, const std::string& v) { write_csv_row(os, {k, v}); };
  row("stage1_rounds", std::to_string(m.stage1_rounds));
  row("stage1_time", fmt_double(m.stage1_time));
  row("stage1_converged", m.stage1_converged ? "1" : "0");
  row("terminated", m.terminated ? "1" : "0");
  row("decisions", std::to_string(m.decisions));
  row("completion_time", fmt_double(m.completion_time));
  row("ground_truth_vertices", std::to_string(m.ground_truth_vertices));
  row("visited_vertices", std::to_string(m.visited_vertices));
  row("revisits", std::to_string(m.revisits));
  row("occupancy_conflicts", std::to_string(m.occupancy_conflicts));
  row("deleted_vertices", std::to_string(m.deleted_vertices));
  row("connectivity_violations", std::to_string(m.connectivity_violations));
  for (std::size_t i = 0; i < m.path_length.size(); ++i) row(("path_length_" + std::to_string(i)).c_str(), fmt_double(m.path_length[i]));
  for (std::size_t j = 0; j < m.target_times.size(); ++j) {
    row(("target_time_" + std::to_string(j)).c_str(), m.target_times[j] ? fmt_double(*m.target_times[j]) : "nan");
  }
}

struct SvgLayers {
  std::vector<Vec2> vertices;  // lattice vertices to mark
  std::vector<Vec2> targets;
};

/// SVG 1.1 overhead plot: workspace, obstacles, lattice vertices, one
/// coloured path per robot, targets.
inline void write_svg(std::ostream& os, const Workspace& w, const Trajectory& traj, const SvgLayers& layers = {}) {
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                            "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};
  auto [lo, hi] = w.bounds();
  for (const auto& s : traj) {
    lo = {std::min(lo.x, s.x), std::min(lo.y, s.y)};
    hi = {std::max(hi.x, s.x), std::max(hi.y, s.y)};
  }
  const double pad = 1.0;
  lo = lo - Vec2{pad, pad};
  hi = hi + Vec2{pad, pad};
  const double scale = 800.0 / std::max(hi.x - lo.x, hi.y - lo.y);
  auto X = [&](double x) { return fmt_double(std::round((x - lo.x) * scale * 100.0) / 100.0); };
  auto Y = [&](double y) { return fmt_double(std::round((hi.y - y) * scale * 100.0) / 100.0); };
  auto poly = [&](const Polygon& p, const char* fill, const char* stroke) {
    os << "<polygon points=\"";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? " " : "") << X(p[i].x) << ',' << Y(p[i].y);
    os << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"/>\n";
  };
  const double width = (hi.x - lo.x) * scale, height = (hi.y - lo.y) * scale;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt_double(std::ceil(width))
     << "\" height=\"" << fmt_double(std::ceil(height)) << "\">\n";
  poly(w.boundary(), "#ffffff", "#000000");
  for (const auto& o : w.obstacles()) poly(o, "#808080", "#404040");
  for (auto v : layers.vertices) {
    os << "<circle cx=\"" << X(v.x) << "\" cy=\"" << Y(v.y) << "\" r=\"2\" fill=\"#999999\"/>\n";
  }
  std::map<int, std::vector<const TrajectorySample*>> by_robot;
  for (const auto& s : traj) by_robot[s.robot].push_back(&s);
  for (const auto& [id, pts] : by_robot) {
    const char* color = kColors[static_cast<std::size_t>(id) % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? " " : "") << X(pts[i]->x) << ',' << Y(pts[i]->y);
    os << "\"/>\n";
    os << "<circle cx=\"" << X(pts.back()->x) << "\" cy=\"" << Y(pts.back()->y) << "\" r=\"4\" fill=\"" << color << "\"/>\n";
  }
  for (auto t : layers.targets) {
    os << "<rect x=\"" << X(t.x - 0.3) << "\" y=\"" << Y(t.y + 0.3) << "\" width=\"" << fmt_double(0.6 * scale)
       << "\" height=\"" << fmt_double(0.6 * scale) << "\" fill=\"#ff0000\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace tricover
