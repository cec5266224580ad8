#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tricover/tricover.hpp"

namespace fs = std::filesystem;
using namespace tricover;

namespace {

/// "1..15", "1,3,5" or a single number.
std::vector<int> parse_teams(const std::string& spec) {
  std::vector<int> out;
  if (auto dots = spec.find(".."); dots != std::string::npos) {
    const int a = std::stoi(spec.substr(0, dots)), b = std::stoi(spec.substr(dots + 2));
    if (a < 1 || b < a) throw std::invalid_argument("--teams: bad range '" + spec + "'");
    for (int k = a; k <= b; ++k) out.push_back(k);
    return out;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const int k = std::stoi(tok);
    if (k < 1) throw std::invalid_argument("--teams: sizes must be >= 1");
    out.push_back(k);
  }
  if (out.empty()) throw std::invalid_argument("--teams: empty");
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  auto os = open_output(p);
  os << text;
  if (!os) throw std::runtime_error("write failed for '" + p.string() + "'");
}

std::vector<Vec2> map_points(const TopoMap& m) {
  std::vector<Vec2> pts;
  for (const auto& [c, s] : m.entries()) pts.push_back(m.point(c));
  return pts;
}

int cmd_run(const std::string& scenario_path, std::uint64_t seed, const fs::path& out) {
  const Scenario sc = load_scenario(scenario_path);
  if (sc.formation) {
    const auto ep = run_formation(sc, seed);
    std::ostringstream traj;
    write_trajectory_csv(traj, ep.trajectory);
    write_file(out / "trajectory.csv", traj.str());
    std::ostringstream svg;
    write_svg(svg, sc.workspace, ep.trajectory);
    write_file(out / "plot.svg", svg.str());
    std::printf("formed=%d offset_error=%.4f heading_spread=%.4f penetrations=%zu\n", ep.metrics.formed() ? 1 : 0,
                ep.metrics.final_offset_error, ep.metrics.final_heading_spread, ep.metrics.penetrations);
    return 0;
  }
  const auto ep = run_episode(sc, seed);
  std::ostringstream traj, metrics, map, svg;
  write_trajectory_csv(traj, ep.trajectory);
  write_metrics_csv(metrics, ep.metrics);
  write_map_csv(map, ep.maps.front());
  SvgLayers layers;
  layers.vertices = map_points(ep.maps.front());
  if (auto* t = std::get_if<Targets>(&sc.mission)) layers.targets = t->positions;
  write_svg(svg, sc.workspace, ep.trajectory, layers);
  write_file(out / "trajectory.csv", traj.str());
  write_file(out / "metrics.csv", metrics.str());
  write_file(out / "map.csv", map.str());
  write_file(out / "plot.svg", svg.str());
  const auto& m = ep.metrics;
  std::printf("terminated=%d completion_time=%.1f s decisions=%d coverage=%zu/%zu stage1_rounds=%d\n",
              m.terminated ? 1 : 0, m.completion_time, m.decisions, m.visited_vertices, m.ground_truth_vertices,
              m.stage1_rounds);
  return m.terminated ? 0 : 3;
}

int cmd_sweep(const std::string& scenario_path, const std::string& teams, int runs, const std::string& policy,
              const std::string& out) {
  Scenario sc = load_scenario(scenario_path);
  if (!policy.empty()) sc.policy = parse_policy(policy);
  const auto res = monte_carlo(sc, parse_teams(teams), runs);
  std::ostringstream csv;
  write_stats_csv(csv, res.stats);
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(out, csv.str());
  }
  int failed = 0;
  for (const auto& r : res.stats) failed += r.nonterminated;
  if (failed) std::fprintf(stderr, "warning: %d runs hit the step cap\n", failed);
  return failed ? 3 : 0;
}

int cmd_compare(const std::string& scenario_path, const std::string& teams, int runs, const std::string& out) {
  Scenario sc = load_scenario(scenario_path);
  const auto sizes = parse_teams(teams);
  std::vector<SweepResult> res;
  for (Policy p : {Policy::Random, Policy::SemiRandom, Policy::Modified}) {
    sc.policy = p;
    res.push_back(monte_carlo(sc, sizes, runs));
  }
  std::ostringstream csv;
  write_csv_row(csv, {"team_size", "random_avg", "random_std", "semirandom_avg", "semirandom_std", "modified_avg",
                      "modified_std", "semirandom_over_random", "modified_over_random"});
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const auto &r = res[0].stats[k], &s = res[1].stats[k], &m = res[2].stats[k];
    write_csv_row(csv, {std::to_string(sizes[k]), fmt_double(r.avg), fmt_double(r.std), fmt_double(s.avg), fmt_double(s.std),
                        fmt_double(m.avg), fmt_double(m.std), fmt_double(s.avg / r.avg), fmt_double(m.avg / r.avg)});
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(out, csv.str());
  }
  return 0;
}

int cmd_formation(const std::string& config, const std::string& obstacles, std::uint64_t seed, int robots,
                  double duration, bool anonymous, const fs::path& out) {
  const Scenario sc =
      formation_scenario(config, obstacles.empty() ? std::vector<Polygon>{} : load_obstacles(obstacles), robots, duration, anonymous);
  const auto ep = run_formation(sc, seed);
  std::ostringstream traj, svg, metrics;
  write_trajectory_csv(traj, ep.trajectory);
  write_svg(svg, sc.workspace, ep.trajectory);
  const auto& m = ep.metrics;
  write_csv_row(metrics, {"metric", "value"});
  write_csv_row(metrics, {"formed", m.formed() ? "1" : "0"});
  write_csv_row(metrics, {"formed_time", m.formed_time ? fmt_double(*m.formed_time) : "nan"});
  write_csv_row(metrics, {"final_offset_error", fmt_double(m.final_offset_error)});
  write_csv_row(metrics, {"final_heading_spread", fmt_double(m.final_heading_spread)});
  write_csv_row(metrics, {"penetrations", std::to_string(m.penetrations)});
  write_csv_row(metrics, {"boundary_episodes", std::to_string(m.boundary_episodes)});
  write_csv_row(metrics, {"standoff_min", fmt_double(m.standoff_samples ? m.standoff_min : std::nan(""))});
  write_csv_row(metrics, {"standoff_max", fmt_double(m.standoff_samples ? m.standoff_max : std::nan(""))});
  write_csv_row(metrics, {"max_abs_omega", fmt_double(m.max_abs_omega)});
  write_csv_row(metrics, {"min_v", fmt_double(m.min_v)});
  write_csv_row(metrics, {"max_v", fmt_double(m.max_v)});
  write_file(out / "trajectory.csv", traj.str());
  write_file(out / "plot.svg", svg.str());
  write_file(out / "metrics.csv", metrics.str());
  std::printf("formed=%d offset_error=%.4f heading_spread=%.4f penetrations=%zu boundary_episodes=%zu\n",
              m.formed() ? 1 : 0, m.final_offset_error, m.final_heading_spread, m.penetrations, m.boundary_episodes);
  return m.formed() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot triangular-grid search and formation simulator"};
  app.require_subcommand(1);

  std::string scenario, teams = "1..15", policy, out_file, config = "edge", obstacles;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int runs = 20, robots = 5;
  double duration = 300.0;
  bool anonymous = false;

  auto* run = app.add_subcommand("run", "Run one episode and write trajectory, metrics, map and plot");
  run->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Root seed");
  run->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo over team sizes; prints team_size,min,max,avg,std");
  sweep->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--teams", teams, "Team sizes: a..b or a,b,c");
  sweep->add_option("--runs", runs, "Runs per team size")->check(CLI::Range(2, 1000000));
  sweep->add_option("--policy", policy, "random|semirandom|modified (default: scenario)")
      ->check(CLI::IsMember({"random", "semirandom", "modified"}));
  sweep->add_option("--out", out_file, "CSV file (default: stdout)");

  auto* compare = app.add_subcommand("compare", "Three-policy comparison table");
  compare->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  compare->add_option("--teams", teams, "Team sizes: a..b or a,b,c");
  compare->add_option("--runs", runs, "Runs per team size")->check(CLI::Range(2, 1000000));
  compare->add_option("--out", out_file, "CSV file (default: stdout)");

  auto* form = app.add_subcommand("formation", "Formation building with obstacle avoidance");
  form->add_option("--config", config, "edge|line|arc")->check(CLI::IsMember({"edge", "line", "arc"}));
  form->add_option("--obstacles", obstacles, "Obstacle course JSON file")->check(CLI::ExistingFile);
  form->add_option("--seed", seed, "Root seed");
  form->add_option("--robots", robots, "Team size")->check(CLI::Range(1, 64));
  form->add_option("--duration", duration, "Simulated seconds")->check(CLI::PositiveNumber);
  form->add_flag("--anonymous", anonymous, "Resolve slots with the randomized assignment");
  form->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(scenario, seed, out_dir);
    if (*sweep) return cmd_sweep(scenario, teams, runs, policy, out_file);
    if (*compare) return cmd_compare(scenario, teams, runs, out_file);
    if (*form) return cmd_formation(config, obstacles, seed, robots, duration, anonymous, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
