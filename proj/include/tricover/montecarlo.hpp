#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tricover/engine.hpp"
#include "tricover/rng.hpp"
#include "tricover/scenario.hpp"
#include "tricover/stats.hpp"

namespace tricover {

/// Seed of run `run` at team size `team` under base seed `base`.
constexpr std::uint64_t sweep_seed(std::uint64_t base, int team, int run) {
  return derive_seed(base, Stream::Sweep, static_cast<std::uint64_t>(team) * 1000003ULL + static_cast<std::uint64_t>(run));
}

struct SweepResult {
  SweepStats stats;
  std::vector<int> team_sizes;
  std::vector<std::vector<RunMetrics>> runs;  // [size][run], in seed order
  std::vector<std::vector<double>> times;     // completion times of terminated runs
};

/// Independent seeded episodes per team size. Rows summarize terminated runs
/// only; `nonterminated` flags the rest (all-NaN row if fewer than two finish).
inline SweepResult monte_carlo(Scenario sc, const std::vector<int>& team_sizes, int runs_per_size) {
  if (runs_per_size < 2) throw std::invalid_argument("monte_carlo: runs_per_size must be >= 2");
  if (team_sizes.empty()) throw std::invalid_argument("monte_carlo: no team sizes");
  sc.poses.clear();
  SweepResult out;
  out.team_sizes = team_sizes;
  for (int team : team_sizes) {
    if (team < 1) throw std::invalid_argument("monte_carlo: team sizes must be >= 1");
    sc.robots = team;
    std::vector<RunMetrics> ms;
    std::vector<double> times;
    int failed = 0;
    for (int r = 0; r < runs_per_size; ++r) {
      auto ep = run_episode(sc, sweep_seed(sc.seed, team, r), false);
      if (ep.metrics.terminated) {
        times.push_back(ep.metrics.completion_time);
      } else {
        ++failed;
      }
      ms.push_back(std::move(ep.metrics));
    }
    if (times.size() >= 2) {
      out.stats.push_back(summarize(team, times, failed));
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      out.stats.push_back({team, nan, nan, nan, nan, runs_per_size, failed});
    }
    out.runs.push_back(std::move(ms));
    out.times.push_back(std::move(times));
  }
  return out;
}

}  // namespace tricover
