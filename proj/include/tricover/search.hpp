#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tricover/geometry.hpp"
#include "tricover/rng.hpp"
#include "tricover/topomap.hpp"
#include "tricover/trigrid.hpp"

namespace tricover {

enum class Policy { Random, SemiRandom, Modified };

inline std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::Random: return "random";
    case Policy::SemiRandom: return "semirandom";
    case Policy::Modified: return "modified";
  }
  return "?";
}

inline Policy parse_policy(std::string_view s) {
  if (s == "random") return Policy::Random;
  if (s == "semirandom") return Policy::SemiRandom;
  if (s == "modified") return Policy::Modified;
  throw std::invalid_argument("unknown policy '" + std::string(s) + "'");
}

struct FullCoverage {};

struct Targets {
  std::vector<Vec2> positions;
};

/// Continuous patrol. For the modified policy every `reset_period` decision
/// steps all visited vertices become unvisited again; 0 disables resets.
struct Patrol {
  int reset_period{0};
};

using Mission = std::variant<FullCoverage, Targets, Patrol>;

inline void validate(const Mission& m) {
  if (auto* t = std::get_if<Targets>(&m); t && t->positions.empty()) {
    throw std::invalid_argument("targets mission needs at least one target");
  }
  if (auto* p = std::get_if<Patrol>(&m); p && p->reset_period < 0) {
    throw std::invalid_argument("patrol reset_period must be >= 0");
  }
}

/// Detection flags per target; flags never clear.
struct TargetLedger {
  std::vector<bool> detected;
  std::vector<double> detect_time;  // seconds, valid where detected

  explicit TargetLedger(std::size_t n = 0) : detected(n, false), detect_time(n, 0.0) {}

  bool all_detected() const {
    for (bool d : detected) {
      if (!d) return false;
    }
    return true;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (bool d : detected) n += d;
    return n;
  }
};

/// Six-neighbours of `current` present in the map.
inline std::vector<LatticeCoord> detected_neighbors(const TopoMap& map, LatticeCoord current) {
  std::vector<LatticeCoord> out;
  for (auto c : six_neighbors(current)) {
    if (map.contains(c)) out.push_back(c);
  }
  return out;
}

/// Random rule: uniform over detected neighbours while unvisited vertices
/// remain. `keep_walking` continues the walk after that (targets, patrol).
/// Returns nullopt to stay.
inline std::optional<LatticeCoord> next_waypoint_random(const TopoMap& map, LatticeCoord current, Rng& rng,
                                                        bool keep_walking = false) {
  if (!keep_walking && map.unvisited_count() == 0) return std::nullopt;
  const auto nbrs = detected_neighbors(map, current);
  if (nbrs.empty()) return std::nullopt;
  return nbrs[rng.below(nbrs.size())];
}

/// Semi-random rule: uniform over unvisited neighbours if any, otherwise
/// uniform over all detected neighbours while unvisited vertices remain.
inline std::optional<LatticeCoord> next_waypoint_semirandom(const TopoMap& map, LatticeCoord current, Rng& rng,
                                                            bool keep_walking = false) {
  const auto nbrs = detected_neighbors(map, current);
  std::vector<LatticeCoord> fresh;
  for (auto c : nbrs) {
    if (map.state(c) == VertexState::Detected) fresh.push_back(c);
  }
  if (!fresh.empty()) return fresh[rng.below(fresh.size())];
  if (!keep_walking && map.unvisited_count() == 0) return std::nullopt;
  if (nbrs.empty()) return std::nullopt;
  return nbrs[rng.below(nbrs.size())];
}

/// Modified rule: the nearest unvisited vertex anywhere in the map.
inline std::optional<LatticeCoord> next_waypoint_modified(const TopoMap& map, Vec2 pose) {
  return nearest_unvisited(map, pose);
}

/// Marks targets within `r_s` of any robot. Returns the number newly detected.
inline std::size_t detect_targets(TargetLedger& ledger, std::span<const Vec2> targets,
                                  std::span<const Vec2> robots, double r_s, double now) {
  if (ledger.detected.size() != targets.size()) throw std::invalid_argument("detect_targets: ledger size mismatch");
  std::size_t fresh = 0;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    if (ledger.detected[j]) continue;
    for (auto p : robots) {
      if (distance(p, targets[j]) <= r_s) {
        ledger.detected[j] = true;
        ledger.detect_time[j] = now;
        ++fresh;
        break;
      }
    }
  }
  return fresh;
}

inline bool mission_done(const Mission& m, const TargetLedger& ledger, const TopoMap& map) {
  if (std::holds_alternative<FullCoverage>(m)) return map.size() > 0 && map.unvisited_count() == 0;
  if (std::holds_alternative<Targets>(m)) return ledger.all_detected();
  return false;
}

struct MissionStep {
  TargetLedger ledger;
  bool done{false};
};

/// Updates target flags from robot positions, then evaluates termination on `map`.
inline MissionStep mission_step(const Mission& m, TargetLedger ledger, const TopoMap& map,
                                std::span<const Vec2> robots, double r_s, double now) {
  if (auto* t = std::get_if<Targets>(&m)) detect_targets(ledger, t->positions, robots, r_s, now);
  const bool done = mission_done(m, ledger, map);
  return {std::move(ledger), done};
}

}  // namespace tricover
