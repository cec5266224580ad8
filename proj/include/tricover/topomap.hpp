#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "tricover/geometry.hpp"
#include "tricover/netsim.hpp"
#include "tricover/trigrid.hpp"
#include "tricover/world.hpp"

namespace tricover {

enum class VertexState { Detected, Visited };

inline std::string_view to_string(VertexState s) { return s == VertexState::Visited ? "visited" : "detected"; }

/// Range sensing used for vertex detection and target detection.
struct SensorModel {
  double r_s{2.0 / std::sqrt(3.0)};  // target detection radius, m
  int n_rays{16};                    // recorded sonar count; detection uses one ray per neighbour
  double max_range{5.0};             // sonar range, m
};

/// Frames closer than these are treated as the same lattice when merging.
inline constexpr double kFrameTolTheta = 1e-3;
inline constexpr double kFrameTolQ = 1e-2;

inline bool same_frame(const GridFrame& a, const GridFrame& b) {
  return std::abs(a.theta - b.theta) <= kFrameTolTheta && distance(a.q, b.q) <= kFrameTolQ &&
         std::abs(a.side - b.side) <= kGeomEps;
}

/// A lattice vertex the map may hold: free and at least `margin` from every edge.
inline bool admissible(const Workspace& w, Vec2 p) {
  return contains_free(w, p) && edge_distance(w, p) >= w.margin();
}

/// One robot's topological map over the shared lattice.
///
/// State join is Detected < Visited < Deleted, so merging is a semilattice
/// join. Deleted (fake) vertices are kept as tombstones and never return.
class TopoMap {
 public:
  TopoMap() = default;
  explicit TopoMap(GridFrame frame) : frame_(frame) {}

  const GridFrame& frame() const { return frame_; }
  const std::map<LatticeCoord, VertexState>& entries() const { return entries_; }
  const std::set<LatticeCoord>& tombstones() const { return tombstones_; }

  std::size_t size() const { return entries_.size(); }
  bool contains(LatticeCoord c) const { return entries_.contains(c); }
  bool is_deleted(LatticeCoord c) const { return tombstones_.contains(c); }

  std::optional<VertexState> state(LatticeCoord c) const {
    if (auto it = entries_.find(c); it != entries_.end()) return it->second;
    return std::nullopt;
  }

  std::size_t unvisited_count() const {
    std::size_t n = 0;
    for (const auto& [c, s] : entries_) n += s == VertexState::Detected;
    return n;
  }

  Vec2 point(LatticeCoord c) const { return vertex_point(frame_, c); }

  /// Adds `c` as Detected unless present or deleted. Returns true on change.
  bool add_detected(LatticeCoord c) {
    if (tombstones_.contains(c) || entries_.contains(c)) return false;
    entries_.emplace(c, VertexState::Detected);
    journal_.insert(c);
    return true;
  }

  bool set_visited(LatticeCoord c) {
    if (tombstones_.contains(c)) return false;
    auto [it, inserted] = entries_.emplace(c, VertexState::Visited);
    if (!inserted) {
      if (it->second == VertexState::Visited) return false;
      it->second = VertexState::Visited;
    }
    journal_.insert(c);
    return true;
  }

  bool erase(LatticeCoord c) {
    if (tombstones_.contains(c)) return false;
    entries_.erase(c);
    tombstones_.insert(c);
    journal_.insert(c);
    return true;
  }

  void reset_all_visited() {
    for (auto& [c, s] : entries_) {
      if (s == VertexState::Visited) {
        s = VertexState::Detected;
        journal_.insert(c);
      }
    }
  }

  /// Folds one packet into this map. Returns true if anything changed.
  bool absorb(const MapPacket& p) {
    if (!same_frame(frame_, p.frame)) throw std::invalid_argument("merge: lattice frame mismatch");
    bool changed = false;
    for (auto c : p.deleted) {
      if (tombstones_.insert(c).second) {
        entries_.erase(c);
        changed = true;
      }
    }
    for (const auto& [c, visited] : p.vertices) {
      if (tombstones_.contains(c)) continue;
      const VertexState s = visited ? VertexState::Visited : VertexState::Detected;
      auto [it, inserted] = entries_.emplace(c, s);
      if (inserted) {
        changed = true;
      } else if (s == VertexState::Visited && it->second != VertexState::Visited) {
        it->second = VertexState::Visited;
        changed = true;
      }
    }
    return changed;
  }

  bool has_pending_changes() const { return !journal_.empty(); }

  /// Packet with the entries changed since the previous call.
  MapPacket take_delta(int sender) {
    MapPacket p{sender, frame_, {}, {}, {}};
    for (auto c : journal_) {
      if (tombstones_.contains(c)) {
        p.deleted.push_back(c);
      } else if (auto it = entries_.find(c); it != entries_.end()) {
        p.vertices.emplace_back(c, it->second == VertexState::Visited);
      }
    }
    journal_.clear();
    return p;
  }

  /// Packet carrying the whole map.
  MapPacket full_packet(int sender) const {
    MapPacket p{sender, frame_, {}, {}, {}};
    p.vertices.reserve(entries_.size());
    for (const auto& [c, s] : entries_) p.vertices.emplace_back(c, s == VertexState::Visited);
    p.deleted.assign(tombstones_.begin(), tombstones_.end());
    return p;
  }

  void clear_journal() { journal_.clear(); }

  friend bool operator==(const TopoMap& a, const TopoMap& b) {
    return a.entries_ == b.entries_ && a.tombstones_ == b.tombstones_;
  }

 private:
  GridFrame frame_;
  std::map<LatticeCoord, VertexState> entries_;
  std::set<LatticeCoord> tombstones_;
  std::set<LatticeCoord> journal_;
};

/// Adds each admissible, line-of-sight six-neighbour of the vertex nearest
/// `pose` as Detected. Visited entries are never downgraded.
inline TopoMap detect_vertices(TopoMap map, Vec2 pose, const Workspace& w, const SensorModel& s) {
  const LatticeCoord here = nearest_vertex(map.frame(), pose);
  for (auto c : six_neighbors(here)) {
    if (map.contains(c) || map.is_deleted(c)) continue;
    const Vec2 v = map.point(c);
    if (distance(pose, v) > s.max_range) continue;
    if (!line_of_sight(w, pose, v)) continue;
    if (!admissible(w, v)) continue;
    map.add_detected(c);
  }
  return map;
}

inline TopoMap mark_visited(TopoMap map, LatticeCoord c) {
  map.set_visited(c);
  return map;
}

inline TopoMap merge(TopoMap mine, const MapPacket& packet) {
  mine.absorb(packet);
  return mine;
}

inline TopoMap reset_visited(TopoMap map) {
  map.reset_all_visited();
  return map;
}

/// Closest Detected (unvisited) vertex to `p`; equidistant candidates
/// resolve to the lexicographically smallest coordinate.
inline std::optional<LatticeCoord> nearest_unvisited(const TopoMap& map, Vec2 p) {
  std::optional<LatticeCoord> best;
  double best_d = 0.0;
  for (const auto& [c, s] : map.entries()) {
    if (s != VertexState::Detected) continue;
    const double d = distance(map.point(c), p);
    // entries iterate in ascending order, so an equal distance never replaces
    if (!best || d < best_d - kGeomEps) {
      best = c;
      best_d = d;
    }
  }
  return best;
}

/// CSV dump (CRLF rows): header `a,b,state`, one row per vertex, tombstones as `deleted`.
inline void write_map_csv(std::ostream& os, const TopoMap& map) {
  os << "a,b,state\r\n";
  for (const auto& [c, s] : map.entries()) os << c.a << ',' << c.b << ',' << to_string(s) << "\r\n";
  for (auto c : map.tombstones()) os << c.a << ',' << c.b << ",deleted\r\n";
}

}  // namespace tricover
