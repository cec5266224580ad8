#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tricover/geometry.hpp"
#include "tricover/trigrid.hpp"

namespace tricover {

/// Undirected range graph at one step.
struct CommGraph {
  int n{0};
  double r_c{0.0};
  std::vector<std::pair<int, int>> edges;  // i < j, sorted
  std::vector<std::vector<int>> adjacency;

  bool has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(edges.begin(), edges.end(), std::pair{i, j});
  }
};

inline CommGraph graph_from_edges(int n, std::vector<std::pair<int, int>> edges, double r_c = 0.0) {
  CommGraph g;
  g.n = n;
  g.r_c = r_c;
  for (auto& e : edges) {
    if (e.first == e.second || e.first < 0 || e.second < 0 || e.first >= n || e.second >= n) {
      throw std::invalid_argument("graph_from_edges: bad edge");
    }
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges = std::move(edges);
  g.adjacency.assign(static_cast<std::size_t>(n), {});
  for (auto [i, j] : g.edges) {
    g.adjacency[static_cast<std::size_t>(i)].push_back(j);
    g.adjacency[static_cast<std::size_t>(j)].push_back(i);
  }
  return g;
}

/// Edges between every pair of robots within `r_c` of each other (inclusive).
inline CommGraph build_graph(std::span<const Vec2> positions, double r_c) {
  if (!(r_c > 0.0)) throw std::invalid_argument("build_graph: r_c must be > 0");
  std::vector<std::pair<int, int>> edges;
  const int n = static_cast<int>(positions.size());
  const double r2 = r_c * r_c;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec2 d = positions[static_cast<std::size_t>(i)] - positions[static_cast<std::size_t>(j)];
      if (dot(d, d) <= r2) edges.emplace_back(i, j);
    }
  }
  return graph_from_edges(n, std::move(edges), r_c);
}

/// Component label per node; labels are the smallest member index.
inline std::vector<int> components(const CommGraph& g) {
  std::vector<int> label(static_cast<std::size_t>(g.n), -1);
  std::vector<int> stack;
  for (int s = 0; s < g.n; ++s) {
    if (label[static_cast<std::size_t>(s)] >= 0) continue;
    label[static_cast<std::size_t>(s)] = s;
    stack.push_back(s);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u : g.adjacency[static_cast<std::size_t>(v)]) {
        if (label[static_cast<std::size_t>(u)] < 0) {
          label[static_cast<std::size_t>(u)] = s;
          stack.push_back(u);
        }
      }
    }
  }
  return label;
}

inline bool is_connected(const CommGraph& g) {
  const auto label = components(g);
  return std::all_of(label.begin(), label.end(), [](int l) { return l == 0; });
}

/// Map delta a robot broadcasts after changing its map.
struct MapPacket {
  int sender{0};
  GridFrame frame;
  std::vector<std::pair<LatticeCoord, bool>> vertices;  // (coord, visited)
  std::vector<LatticeCoord> deleted;                    // tombstoned fake vertices
  std::vector<int> detected_targets;
};

/// Multi-hop flood within each connected component. Each packet reaches every
/// other member of its sender's component exactly once, in the same step.
inline std::vector<std::vector<MapPacket>> flood_exchange(const CommGraph& g,
                                                          const std::vector<std::vector<MapPacket>>& outboxes) {
  if (static_cast<int>(outboxes.size()) != g.n) throw std::invalid_argument("flood_exchange: one outbox per robot");
  std::vector<std::vector<MapPacket>> inbox(static_cast<std::size_t>(g.n));
  std::vector<char> seen(static_cast<std::size_t>(g.n));
  std::vector<int> frontier, next;
  for (int s = 0; s < g.n; ++s) {
    for (const auto& pkt : outboxes[static_cast<std::size_t>(s)]) {
      // relay hop by hop; a node forwards only on first receipt
      std::fill(seen.begin(), seen.end(), 0);
      seen[static_cast<std::size_t>(s)] = 1;
      frontier.assign(1, s);
      while (!frontier.empty()) {
        next.clear();
        for (int v : frontier) {
          for (int u : g.adjacency[static_cast<std::size_t>(v)]) {
            if (seen[static_cast<std::size_t>(u)]) continue;
            seen[static_cast<std::size_t>(u)] = 1;
            inbox[static_cast<std::size_t>(u)].push_back(pkt);
            next.push_back(u);
          }
        }
        frontier.swap(next);
      }
    }
  }
  return inbox;
}

/// True iff the union of the window's graphs is connected.
inline bool joint_connectivity(std::span<const CommGraph> window) {
  if (window.empty()) throw std::invalid_argument("joint_connectivity: empty window");
  const int n = window.front().n;
  std::vector<std::pair<int, int>> all;
  for (const auto& g : window) {
    if (g.n != n) throw std::invalid_argument("joint_connectivity: graphs differ in node count");
    all.insert(all.end(), g.edges.begin(), g.edges.end());
  }
  return is_connected(graph_from_edges(n, std::move(all)));
}

/// Sliding-window joint-connectivity monitor over consecutive graphs.
class ConnectivityMonitor {
 public:
  explicit ConnectivityMonitor(std::size_t window = 10) : window_(window) {}

  /// Records `g`; returns false when the latest full window is not jointly connected.
  bool push(CommGraph g) {
    history_.push_back(std::move(g));
    if (history_.size() > window_) history_.erase(history_.begin());
    if (history_.size() < window_) return true;
    const bool ok = joint_connectivity(history_);
    if (!ok) ++violations_;
    return ok;
  }

  std::size_t violations() const { return violations_; }

 private:
  std::size_t window_;
  std::vector<CommGraph> history_;
  std::size_t violations_{0};
};

}  // namespace tricover
