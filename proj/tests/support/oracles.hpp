#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tricover/geometry.hpp"
#include "tricover/trigrid.hpp"

namespace oracle {

using tricover::Vec2;

/// Even-odd ray crossing test, horizontal ray to +x.
inline bool crossing_inside(const std::vector<Vec2>& poly, Vec2 p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) in = !in;
    }
  }
  return in;
}

/// Closest lattice vertex by exhaustive scan of a coordinate window.
inline tricover::LatticeCoord brute_nearest(const tricover::GridFrame& f, Vec2 p, int radius) {
  tricover::LatticeCoord best{};
  double best_d = std::numeric_limits<double>::infinity();
  for (int a = -radius; a <= radius; ++a) {
    for (int b = -radius; b <= radius; ++b) {
      const Vec2 v = f.q + f.u() * a + f.w() * b;
      const double d = std::hypot(v.x - p.x, v.y - p.y);
      if (d < best_d) {
        best_d = d;
        best = {a, b};
      }
    }
  }
  return best;
}

/// Receivers per sender by breadth-first search over an adjacency list.
inline std::set<int> bfs_reach(const std::vector<std::vector<int>>& adj, int s) {
  std::set<int> seen{s};
  std::queue<int> q;
  q.push(s);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int u : adj[static_cast<std::size_t>(v)]) {
      if (seen.insert(u).second) q.push(u);
    }
  }
  seen.erase(s);
  return seen;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    }
    if (std::abs(A[piv][c]) < 1e-14) throw std::runtime_error("solve_dense: singular");
    std::swap(A[piv], A[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = A[r][c] / A[c][c];
      if (m == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) A[r][k] -= m * A[c][k];
      b[r] -= m * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

/// Expected steps to absorption from `start` for a finite chain given as a
/// successor function. Builds the transient block Q over reachable states and
/// solves (I - Q) t = 1, i.e. t = N 1 with N the fundamental matrix.
template <class State>
double expected_absorption(State start, const std::function<bool(const State&)>& absorbing,
                           const std::function<std::vector<std::pair<State, double>>(const State&)>& step) {
  if (absorbing(start)) return 0.0;
  std::map<State, std::size_t> index;
  std::vector<State> states{start};
  index[start] = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (const auto& [nx, p] : step(states[i])) {
      if (p > 0.0 && !absorbing(nx) && !index.contains(nx)) {
        index[nx] = states.size();
        states.push_back(nx);
      }
    }
  }
  const std::size_t n = states.size();
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    A[i][i] += 1.0;
    for (const auto& [nx, p] : step(states[i])) {
      if (!absorbing(nx)) A[i][index.at(nx)] -= p;
    }
  }
  return solve_dense(std::move(A), std::vector<double>(n, 1.0))[0];
}

/// Expected cover time of a uniform random walk on a graph that starts at
/// `start` with only `start` visited.
inline double random_walk_cover_time(const std::vector<std::vector<int>>& adj, int start) {
  using S = std::pair<int, std::uint32_t>;  // (position, visited mask)
  const std::uint32_t full = (1u << adj.size()) - 1u;
  return expected_absorption<S>(
      {start, 1u << start}, [&](const S& s) { return s.second == full; },
      [&](const S& s) {
        std::vector<std::pair<S, double>> out;
        const auto& nb = adj[static_cast<std::size_t>(s.first)];
        for (int u : nb) out.push_back({{u, s.second | (1u << u)}, 1.0 / static_cast<double>(nb.size())});
        return out;
      });
}

/// Position after n Euler steps at constant (v, omega) from the origin with
/// heading theta0: the geometric sum of step chords in closed form.
inline Vec2 euler_arc(double v, double omega, double dt, double theta0, int n) {
  if (omega == 0.0) return {v * dt * n * std::cos(theta0), v * dt * n * std::sin(theta0)};
  const double a = omega * dt;
  // sum_{k<n} e^{i(theta0 + k a)} = e^{i theta0} (1 - e^{i n a}) / (1 - e^{i a})
  const double num_re = 1.0 - std::cos(n * a), num_im = -std::sin(n * a);
  const double den_re = 1.0 - std::cos(a), den_im = -std::sin(a);
  const double den2 = den_re * den_re + den_im * den_im;
  const double q_re = (num_re * den_re + num_im * den_im) / den2;
  const double q_im = (num_im * den_re - num_re * den_im) / den2;
  const double c = std::cos(theta0), s = std::sin(theta0);
  return {v * dt * (c * q_re - s * q_im), v * dt * (s * q_re + c * q_im)};
}

}  // namespace oracle
