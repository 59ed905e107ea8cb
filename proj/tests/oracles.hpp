#pragma once

// Independent reference computations. Nothing here calls the solvers under
// test; graphs are built directly and quantities are derived with dense
// linear algebra or closed forms.

#include "nleig/graph.hpp"
#include "nleig/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <memory>
#include <queue>
#include <vector>

namespace oracle {

using nleig::Edge;
using nleig::Index;
using nleig::VertexField;
using nleig::WeightedGraph;

inline std::shared_ptr<const WeightedGraph> two_node(double w = 1.0) {
  return std::make_shared<const WeightedGraph>(2, std::vector<Edge>{{0, 1, w}});
}

inline std::shared_ptr<const WeightedGraph> path(Index n, double w = 1.0) {
  std::vector<Edge> e;
  for (Index i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, w});
  return std::make_shared<const WeightedGraph>(n, e);
}

// Connected random graph: a random spanning tree plus extra edges.
inline std::shared_ptr<const WeightedGraph> random_connected(Index n, double extra_prob,
                                                             std::uint64_t seed) {
  nleig::Rng rng(seed);
  std::vector<Edge> e;
  for (Index i = 1; i < n; ++i) {
    const auto j = static_cast<Index>(rng.uniform() * static_cast<double>(i));
    e.push_back({j, i, 0.5 + rng.uniform()});
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (rng.uniform() < extra_prob) e.push_back({i, j, 0.5 + rng.uniform()});
    }
  }
  // Tree edges may repeat a random extra pair with another weight; keep the first.
  std::vector<Edge> uniq;
  std::vector<std::vector<bool>> seen(static_cast<std::size_t>(n),
                                      std::vector<bool>(static_cast<std::size_t>(n), false));
  for (const Edge& x : e) {
    auto s = seen[static_cast<std::size_t>(std::min(x.i, x.j))][static_cast<std::size_t>(std::max(x.i, x.j))];
    if (!s) uniq.push_back(x);
    s = true;
  }
  return std::make_shared<const WeightedGraph>(n, uniq);
}

inline Eigen::MatrixXd dense_laplacian(const WeightedGraph& g) {
  const Index n = g.num_vertices();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    L(e.i, e.i) += e.w;
    L(e.j, e.j) += e.w;
    L(e.i, e.j) -= e.w;
    L(e.j, e.i) -= e.w;
  }
  return L;
}

struct Fiedler {
  double value;
  VertexField vector;
};

// Second smallest Laplacian eigenpair of a connected graph.
inline Fiedler fiedler(const WeightedGraph& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_laplacian(g));
  return {es.eigenvalues()[1], es.eigenvectors().col(1)};
}

// Smallest eigenpair of the Laplacian restricted to the free vertices
// (Dirichlet condition on `pinned`), embedded back with zeros.
inline Fiedler dirichlet_ground(const WeightedGraph& g, const std::vector<Index>& pinned) {
  const Index n = g.num_vertices();
  std::vector<bool> p(static_cast<std::size_t>(n), false);
  for (Index v : pinned) p[static_cast<std::size_t>(v)] = true;
  std::vector<Index> free;
  for (Index i = 0; i < n; ++i) {
    if (!p[static_cast<std::size_t>(i)]) free.push_back(i);
  }
  const Eigen::MatrixXd L = dense_laplacian(g);
  const auto m = static_cast<Index>(free.size());
  Eigen::MatrixXd Lf(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) Lf(a, b) = L(free[a], free[b]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Lf);
  VertexField v = VertexField::Zero(n);
  for (Index a = 0; a < m; ++a) v[free[a]] = es.eigenvectors()(a, 0);
  return {es.eigenvalues()[0], v};
}

// Plain O(n^2) Dijkstra, edge length 1 / sqrt(w).
inline VertexField geodesic(const WeightedGraph& g, const std::vector<Index>& sources) {
  const Index n = g.num_vertices();
  const Eigen::MatrixXd L = dense_laplacian(g);
  VertexField d = VertexField::Constant(n, std::numeric_limits<double>::infinity());
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  for (Index s : sources) d[s] = 0.0;
  for (Index it = 0; it < n; ++it) {
    Index v = -1;
    for (Index i = 0; i < n; ++i) {
      if (!done[static_cast<std::size_t>(i)] && (v < 0 || d[i] < d[v])) v = i;
    }
    if (v < 0 || !std::isfinite(d[v])) break;
    done[static_cast<std::size_t>(v)] = true;
    for (Index u = 0; u < n; ++u) {
      if (u != v && L(v, u) < 0.0) d[u] = std::min(d[u], d[v] + 1.0 / std::sqrt(-L(v, u)));
    }
  }
  return d;
}

// Two-node TV prox with data_p = 2: the antisymmetric part a = (f0 - f1)/2
// shrinks by 2 sigma sqrt(w) toward 0, the mean is kept.
inline VertexField two_node_tv_prox(const VertexField& f, double sigma, double w = 1.0) {
  const double m = 0.5 * (f[0] + f[1]);
  const double a = 0.5 * (f[0] - f[1]);
  const double s = 2.0 * sigma * std::sqrt(w);
  const double a2 = std::copysign(std::max(std::abs(a) - s, 0.0), a);
  VertexField u(2);
  u << m + a2, m - a2;
  return u;
}

}  // namespace oracle
