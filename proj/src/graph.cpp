#include "nleig/graph.hpp"

#include "nleig/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>

namespace nleig {

double exponent(NormKind kind) {
  switch (kind) {
    case NormKind::L1:
      return 1.0;
    case NormKind::L2:
      return 2.0;
    case NormKind::Linf:
      return std::numeric_limits<double>::infinity();
  }
  return 2.0;
}

WeightedGraph::WeightedGraph(Index n, std::vector<Edge> edges, std::optional<GridShape> grid)
    : n_(n), grid_(grid) {
  if (n < 0) throw InputError("vertex count must be nonnegative");
  if (grid_ && grid_->nx * grid_->ny != n) {
    throw InputError("grid shape does not match vertex count");
  }

  std::map<std::pair<Index, Index>, double> merged;
  for (const Edge& e : edges) {
    if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n) {
      throw InputError("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                       ") has a vertex index outside [0, " + std::to_string(n) + ")");
    }
    if (!std::isfinite(e.w) || e.w < 0.0) {
      throw InputError("edge weights must be finite and nonnegative");
    }
    if (e.i == e.j) {
      throw InputError("self-loop at vertex " + std::to_string(e.i));
    }
    if (e.w == 0.0) continue;
    auto key = std::minmax(e.i, e.j);
    auto [it, inserted] = merged.emplace(key, e.w);
    if (!inserted && it->second != e.w) {
      throw InputError("nonsymmetric weights for pair (" + std::to_string(key.first) + ", " +
                       std::to_string(key.second) + ")");
    }
  }

  edges_.reserve(merged.size());
  for (const auto& [key, w] : merged) edges_.push_back({key.first, key.second, w});

  std::vector<Index> degree(static_cast<std::size_t>(n), 0);
  std::vector<double> wdeg(static_cast<std::size_t>(n), 0.0);
  for (const Edge& e : edges_) {
    ++degree[static_cast<std::size_t>(e.i)];
    ++degree[static_cast<std::size_t>(e.j)];
    wdeg[static_cast<std::size_t>(e.i)] += e.w;
    wdeg[static_cast<std::size_t>(e.j)] += e.w;
  }
  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  std::partial_sum(degree.begin(), degree.end(), offsets_.begin() + 1);
  adjacency_.resize(static_cast<std::size_t>(offsets_.back()));
  std::vector<Index> fill(offsets_.begin(), offsets_.end() - 1);
  for (Index e = 0; e < num_edges(); ++e) {
    const Edge& ed = edges_[static_cast<std::size_t>(e)];
    adjacency_[static_cast<std::size_t>(fill[static_cast<std::size_t>(ed.i)]++)] = {ed.j, e};
    adjacency_[static_cast<std::size_t>(fill[static_cast<std::size_t>(ed.j)]++)] = {ed.i, e};
  }
  if (!wdeg.empty()) max_degree_ = *std::max_element(wdeg.begin(), wdeg.end());
}

WeightedGraph WeightedGraph::grid2d(Index nx, Index ny, double h, double weight) {
  if (nx <= 0 || ny <= 0) throw InputError("grid dimensions must be positive");
  if (!(h > 0.0)) throw InputError("grid spacing must be positive");
  GridShape shape{nx, ny, h};
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (Index iy = 0; iy < ny; ++iy) {
    for (Index ix = 0; ix < nx; ++ix) {
      if (ix + 1 < nx) edges.push_back({shape.index(ix, iy), shape.index(ix + 1, iy), weight});
      if (iy + 1 < ny) edges.push_back({shape.index(ix, iy), shape.index(ix, iy + 1), weight});
    }
  }
  return WeightedGraph(nx * ny, std::move(edges), shape);
}

std::span<const Neighbor> WeightedGraph::neighbors(Index v) const {
  auto begin = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(v)]);
  auto end = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(v) + 1]);
  return std::span<const Neighbor>(adjacency_).subspan(begin, end - begin);
}

void check_length(const WeightedGraph& g, const VertexField& u, const char* what) {
  if (u.size() != g.num_vertices()) {
    throw DimensionError(std::string(what) + ": field has length " + std::to_string(u.size()) +
                         " but the graph has " + std::to_string(g.num_vertices()) + " vertices");
  }
}

EdgeField grad(const WeightedGraph& g, const VertexField& u) {
  check_length(g, u, "grad");
  EdgeField out{Eigen::VectorXd(g.num_edges())};
  Index e = 0;
  for (const Edge& ed : g.edges()) {
    out.values[e++] = std::sqrt(ed.w) * (u[ed.j] - u[ed.i]);
  }
  return out;
}

VertexField div(const WeightedGraph& g, const EdgeField& h) {
  if (h.values.size() != g.num_edges()) {
    throw DimensionError("div: edge field has length " + std::to_string(h.values.size()) +
                         " but the graph has " + std::to_string(g.num_edges()) + " edges");
  }
  VertexField out = VertexField::Zero(g.num_vertices());
  Index e = 0;
  for (const Edge& ed : g.edges()) {
    const double flux = 2.0 * std::sqrt(ed.w) * h.values[e++];
    out[ed.i] -= flux;
    out[ed.j] += flux;
  }
  return out;
}

double dot(const EdgeField& a, const EdgeField& b) {
  if (a.values.size() != b.values.size()) throw DimensionError("dot: edge fields differ in length");
  return 2.0 * a.values.dot(b.values);
}

double norm(const VertexField& u, NormKind kind) {
  if (u.size() == 0) return 0.0;
  switch (kind) {
    case NormKind::L1:
      return u.lpNorm<1>();
    case NormKind::L2:
      return u.norm();
    case NormKind::Linf:
      return u.lpNorm<Eigen::Infinity>();
  }
  return u.norm();
}

double norm(const EdgeField& h, NormKind kind) {
  if (h.values.size() == 0) return 0.0;
  switch (kind) {
    case NormKind::L1:
      return 2.0 * h.values.lpNorm<1>();
    case NormKind::L2:
      return std::sqrt(2.0) * h.values.norm();
    case NormKind::Linf:
      return h.values.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

Components connected_components(const WeightedGraph& g) {
  const auto n = static_cast<std::size_t>(g.num_vertices());
  Components c;
  c.label.assign(n, -1);
  std::vector<Index> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (c.label[s] >= 0) continue;
    c.label[s] = c.count;
    stack.push_back(static_cast<Index>(s));
    while (!stack.empty()) {
      Index v = stack.back();
      stack.pop_back();
      for (const Neighbor& nb : g.neighbors(v)) {
        auto& l = c.label[static_cast<std::size_t>(nb.vertex)];
        if (l < 0) {
          l = c.count;
          stack.push_back(nb.vertex);
        }
      }
    }
    ++c.count;
  }
  return c;
}

namespace {

struct Groups {
  std::vector<std::vector<Index>> members;
  std::vector<bool> pinned;
};

Groups component_groups(const WeightedGraph& g, std::span<const Index> pinned) {
  Components comp = connected_components(g);
  Groups out;
  out.members.resize(static_cast<std::size_t>(comp.count));
  out.pinned.assign(static_cast<std::size_t>(comp.count), false);
  for (Index v = 0; v < g.num_vertices(); ++v) {
    out.members[static_cast<std::size_t>(comp.label[static_cast<std::size_t>(v)])].push_back(v);
  }
  for (Index p : pinned) {
    if (p < 0 || p >= g.num_vertices()) throw InputError("constraint vertex out of range");
    out.pinned[static_cast<std::size_t>(comp.label[static_cast<std::size_t>(p)])] = true;
  }
  return out;
}

}  // namespace

VertexField nullspace_project(const WeightedGraph& g, const VertexField& u,
                              std::span<const Index> pinned) {
  check_length(g, u, "nullspace_project");
  Groups groups = component_groups(g, pinned);
  VertexField out = VertexField::Zero(u.size());
  for (std::size_t c = 0; c < groups.members.size(); ++c) {
    if (groups.pinned[c]) continue;
    const auto& m = groups.members[c];
    double sum = 0.0;
    for (Index v : m) sum += u[v];
    const double mean = sum / static_cast<double>(m.size());
    for (Index v : m) out[v] = mean;
  }
  return out;
}

double nullspace_distance(const WeightedGraph& g, const VertexField& u, NormKind kind,
                          std::span<const Index> pinned) {
  check_length(g, u, "nullspace_distance");
  if (kind == NormKind::L2) return (u - nullspace_project(g, u, pinned)).norm();

  Groups groups = component_groups(g, pinned);
  VertexField best = VertexField::Zero(u.size());
  std::vector<double> vals;
  for (std::size_t c = 0; c < groups.members.size(); ++c) {
    if (groups.pinned[c]) continue;
    const auto& m = groups.members[c];
    vals.clear();
    for (Index v : m) vals.push_back(u[v]);
    double center;
    if (kind == NormKind::L1) {
      auto mid = vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2);
      std::nth_element(vals.begin(), mid, vals.end());
      center = *mid;
    } else {
      auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
      center = 0.5 * (*lo + *hi);
    }
    for (Index v : m) best[v] = center;
  }
  return norm(VertexField(u - best), kind);
}

}  // namespace nleig
