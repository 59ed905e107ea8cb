#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace nleig {

using Index = std::int64_t;

// Real-valued function on the vertices of a graph.
using VertexField = Eigen::VectorXd;

// Real-valued function on vertex pairs, stored once per edge (i < j) in the
// orientation i -> j. The reverse orientation is implied by antisymmetry:
// h(j, i) = -h(i, j).
struct EdgeField {
  Eigen::VectorXd values;
};

enum class NormKind { L1, L2, Linf };

// Exponent associated with a norm; +inf for Linf.
double exponent(NormKind kind);

struct Edge {
  Index i;
  Index j;
  double w;
};

// Layout of a regular 2-D grid; vertex (ix, iy) has index iy * nx + ix.
struct GridShape {
  Index nx;
  Index ny;
  double h;

  Index index(Index ix, Index iy) const { return iy * nx + ix; }
};

struct Neighbor {
  Index vertex;
  Index edge;
};

// Undirected graph with positive symmetric weights. Immutable after
// construction.
//
// Edges are normalized to i < j. Zero-weight edges are dropped. Repeated
// entries for the same pair (in either orientation) are merged when their
// weights agree and rejected otherwise.
class WeightedGraph {
 public:
  WeightedGraph(Index n, std::vector<Edge> edges, std::optional<GridShape> grid = std::nullopt);

  // 4-neighbor grid with every edge weighted `weight`.
  static WeightedGraph grid2d(Index nx, Index ny, double h, double weight);

  Index num_vertices() const { return n_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(Index e) const { return edges_[static_cast<std::size_t>(e)]; }
  std::span<const Neighbor> neighbors(Index v) const;
  const std::optional<GridShape>& grid() const { return grid_; }

  // max_x sum_y w(x, y)
  double max_weighted_degree() const { return max_degree_; }

 private:
  Index n_;
  std::vector<Edge> edges_;
  std::vector<Index> offsets_;
  std::vector<Neighbor> adjacency_;
  std::optional<GridShape> grid_;
  double max_degree_ = 0.0;
};

// grad u (i, j) = sqrt(w) (u_j - u_i) for each stored edge.
EdgeField grad(const WeightedGraph& g, const VertexField& u);

// div h (x) = sum_y sqrt(w(x, y)) (h(y, x) - h(x, y)) using the antisymmetric
// extension of h. With edge inner products taken over ordered pairs this is
// the adjoint of grad: <grad u, h> = <u, div h>.
VertexField div(const WeightedGraph& g, const EdgeField& h);

// Inner product over ordered pairs, i.e. twice the sum over stored edges.
double dot(const EdgeField& a, const EdgeField& b);

double norm(const VertexField& u, NormKind kind);
// Edge norms count both orientations of every stored edge.
double norm(const EdgeField& h, NormKind kind);

struct Components {
  std::vector<Index> label;
  Index count = 0;
};

Components connected_components(const WeightedGraph& g);

// Orthogonal projection onto the fields that are constant on every connected
// component and vanish on every component that touches `pinned`.
VertexField nullspace_project(const WeightedGraph& g, const VertexField& u,
                              std::span<const Index> pinned = {});

// Distance from u to that same subspace measured in `kind`. The minimizer is
// the componentwise mean (L2), median (L1) or midrange (Linf).
double nullspace_distance(const WeightedGraph& g, const VertexField& u, NormKind kind,
                          std::span<const Index> pinned = {});

void check_length(const WeightedGraph& g, const VertexField& u, const char* what);

}  // namespace nleig
