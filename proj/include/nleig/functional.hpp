#pragma once

#include "nleig/graph.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nleig {

enum class FunctionalKind { GraphDirichlet, GraphTV, GridTVCentral, GraphLipschitz };

std::string to_string(FunctionalKind kind);

// A convex, absolutely alpha-homogeneous energy on a weighted graph.
//
// Every kind is written as J(u) = G(K u) with K linear:
//   GraphDirichlet(p)  K = grad,        G(y) = 2 sum_e |y_e|^p
//   GraphTV            K = grad,        G(y) = 2 sum_e |y_e|
//   GridTVCentral      K = (Dx, Dy),    G(y) = 1/(2h) sum_x |(y_x, y_{n+x})|
//   GraphLipschitz     K = grad,        G(y) = max_e |y_e|
// The factor 2 counts both orientations of every stored edge. Dx and Dy are
// central differences with replicate padding at the grid boundary.
//
// Any kind may carry a constraint set: J(u) = +inf unless u vanishes there.
class Functional {
 public:
  using GraphPtr = std::shared_ptr<const WeightedGraph>;

  static Functional graph_dirichlet(GraphPtr g, double p, std::vector<Index> constraint = {});
  static Functional graph_tv(GraphPtr g, std::vector<Index> constraint = {});
  static Functional grid_tv_central(GraphPtr g, double h, std::vector<Index> constraint = {});
  static Functional graph_lipschitz(GraphPtr g, std::vector<Index> constraint = {});

  FunctionalKind kind() const { return kind_; }
  // Edge exponent; 1 for the TV kinds, +inf for Lipschitz.
  double p() const { return p_; }
  double alpha() const { return alpha_; }
  double h() const { return h_; }
  const WeightedGraph& graph() const { return *graph_; }
  const GraphPtr& graph_ptr() const { return graph_; }
  const std::vector<Index>& constraint() const { return constraint_; }
  const std::vector<bool>& pinned_mask() const { return pinned_; }
  Index size() const { return graph_->num_vertices(); }

  // nullopt encodes +inf (u violates the constraint set).
  std::optional<double> evaluate(const VertexField& u) const;
  // Same, but infeasible input throws InfeasibleError.
  double value(const VertexField& u) const;
  bool feasible(const VertexField& u) const;
  // Zero the constrained entries.
  VertexField restrict_to_feasible(const VertexField& u) const;

  // One element of the subdifferential, chosen deterministically: sign(0) = 0
  // and max ties share the weight equally. Entries on the constraint set are 0.
  VertexField subgradient(const VertexField& u) const;

  // Orthogonal projection onto the nullspace N(J).
  VertexField nullspace_project(const VertexField& u) const;
  double nullspace_distance(const VertexField& u, NormKind kind) const;

  // The splitting J = G o K.
  Index range_size() const;
  Eigen::VectorXd apply_K(const VertexField& u) const;
  VertexField apply_KT(const Eigen::VectorXd& q) const;
  double G(const Eigen::VectorXd& y) const;
  // Upper bound on the squared operator norm of K.
  double K_norm_sq_bound() const;

 private:
  Functional(FunctionalKind kind, GraphPtr g, double p, double alpha, double h,
             std::vector<Index> constraint);

  FunctionalKind kind_;
  GraphPtr graph_;
  double p_;
  double alpha_;
  double h_;
  std::vector<Index> constraint_;
  std::vector<bool> pinned_;
};

// alpha J(u) / ||u - u_bar||^alpha with u_bar the nullspace projection and the
// distance measured in `norm`. Throws DegenerateInputError when u is in N(J).
double rayleigh(const Functional& J, const VertexField& u, NormKind norm = NormKind::L2);

// Same quotient anchored at a given nullspace element.
double rayleigh(const Functional& J, const VertexField& u, const VertexField& anchor,
                NormKind norm);

// sup { <zeta, u> : J(u) <= 1 } for one-homogeneous J, after projecting zeta
// onto the complement of N(J). Throws InputError for alpha != 1.
double dual_seminorm(const Functional& J, const VertexField& zeta, double tol = 1e-9);

}  // namespace nleig
