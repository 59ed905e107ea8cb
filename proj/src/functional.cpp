#include "nleig/functional.hpp"

#include "nleig/errors.hpp"
#include "nleig/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nleig {

std::string to_string(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::GraphDirichlet:
      return "graph_dirichlet";
    case FunctionalKind::GraphTV:
      return "graph_tv";
    case FunctionalKind::GridTVCentral:
      return "grid_tv_central";
    case FunctionalKind::GraphLipschitz:
      return "graph_lipschitz";
  }
  return "unknown";
}

Functional::Functional(FunctionalKind kind, GraphPtr g, double p, double alpha, double h,
                       std::vector<Index> constraint)
    : kind_(kind), graph_(std::move(g)), p_(p), alpha_(alpha), h_(h) {
  if (!graph_) throw InputError("functional needs a graph");
  pinned_.assign(static_cast<std::size_t>(graph_->num_vertices()), false);
  for (Index v : constraint) {
    if (v < 0 || v >= graph_->num_vertices()) {
      throw InputError("constraint vertex " + std::to_string(v) + " out of range");
    }
    pinned_[static_cast<std::size_t>(v)] = true;
  }
  for (Index v = 0; v < graph_->num_vertices(); ++v) {
    if (pinned_[static_cast<std::size_t>(v)]) constraint_.push_back(v);
  }
}

Functional Functional::graph_dirichlet(GraphPtr g, double p, std::vector<Index> constraint) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InputError("graph_dirichlet needs finite p >= 1");
  return Functional(FunctionalKind::GraphDirichlet, std::move(g), p, p, 0.0,
                    std::move(constraint));
}

Functional Functional::graph_tv(GraphPtr g, std::vector<Index> constraint) {
  return Functional(FunctionalKind::GraphTV, std::move(g), 1.0, 1.0, 0.0, std::move(constraint));
}

Functional Functional::grid_tv_central(GraphPtr g, double h, std::vector<Index> constraint) {
  if (!g || !g->grid()) throw InputError("grid_tv_central needs a grid graph");
  if (!(h > 0.0)) throw InputError("grid_tv_central needs h > 0");
  return Functional(FunctionalKind::GridTVCentral, std::move(g), 1.0, 1.0, h,
                    std::move(constraint));
}

Functional Functional::graph_lipschitz(GraphPtr g, std::vector<Index> constraint) {
  return Functional(FunctionalKind::GraphLipschitz, std::move(g),
                    std::numeric_limits<double>::infinity(), 1.0, 0.0, std::move(constraint));
}

bool Functional::feasible(const VertexField& u) const {
  for (Index v : constraint_) {
    if (u[v] != 0.0) return false;
  }
  return true;
}

VertexField Functional::restrict_to_feasible(const VertexField& u) const {
  check_length(*graph_, u, "restrict_to_feasible");
  VertexField out = u;
  for (Index v : constraint_) out[v] = 0.0;
  return out;
}

Index Functional::range_size() const {
  if (kind_ == FunctionalKind::GridTVCentral) return 2 * graph_->num_vertices();
  return graph_->num_edges();
}

Eigen::VectorXd Functional::apply_K(const VertexField& u) const {
  if (kind_ != FunctionalKind::GridTVCentral) return grad(*graph_, u).values;
  check_length(*graph_, u, "apply_K");
  const GridShape& s = *graph_->grid();
  const Index n = graph_->num_vertices();
  Eigen::VectorXd y(2 * n);
  for (Index iy = 0; iy < s.ny; ++iy) {
    for (Index ix = 0; ix < s.nx; ++ix) {
      const Index x = s.index(ix, iy);
      y[x] = u[s.index(std::min(ix + 1, s.nx - 1), iy)] - u[s.index(std::max<Index>(ix - 1, 0), iy)];
      y[n + x] =
          u[s.index(ix, std::min(iy + 1, s.ny - 1))] - u[s.index(ix, std::max<Index>(iy - 1, 0))];
    }
  }
  return y;
}

VertexField Functional::apply_KT(const Eigen::VectorXd& q) const {
  if (q.size() != range_size()) throw DimensionError("apply_KT: wrong dual length");
  const Index n = graph_->num_vertices();
  VertexField out = VertexField::Zero(n);
  if (kind_ != FunctionalKind::GridTVCentral) {
    Index e = 0;
    for (const Edge& ed : graph_->edges()) {
      const double t = std::sqrt(ed.w) * q[e++];
      out[ed.i] -= t;
      out[ed.j] += t;
    }
    return out;
  }
  const GridShape& s = *graph_->grid();
  for (Index iy = 0; iy < s.ny; ++iy) {
    for (Index ix = 0; ix < s.nx; ++ix) {
      const Index x = s.index(ix, iy);
      out[s.index(std::min(ix + 1, s.nx - 1), iy)] += q[x];
      out[s.index(std::max<Index>(ix - 1, 0), iy)] -= q[x];
      out[s.index(ix, std::min(iy + 1, s.ny - 1))] += q[n + x];
      out[s.index(ix, std::max<Index>(iy - 1, 0))] -= q[n + x];
    }
  }
  return out;
}

double Functional::G(const Eigen::VectorXd& y) const {
  switch (kind_) {
    case FunctionalKind::GraphDirichlet:
      if (p_ == 2.0) return 2.0 * y.squaredNorm();
      if (p_ == 1.0) return 2.0 * y.lpNorm<1>();
      return 2.0 * y.array().abs().pow(p_).sum();
    case FunctionalKind::GraphTV:
      return 2.0 * y.lpNorm<1>();
    case FunctionalKind::GraphLipschitz:
      return y.size() == 0 ? 0.0 : y.lpNorm<Eigen::Infinity>();
    case FunctionalKind::GridTVCentral: {
      const Index n = y.size() / 2;
      double s = 0.0;
      for (Index x = 0; x < n; ++x) s += std::hypot(y[x], y[n + x]);
      return s / (2.0 * h_);
    }
  }
  return 0.0;
}

double Functional::K_norm_sq_bound() const {
  // Dx and Dy each have absolute row and column sums at most 2.
  if (kind_ == FunctionalKind::GridTVCentral) return 8.0;
  return 2.0 * graph_->max_weighted_degree();
}

std::optional<double> Functional::evaluate(const VertexField& u) const {
  check_length(*graph_, u, "evaluate");
  if (!feasible(u)) return std::nullopt;
  return G(apply_K(u));
}

double Functional::value(const VertexField& u) const {
  auto v = evaluate(u);
  if (!v) throw InfeasibleError(to_string(kind_) + ": field is nonzero on the constraint set");
  return *v;
}

VertexField Functional::subgradient(const VertexField& u) const {
  check_length(*graph_, u, "subgradient");
  if (!feasible(u)) {
    throw InfeasibleError(to_string(kind_) + ": subgradient of an infeasible field");
  }
  const Eigen::VectorXd y = apply_K(u);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(y.size());
  auto sign = [](double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); };
  switch (kind_) {
    case FunctionalKind::GraphDirichlet:
      for (Index e = 0; e < y.size(); ++e) {
        q[e] = p_ == 2.0 ? 4.0 * y[e] : 2.0 * p_ * std::pow(std::abs(y[e]), p_ - 1.0) * sign(y[e]);
      }
      break;
    case FunctionalKind::GraphTV:
      for (Index e = 0; e < y.size(); ++e) q[e] = 2.0 * sign(y[e]);
      break;
    case FunctionalKind::GraphLipschitz: {
      if (y.size() == 0) break;
      const double m = y.lpNorm<Eigen::Infinity>();
      if (m == 0.0) break;
      const double cut = m * (1.0 - 1e-12);
      Index ties = 0;
      for (Index e = 0; e < y.size(); ++e) ties += std::abs(y[e]) >= cut;
      for (Index e = 0; e < y.size(); ++e) {
        if (std::abs(y[e]) >= cut) q[e] = sign(y[e]) / static_cast<double>(ties);
      }
      break;
    }
    case FunctionalKind::GridTVCentral: {
      const Index n = y.size() / 2;
      for (Index x = 0; x < n; ++x) {
        const double r = std::hypot(y[x], y[n + x]);
        if (r > 0.0) {
          q[x] = y[x] / (r * 2.0 * h_);
          q[n + x] = y[n + x] / (r * 2.0 * h_);
        }
      }
      break;
    }
  }
  VertexField z = apply_KT(q);
  for (Index v : constraint_) z[v] = 0.0;
  return z;
}

VertexField Functional::nullspace_project(const VertexField& u) const {
  return nleig::nullspace_project(*graph_, u, constraint_);
}

double Functional::nullspace_distance(const VertexField& u, NormKind kind) const {
  return nleig::nullspace_distance(*graph_, u, kind, constraint_);
}

double rayleigh(const Functional& J, const VertexField& u, NormKind norm) {
  check_length(J.graph(), u, "rayleigh");
  const double d = J.nullspace_distance(u, norm);
  const double j = J.value(u);
  if (d == 0.0) throw DegenerateInputError("rayleigh: field lies in the nullspace");
  return J.alpha() * j / std::pow(d, J.alpha());
}

double rayleigh(const Functional& J, const VertexField& u, const VertexField& anchor,
                NormKind norm) {
  check_length(J.graph(), u, "rayleigh");
  check_length(J.graph(), anchor, "rayleigh");
  const double d = nleig::norm(VertexField(u - anchor), norm);
  const double j = J.value(u);
  if (d == 0.0) {
    if (j == 0.0) return 0.0;
    throw DegenerateInputError("rayleigh: field equals the anchor");
  }
  return J.alpha() * j / std::pow(d, J.alpha());
}

double dual_seminorm(const Functional& J, const VertexField& zeta, double tol) {
  check_length(J.graph(), zeta, "dual_seminorm");
  if (J.alpha() != 1.0) throw InputError("dual_seminorm needs a one-homogeneous functional");
  VertexField z = J.restrict_to_feasible(zeta - J.nullspace_project(zeta));
  const double zn = z.norm();
  if (zn == 0.0) return 0.0;

  // The 2-prox of z extinguishes exactly when sigma reaches the dual norm of z.
  auto extinct = [&](double sigma) {
    ProxProblem pb{.f = z, .sigma = sigma, .functional = J, .data_p = 2, .data_norm = {},
                   .tol = 1e-12, .max_iter = 200000};
    ProxSolution s = solve_prox(pb);
    return s.u.norm() <= 1e-7 * zn;
  };

  const double jz = J.value(z);
  double hi = jz > 0.0 ? zn * zn / jz : 1.0;  // always a lower bound
  if (extinct(hi)) return hi;
  double lo = hi;
  hi *= 2.0;
  while (!extinct(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12 * (1.0 + zn)) throw NumericalError("dual_seminorm: no extinction found");
  }
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (extinct(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace nleig
