#include "nleig/prox.hpp"

#include "nleig/errors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace nleig {

NormKind data_norm(const ProxProblem& pb) {
  if (pb.data_p == 2) return NormKind::L2;
  return pb.data_norm.value_or(NormKind::L1);
}

void validate(const ProxProblem& pb) {
  check_length(pb.functional.graph(), pb.f, "prox");
  if (!(pb.sigma > 0.0) || !std::isfinite(pb.sigma)) throw InputError("prox: sigma must be > 0");
  if (!(pb.tol > 0.0)) throw InputError("prox: tol must be > 0");
  if (pb.max_iter <= 0) throw InputError("prox: max_iter must be positive");
  if (pb.data_p != 1 && pb.data_p != 2) throw InputError("prox: data_p must be 1 or 2");
  if (pb.data_p == 2 && pb.data_norm && *pb.data_norm != NormKind::L2) {
    throw InputError("prox: data_p = 2 needs the L2 data norm");
  }
  if (data_norm(pb) == NormKind::Linf) throw InputError("prox: Linf data norm is not supported");
  if (!pb.f.allFinite()) throw InputError("prox: input has non-finite entries");
}

double objective(const ProxProblem& pb, const VertexField& u) {
  const double d = norm(VertexField(u - pb.f), data_norm(pb));
  const double data = pb.data_p == 2 ? 0.5 * d * d : d;
  return data + pb.sigma * pb.functional.value(u);
}

namespace {

// Euclidean projection onto { q : ||q||_1 <= r }.
void project_l1_ball(Eigen::VectorXd& q, double r) {
  if (q.lpNorm<1>() <= r) return;
  std::vector<double> a(static_cast<std::size_t>(q.size()));
  for (Index i = 0; i < q.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(q[i]);
  std::sort(a.begin(), a.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    cum += a[k];
    const double t = (cum - r) / static_cast<double>(k + 1);
    if (k + 1 == a.size() || a[k + 1] <= t) {
      theta = t;
      break;
    }
  }
  for (Index i = 0; i < q.size(); ++i) {
    const double m = std::max(std::abs(q[i]) - theta, 0.0);
    q[i] = q[i] > 0 ? m : -m;
  }
}

// argmin_y 1/2 (y - z)^2 + a |y|^p for p > 1.
double prox_power(double z, double a, double p) {
  const double s = z < 0 ? -1.0 : 1.0;
  const double x = std::abs(z);
  if (x == 0.0) return 0.0;
  if (p == 2.0) return z / (1.0 + 2.0 * a);
  double lo = 0.0;
  double hi = x;
  double y = x / (1.0 + a * p * std::pow(x, p - 2.0));
  if (!(y > lo && y < hi)) y = 0.5 * x;
  for (int it = 0; it < 200; ++it) {
    const double g = y + a * p * std::pow(y, p - 1.0) - x;
    if (g > 0) hi = y; else lo = y;
    if (std::abs(g) <= 1e-12 * x || hi - lo <= 1e-15 * x) break;
    const double dg = 1.0 + a * p * (p - 1.0) * std::pow(y, p - 2.0);
    double next = y - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    y = next;
  }
  return s * y;
}

// F = sigma G and its conjugate, per functional kind.
struct DualTerm {
  const Functional& J;
  double sigma;

  double c() const { return 2.0 * sigma; }  // Dirichlet edge coefficient

  bool smooth_dirichlet() const {
    return J.kind() == FunctionalKind::GraphDirichlet && J.p() > 1.0;
  }

  // q <- prox_{s F*}(q)
  void prox_conj(Eigen::VectorXd& q, double s) const {
    switch (J.kind()) {
      case FunctionalKind::GraphTV:
        q = q.cwiseMax(-c()).cwiseMin(c());
        return;
      case FunctionalKind::GraphDirichlet:
        if (!smooth_dirichlet()) {
          q = q.cwiseMax(-c()).cwiseMin(c());
          return;
        }
        for (Index e = 0; e < q.size(); ++e) {
          q[e] = q[e] - s * prox_power(q[e] / s, c() / s, J.p());
        }
        return;
      case FunctionalKind::GraphLipschitz:
        project_l1_ball(q, sigma);
        return;
      case FunctionalKind::GridTVCentral: {
        const Index n = q.size() / 2;
        const double r = sigma / (2.0 * J.h());
        for (Index x = 0; x < n; ++x) {
          const double m = std::hypot(q[x], q[n + x]);
          if (m > r) {
            q[x] *= r / m;
            q[n + x] *= r / m;
          }
        }
        return;
      }
    }
  }

  // F*(q) for q inside the domain of F*.
  double conj(const Eigen::VectorXd& q) const {
    if (!smooth_dirichlet()) return 0.0;
    const double p = J.p();
    if (p == 2.0) return q.squaredNorm() / (4.0 * c());
    double s = 0.0;
    for (Index e = 0; e < q.size(); ++e) {
      const double a = std::abs(q[e]);
      s += (1.0 - 1.0 / p) * a * std::pow(a / (c() * p), 1.0 / (p - 1.0));
    }
    return s;
  }
};

struct Pdhg {
  const ProxProblem& pb;
  const Functional& J;
  VertexField f;  // feasible data
  NormKind dnorm;
  DualTerm F;
  std::vector<Index> free;

  Pdhg(const ProxProblem& p, VertexField feasible_f)
      : pb(p), J(p.functional), f(std::move(feasible_f)), dnorm(data_norm(p)), F{J, p.sigma} {
    const auto& mask = J.pinned_mask();
    for (Index v = 0; v < f.size(); ++v) {
      if (!mask[static_cast<std::size_t>(v)]) free.push_back(v);
    }
  }

  // u <- prox_{t D}(v), D = data term plus the constraint indicator
  void prox_data(VertexField& v, double t) const {
    if (pb.data_p == 2) {
      v = (v + t * f) / (1.0 + t);
    } else if (dnorm == NormKind::L1) {
      for (Index i = 0; i < v.size(); ++i) {
        const double d = v[i] - f[i];
        v[i] = f[i] + (d > t ? d - t : (d < -t ? d + t : 0.0));
      }
    } else {
      double r = 0.0;
      for (Index i : free) r += (v[i] - f[i]) * (v[i] - f[i]);
      r = std::sqrt(r);
      const double shrink = r > t ? 1.0 - t / r : 0.0;
      v = f + shrink * (v - f);
    }
    for (Index i : J.constraint()) v[i] = 0.0;
  }

  double primal(const VertexField& u) const {
    const double d = norm(VertexField(u - f), dnorm);
    return (pb.data_p == 2 ? 0.5 * d * d : d) + pb.sigma * J.G(J.apply_K(u));
  }

  double dual(const Eigen::VectorXd& q_in) const {
    Eigen::VectorXd q = q_in;
    VertexField z = J.apply_KT(q);
    double zf = 0.0;
    double zn = 0.0;
    double zmax = 0.0;
    for (Index i : free) {
      zf += z[i] * f[i];
      zn += z[i] * z[i];
      zmax = std::max(zmax, std::abs(z[i]));
    }
    if (pb.data_p == 2) return zf - 0.5 * zn - F.conj(q);
    // Scale q into the domain of D*; the dual ball of F contains 0.
    const double r = dnorm == NormKind::L1 ? zmax : std::sqrt(zn);
    const double scale = r > 1.0 ? 1.0 / r : 1.0;
    q *= scale;
    return scale * zf - F.conj(q);
  }

  double gap(const VertexField& u, const Eigen::VectorXd& q) const {
    const double P = primal(u);
    const double g = (P - dual(q)) / (1.0 + std::abs(P));
    return std::max(g, 0.0);
  }

  ProxSolution run() const {
    ProxSolution sol;
    VertexField u = f;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(J.range_size());
    sol.gap = gap(u, q);
    if (sol.gap <= pb.tol) {
      sol.u = u;
      sol.converged = true;
      return sol;
    }

    const double L2 = std::max(J.K_norm_sq_bound(), 1e-300);
    const double tau = 1.0 / std::sqrt(L2);
    const double s = 1.0 / std::sqrt(L2);
    VertexField ubar = u;
    VertexField uold;
    VertexField best = u;
    long it = 0;
    while (it < pb.max_iter) {
      Eigen::VectorXd qn = q + s * J.apply_K(ubar);
      F.prox_conj(qn, s);
      q.swap(qn);
      uold = u;
      u -= tau * J.apply_KT(q);
      prox_data(u, tau);
      ubar = 2.0 * u - uold;
      ++it;
      if (it % 10 == 0 || it == pb.max_iter) {
        best = u;
        sol.gap = gap(u, q);
        if (pb.data_p == 2) {
          // The primal point attached to q is often exact once the dual has
          // identified its active set.
          VertexField ud = f - J.apply_KT(q);
          for (Index i : J.constraint()) ud[i] = 0.0;
          const double gd = gap(ud, q);
          if (gd < sol.gap) {
            sol.gap = gd;
            best = std::move(ud);
          }
        }
        if (sol.gap <= pb.tol) {
          sol.converged = true;
          break;
        }
      }
    }
    u = best;
    sol.u = u;
    sol.iterations = it;
    return sol;
  }
};

ProxSolution solve_quadratic(const ProxProblem& pb, const VertexField& f) {
  const Functional& J = pb.functional;
  const WeightedGraph& g = J.graph();
  const auto& mask = J.pinned_mask();
  std::vector<Index> slot(static_cast<std::size_t>(g.num_vertices()), -1);
  Index m = 0;
  for (Index v = 0; v < g.num_vertices(); ++v) {
    if (!mask[static_cast<std::size_t>(v)]) slot[static_cast<std::size_t>(v)] = m++;
  }
  // (I + 4 sigma L) u = f on the free vertices
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(m);
  for (const Edge& e : g.edges()) {
    const double a = 4.0 * pb.sigma * e.w;
    const Index si = slot[static_cast<std::size_t>(e.i)];
    const Index sj = slot[static_cast<std::size_t>(e.j)];
    if (si >= 0) diag[si] += a;
    if (sj >= 0) diag[sj] += a;
    if (si >= 0 && sj >= 0) {
      trip.emplace_back(si, sj, -a);
      trip.emplace_back(sj, si, -a);
    }
  }
  for (Index k = 0; k < m; ++k) trip.emplace_back(k, k, diag[k]);
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());

  Eigen::VectorXd b(m);
  for (Index v = 0; v < g.num_vertices(); ++v) {
    if (slot[static_cast<std::size_t>(v)] >= 0) b[slot[static_cast<std::size_t>(v)]] = f[v];
  }
  ProxSolution sol;
  sol.u = VertexField::Zero(g.num_vertices());
  if (m == 0) {
    sol.converged = true;
    return sol;
  }
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(pb.tol);
  cg.setMaxIterations(pb.max_iter);
  cg.compute(A);
  Eigen::VectorXd x = cg.solveWithGuess(b, b);
  for (Index v = 0; v < g.num_vertices(); ++v) {
    if (slot[static_cast<std::size_t>(v)] >= 0) sol.u[v] = x[slot[static_cast<std::size_t>(v)]];
  }
  sol.iterations = cg.iterations();
  sol.gap = cg.error();
  sol.converged = cg.info() == Eigen::Success;
  return sol;
}

}  // namespace

ProxSolution solve_prox(const ProxProblem& pb) {
  validate(pb);
  const Functional& J = pb.functional;
  const VertexField f = J.restrict_to_feasible(pb.f);

  ProxSolution sol;
  if (J.kind() == FunctionalKind::GraphDirichlet && J.p() == 2.0 && pb.data_p == 2) {
    sol = solve_quadratic(pb, f);
  } else {
    sol = Pdhg(pb, f).run();
  }

  // The data and its nullspace projection are always candidates; keep
  // whichever of them beats the iterate so exact fixed points stay exact.
  ProxProblem feas = pb;
  feas.f = f;
  double best = objective(feas, sol.u);
  const VertexField anchor = J.nullspace_project(f);
  for (const VertexField* cand : {&f, &anchor}) {
    const double v = objective(feas, *cand);
    if (v <= best) {
      best = v;
      sol.u = *cand;
    }
  }

  const double scale = 1.0 + f.norm();
  const double thresh = std::sqrt(pb.tol) * scale;
  sol.hit_exact_reconstruction = (sol.u - f).norm() <= thresh;
  sol.hit_extinction = (sol.u - J.nullspace_project(sol.u)).norm() <= thresh;
  return sol;
}

double exact_reconstruction_bound(const Functional& J, const VertexField& f, NormKind norm) {
  const double j = J.value(f);
  if (j <= 0.0) throw DegenerateInputError("exact reconstruction bound: J(f) = 0");
  return J.nullspace_distance(f, norm) / j;
}

std::optional<double> exact_reconstruction_time(const Functional& J, const VertexField& f,
                                                NormKind norm) {
  const double j = J.value(f);
  if (j <= 0.0) throw DegenerateInputError("exact reconstruction time: J(f) = 0");
  const Eigen::VectorXd y = J.apply_K(f);
  switch (J.kind()) {
    case FunctionalKind::GraphDirichlet:
      if (J.p() > 1.0) break;
      [[fallthrough]];
    case FunctionalKind::GraphTV:
      for (Index e = 0; e < y.size(); ++e) {
        if (y[e] == 0.0) return std::nullopt;
      }
      break;
    case FunctionalKind::GridTVCentral: {
      const Index n = y.size() / 2;
      for (Index x = 0; x < n; ++x) {
        if (y[x] == 0.0 && y[n + x] == 0.0) return std::nullopt;
      }
      break;
    }
    case FunctionalKind::GraphLipschitz: {
      const double m = y.lpNorm<Eigen::Infinity>();
      Index ties = 0;
      for (Index e = 0; e < y.size(); ++e) ties += std::abs(y[e]) >= m * (1.0 - 1e-12);
      if (ties != 1) return std::nullopt;
      break;
    }
  }
  // Dual of the data norm.
  const VertexField z = J.subgradient(f);
  double dn = 0.0;
  switch (norm) {
    case NormKind::L1:
      dn = z.lpNorm<Eigen::Infinity>();
      break;
    case NormKind::L2:
      dn = z.norm();
      break;
    case NormKind::Linf:
      dn = z.lpNorm<1>();
      break;
  }
  if (dn == 0.0) return std::nullopt;
  return 1.0 / dn;
}

ExtinctionBounds extinction_bounds(const Functional& J, const VertexField& f, int data_p,
                                   NormKind norm, std::optional<double> lambda1) {
  if (data_p != 1 && data_p != 2) throw InputError("extinction bounds: data_p must be 1 or 2");
  if (lambda1 && !(*lambda1 > 0.0)) throw InputError("extinction bounds: lambda1 must be > 0");
  const double j = J.value(f);
  const double d = J.nullspace_distance(f, norm);
  if (j <= 0.0 || d == 0.0) throw DegenerateInputError("extinction bounds: f lies in N(J)");
  ExtinctionBounds b{std::pow(d, data_p) / j, std::nullopt};
  if (lambda1) b.upper = std::pow(d, data_p - 1) / *lambda1;
  return b;
}

}  // namespace nleig
