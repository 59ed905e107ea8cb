#pragma once

#include "nleig/functional.hpp"

#include <optional>

namespace nleig {

// argmin_u (1/p) ||u - f||^p + sigma J(u)
struct ProxProblem {
  VertexField f;
  double sigma;
  Functional functional;
  int data_p = 2;
  // L2 for data_p = 2; L1 (default) or L2 for data_p = 1.
  std::optional<NormKind> data_norm;
  double tol = 1e-8;
  long max_iter = 50000;
};

struct ProxSolution {
  VertexField u;
  double gap = 0.0;  // normalized duality gap, (P - D) / (1 + |P|)
  long iterations = 0;
  bool converged = false;
  bool hit_exact_reconstruction = false;  // u == f up to solver accuracy
  bool hit_extinction = false;            // u in N(J) up to solver accuracy
};

NormKind data_norm(const ProxProblem& pb);
void validate(const ProxProblem& pb);

// (1/p) ||u - f||^p + sigma J(u); throws InfeasibleError off the constraint set.
double objective(const ProxProblem& pb, const VertexField& u);

// Primal-dual hybrid gradient on the splitting J = G o K, or conjugate
// gradients for the quadratic case (Dirichlet p = 2, data_p = 2).
// Infeasible data is projected onto the constraint set first.
ProxSolution solve_prox(const ProxProblem& pb);

// ---- Bounds on exact reconstruction and extinction times ----

// inf over u_hat in N(J) of ||f - u_hat|| / J(f), measured in `norm`.
double exact_reconstruction_bound(const Functional& J, const VertexField& f,
                                  NormKind norm = NormKind::L2);

// 1 / ||zeta||_* when the subdifferential at f is a single element modulo the
// normal cone of the constraint set; nullopt otherwise.
std::optional<double> exact_reconstruction_time(const Functional& J, const VertexField& f,
                                                NormKind norm = NormKind::L2);

struct ExtinctionBounds {
  double lower;
  std::optional<double> upper;
};

// lower = dist(f, N)^p / J(f); upper = dist(f, N)^(p-1) / lambda1, where
// lambda1 > 0 satisfies lambda1 ||u - u_hat|| <= J(u) for all u.
ExtinctionBounds extinction_bounds(const Functional& J, const VertexField& f, int data_p,
                                   NormKind norm, std::optional<double> lambda1 = std::nullopt);

}  // namespace nleig
