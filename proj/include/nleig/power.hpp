#pragma once

#include "nleig/prox.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nleig {

enum class ParameterRule { Constant, Variable };
enum class PowerStatus { Converged, Stalled, MaxIterations };

std::string to_string(ParameterRule rule);
std::string to_string(PowerStatus status);

struct PowerConfig {
  int data_p = 2;
  std::optional<NormKind> data_norm;  // as in ProxProblem
  NormKind normalization = NormKind::L2;
  ParameterRule rule = ParameterRule::Variable;
  double c = 0.5;
  long max_iter = 1000;
  double angle_tol = 1e-6;
  double affinity_tol = 1e-4;
  double rq_stall_tol = 1e-10;
  int stall_window = 5;
  double ext_eps = 1e-8;
  double inner_tol = 1e-8;
  long inner_max_iter = 50000;
};

void validate(const PowerConfig& cfg);

struct PowerRecord {
  long k = 0;
  double sigma = 0.0;
  double J = 0.0;              // J(u^k)
  double rayleigh = 0.0;       // quotient of u^k
  double rayleigh_half = 0.0;  // quotient of u^{k+1/2}, same anchor as u^k
  double angle = 0.0;          // ||u_half - u||^p - | ||u_half|| - ||u|| |^p in the data norm
  std::optional<double> cos;   // data_p = 2 only
  std::optional<double> affinity;  // one-homogeneous J, data_p = 2 only
  double mu = 0.0;             // norm of the projected half step
  double min_entry = 0.0;      // of u^{k+1}
  long inner_iterations = 0;
  double inner_gap = 0.0;
  bool inner_converged = true;
};

struct PowerTrace {
  double initial_min_entry = 0.0;
  std::vector<PowerRecord> records;
};

struct EigenResult {
  VertexField u;
  double lambda = 0.0;  // Rayleigh quotient of u in the data norm
  double mu = 0.0;
  double sigma = 0.0;
  PowerStatus status = PowerStatus::MaxIterations;
  long iterations = 0;
};

struct PowerStep {
  VertexField u_half;
  VertexField u_next;
  double mu = 0.0;
  ProxSolution prox;
};

double step_size(ParameterRule rule, double c, double J0, double Jk);

// Project onto the complement of N(J), zero the constraint set, normalize.
VertexField normalize_initial(const Functional& J, const VertexField& u0, NormKind normalization);

// One iteration of the proximal power method at a given sigma.
PowerStep power_step(const Functional& J, const VertexField& u, double sigma,
                     const PowerConfig& cfg);

double angle_metric(const VertexField& u_half, const VertexField& u, int p, NormKind norm);
std::optional<double> cosine(const VertexField& u_half, const VertexField& u);
// ||zeta||^2 / J(zeta) with zeta = (u - u_half) / sigma; one-homogeneous J only.
std::optional<double> affinity(const Functional& J, const VertexField& u,
                               const VertexField& u_half, double sigma);

struct PowerRun {
  EigenResult result;
  PowerTrace trace;
};

// Throws ExtinctionError when a half step lands in N(J) and
// DegenerateInputError when u0 does.
PowerRun run_power(const Functional& J, const VertexField& u0, const PowerConfig& cfg);

struct CertifyReport {
  double lambda = 0.0;
  double mu = 0.0;
  double residual = 0.0;  // || lambda u - zeta / mu^(alpha-1) ||_2
  double subgradient_violation = 0.0;  // worst J(u) + <zeta, v - u> - J(v) over samples
  bool certified = false;
};

// Only data_p = 2 with the L2 norm is certifiable.
CertifyReport certify(const Functional& J, const EigenResult& r, const PowerConfig& cfg,
                      double residual_tol = 1e-6, int samples = 100, std::uint64_t seed = 1);

// True when every iterate (and u0) has min entry >= -tol.
bool positivity_guard(const PowerTrace& trace, double tol = 1e-10);

}  // namespace nleig
