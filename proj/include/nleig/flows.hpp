#pragma once

#include "nleig/prox.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nleig {

enum class FlowKind { MinMove, NormalizedGF, FAGP, Nossek };

std::string to_string(FlowKind kind);
FlowKind parse_flow_kind(const std::string& s);

struct FlowConfig {
  FlowKind kind = FlowKind::MinMove;
  // Step size; 0 selects 1e-3 / R(f).
  double dt = 0.0;
  long steps = 1000;
  int data_p = 2;  // MinMove only
  std::optional<NormKind> data_norm;
  double inner_tol = 1e-10;
  long inner_max_iter = 50000;
  // Explicit flows abort once ||u|| exceeds this multiple of ||f||.
  double blowup = 10.0;
  bool keep_states = false;
};

struct FlowRecord {
  double t = 0.0;
  double J = 0.0;
  double norm = 0.0;      // ||u - u_bar||: data norm for MinMove, l2 otherwise
  double rayleigh = 0.0;  // alpha J(u) / ||u - u_bar||^alpha
  // Nossek: <zeta, u> / (H(u) H_*(zeta)) and the reparametrized time.
  std::optional<double> quotient;
  std::optional<double> phi;
  // Explicit flows: ||right-hand side||_2.
  std::optional<double> rhs_norm;
};

struct FlowTrace {
  double dt = 0.0;
  std::vector<FlowRecord> records;  // records[0] is the initial state
  // NormalizedGF stores the normalized curve w here and the raw iterates,
  // minus the anchor, in `raw`; the other kinds store u. Filled only with
  // keep_states.
  std::vector<VertexField> states;
  std::vector<VertexField> raw;
  VertexField anchor;  // nullspace projection of f
  VertexField final_state;
  bool extinct = false;
};

// Implicit scheme u^{k+1} = prox^p_{dt^(p-1) J}(u^k).
FlowTrace run_minmove(const Functional& J, const VertexField& f, const FlowConfig& cfg);
// MinMove with p = 2 followed by w = (u - f_bar) / ||u - f_bar||.
FlowTrace run_normalized_gf(const Functional& J, const VertexField& f, const FlowConfig& cfg);
// Explicit Euler on u' = R(u) q - zeta with H the L2 quotient norm,
// R = alpha J / H and q = (u - u_bar) / H. No renormalization.
FlowTrace run_fagp(const Functional& J, const VertexField& f, const FlowConfig& cfg);
// Explicit Euler on v' = r - eta / H_*(eta) with H_*(eta) = ||P eta||_2.
FlowTrace run_nossek(const Functional& J, const VertexField& f, const FlowConfig& cfg);

FlowTrace run_flow(const Functional& J, const VertexField& f, const FlowConfig& cfg);

struct RescaledFlowReport {
  double max_residual = 0.0;
  double mean_residual = 0.0;
  long steps = 0;
};

// Residual of the normalized curve against v' = alpha J(v) v - zeta(v) in the
// rescaled time ds = ||u - f_bar||^(alpha - 2) dt, with zeta taken from the
// implicit step. Needs a NormalizedGF trace run with keep_states.
RescaledFlowReport rescaled_flow_check(const Functional& J, const FlowTrace& ngf);

}  // namespace nleig
