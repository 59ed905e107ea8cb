#include "nleig/flows.hpp"

#include "nleig/errors.hpp"

#include <cmath>

namespace nleig {

std::string to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::MinMove:
      return "minmove";
    case FlowKind::NormalizedGF:
      return "ngf";
    case FlowKind::FAGP:
      return "fagp";
    case FlowKind::Nossek:
      return "nossek";
  }
  return "unknown";
}

FlowKind parse_flow_kind(const std::string& s) {
  if (s == "minmove") return FlowKind::MinMove;
  if (s == "ngf") return FlowKind::NormalizedGF;
  if (s == "fagp") return FlowKind::FAGP;
  if (s == "nossek") return FlowKind::Nossek;
  throw InputError("unknown flow kind '" + s + "'");
}

namespace {

void validate(const FlowConfig& cfg) {
  if (!(cfg.dt >= 0.0) || !std::isfinite(cfg.dt)) throw InputError("flow: dt must be >= 0");
  if (cfg.steps <= 0) throw InputError("flow: steps must be positive");
  if (cfg.data_p != 1 && cfg.data_p != 2) throw InputError("flow: data_p must be 1 or 2");
  if (!(cfg.blowup > 1.0)) throw InputError("flow: blowup factor must exceed 1");
}

double default_dt(const Functional& J, const VertexField& f, const FlowConfig& cfg) {
  if (cfg.dt > 0.0) return cfg.dt;
  const double r = rayleigh(J, f, NormKind::L2);
  if (!(r > 0.0)) throw DegenerateInputError("flow: initial Rayleigh quotient is zero");
  return 1e-3 / r;
}

FlowRecord record(const Functional& J, const VertexField& u, const VertexField& anchor,
                  NormKind kind, double t) {
  FlowRecord r;
  r.t = t;
  r.J = J.value(u);
  r.norm = norm(VertexField(u - anchor), kind);
  r.rayleigh = r.norm > 0.0 ? J.alpha() * r.J / std::pow(r.norm, J.alpha()) : 0.0;
  return r;
}

// Unit vector in the complement of N(J), feasible for the constraint set.
VertexField unit_start(const Functional& J, const VertexField& f) {
  VertexField u = J.restrict_to_feasible(f);
  u -= J.nullspace_project(u);
  const double n = u.norm();
  if (n == 0.0) throw DegenerateInputError("flow: initial field lies in the nullspace");
  return u / n;
}

FlowTrace implicit_flow(const Functional& J, const VertexField& f, const FlowConfig& cfg,
                        int data_p, bool normalized) {
  validate(cfg);
  check_length(J.graph(), f, "flow");
  FlowTrace tr;
  VertexField u = J.restrict_to_feasible(f);
  tr.anchor = J.nullspace_project(u);
  const double f_dist = (u - tr.anchor).norm();
  if (f_dist == 0.0) {
    // Already a minimizer: the scheme is stationary. The normalized curve is
    // undefined there.
    if (normalized) throw DegenerateInputError("flow: initial field lies in the nullspace");
    tr.dt = cfg.dt;
    tr.records.push_back(record(J, u, tr.anchor, NormKind::L2, 0.0));
    if (cfg.keep_states) tr.states.push_back(u);
    tr.final_state = u;
    tr.extinct = true;
    return tr;
  }
  tr.dt = default_dt(J, u, cfg);
  const double tau = std::pow(tr.dt, data_p - 1);
  const NormKind kind = data_p == 2 ? NormKind::L2 : cfg.data_norm.value_or(NormKind::L1);
  const double a = J.alpha();

  // u = anchor + s * w with ||w|| = 1. Both J and the data term ignore the
  // nullspace shift, and prox(s w, tau) = s prox(w, tau s^(a - p)), so the
  // step runs on w. Subtracting the anchor from u directly would leave only
  // roundoff once u has nearly settled.
  VertexField w = (u - tr.anchor) / f_dist;
  double s = f_dist;

  auto rec = [&](double t) {
    FlowRecord r;
    r.t = t;
    const VertexField v = normalized ? VertexField(w - J.nullspace_project(w)) : w;
    const double jw = J.value(v);
    const double nw = norm(v, normalized ? NormKind::L2 : kind);
    const double scale = normalized ? 1.0 / nw : s;
    r.J = std::pow(scale, a) * jw;
    r.norm = scale * nw;
    r.rayleigh = nw > 0.0 ? a * jw / std::pow(nw, a) : 0.0;
    return r;
  };
  auto store = [&]() {
    if (!cfg.keep_states) return;
    if (normalized) {
      tr.raw.push_back(s * w);
      const VertexField v = w - J.nullspace_project(w);
      tr.states.push_back(v / v.norm());
    } else {
      tr.states.push_back(tr.anchor + s * w);
    }
  };

  tr.records.push_back(rec(0.0));
  store();
  for (long k = 0; k < cfg.steps; ++k) {
    ProxProblem pb{.f = w,
                   .sigma = tau * std::pow(s, a - data_p),
                   .functional = J,
                   .data_p = data_p,
                   .data_norm = cfg.data_norm,
                   .tol = cfg.inner_tol,
                   .max_iter = cfg.inner_max_iter};
    ProxSolution sol = solve_prox(pb);
    const double t = tr.dt * static_cast<double>(k + 1);
    const VertexField null = J.nullspace_project(sol.u);
    if ((sol.u - null).norm() <= 1e-10 || J.value(sol.u) == 0.0) {
      tr.extinct = true;
      w = null;
      if (!normalized) {
        tr.records.push_back(rec(t));
        tr.records.back().rayleigh = 0.0;
        if (cfg.keep_states) tr.states.push_back(tr.anchor + s * w);
      }
      break;
    }
    const double nx = sol.u.norm();
    s *= nx;
    w = sol.u / nx;
    if (!std::isfinite(s) || s == 0.0) throw NumericalError("flow: iterate scale left the floating range");
    tr.records.push_back(rec(t));
    store();
  }
  if (normalized) {
    tr.final_state = tr.extinct && !tr.states.empty() ? tr.states.back() : [&] {
      const VertexField v = w - J.nullspace_project(w);
      return VertexField(v / v.norm());
    }();
  } else {
    tr.final_state = tr.anchor + s * w;
  }
  return tr;
}

}  // namespace

FlowTrace run_minmove(const Functional& J, const VertexField& f, const FlowConfig& cfg) {
  return implicit_flow(J, f, cfg, cfg.data_p, false);
}

FlowTrace run_normalized_gf(const Functional& J, const VertexField& f, const FlowConfig& cfg) {
  return implicit_flow(J, f, cfg, 2, true);
}

FlowTrace run_fagp(const Functional& J, const VertexField& f, const FlowConfig& cfg) {
  validate(cfg);
  check_length(J.graph(), f, "flow");
  FlowTrace tr;
  VertexField u = unit_start(J, f);
  tr.anchor = VertexField::Zero(u.size());
  tr.dt = default_dt(J, u, cfg);
  const double a = J.alpha();

  auto rhs = [&](const VertexField& x) {
    const VertexField xp = x - J.nullspace_project(x);
    const double H = xp.norm();
    if (!(H > 0.0)) throw FlowError("fagp: state collapsed into the nullspace");
    const double R = a * J.value(x) / H;
    return VertexField(R * xp / H - J.subgradient(x));
  };

  FlowRecord r0 = record(J, u, tr.anchor, NormKind::L2, 0.0);
  r0.rhs_norm = rhs(u).norm();
  tr.records.push_back(r0);
  if (cfg.keep_states) tr.states.push_back(u);
  for (long k = 0; k < cfg.steps; ++k) {
    u += tr.dt * rhs(u);
    u = J.restrict_to_feasible(u);
    const double n = u.norm();
    if (!std::isfinite(n) || n > cfg.blowup) {
      throw FlowError("fagp: norm reached " + std::to_string(n) + " at step " +
                      std::to_string(k + 1) + "; reduce dt");
    }
    FlowRecord r = record(J, u, tr.anchor, NormKind::L2, tr.dt * static_cast<double>(k + 1));
    r.rhs_norm = rhs(u).norm();
    tr.records.push_back(r);
    if (cfg.keep_states) tr.states.push_back(u);
  }
  tr.final_state = u;
  return tr;
}

FlowTrace run_nossek(const Functional& J, const VertexField& f, const FlowConfig& cfg) {
  validate(cfg);
  check_length(J.graph(), f, "flow");
  FlowTrace tr;
  VertexField v = unit_start(J, f);
  tr.anchor = VertexField::Zero(v.size());
  tr.dt = default_dt(J, v, cfg);
  const double a = J.alpha();

  struct Eval {
    VertexField rhs;
    double quotient;
    double R;
  };
  auto eval = [&](const VertexField& x) {
    const VertexField xp = x - J.nullspace_project(x);
    const double H = xp.norm();
    const VertexField eta = J.subgradient(x);
    const VertexField peta = eta - J.nullspace_project(eta);
    const double Hs = peta.norm();
    if (!(H > 0.0) || !(Hs > 1e-14 * (1.0 + eta.norm()))) {
      throw FlowError("nossek: dual seminorm of the subgradient vanished (extinction)");
    }
    Eval e;
    e.rhs = xp / H - eta / Hs;
    e.quotient = eta.dot(x) / (H * Hs);
    e.R = a * J.value(x) / H;
    return e;
  };

  double phi = 0.0;  // time of the reparametrized flow
  Eval e = eval(v);
  FlowRecord r0 = record(J, v, tr.anchor, NormKind::L2, 0.0);
  r0.quotient = e.quotient;
  r0.phi = phi;
  r0.rhs_norm = e.rhs.norm();
  tr.records.push_back(r0);
  if (cfg.keep_states) tr.states.push_back(v);
  for (long k = 0; k < cfg.steps; ++k) {
    // phi' = R(v(phi)) inverts to dt_phi = ds / R
    phi += tr.dt / e.R;
    v += tr.dt * e.rhs;
    v = J.restrict_to_feasible(v);
    const double n = v.norm();
    if (!std::isfinite(n) || n > cfg.blowup) {
      throw FlowError("nossek: norm reached " + std::to_string(n) + " at step " +
                      std::to_string(k + 1) + "; reduce dt");
    }
    e = eval(v);
    FlowRecord r = record(J, v, tr.anchor, NormKind::L2, tr.dt * static_cast<double>(k + 1));
    r.quotient = e.quotient;
    r.phi = phi;
    r.rhs_norm = e.rhs.norm();
    tr.records.push_back(r);
    if (cfg.keep_states) tr.states.push_back(v);
  }
  tr.final_state = v;
  return tr;
}

FlowTrace run_flow(const Functional& J, const VertexField& f, const FlowConfig& cfg) {
  switch (cfg.kind) {
    case FlowKind::MinMove:
      return run_minmove(J, f, cfg);
    case FlowKind::NormalizedGF:
      return run_normalized_gf(J, f, cfg);
    case FlowKind::FAGP:
      return run_fagp(J, f, cfg);
    case FlowKind::Nossek:
      return run_nossek(J, f, cfg);
  }
  throw InputError("unknown flow kind");
}

RescaledFlowReport rescaled_flow_check(const Functional& J, const FlowTrace& ngf) {
  if (ngf.raw.size() < 2 || ngf.raw.size() != ngf.states.size()) {
    throw InputError("rescaled_flow_check: needs a normalized flow trace with stored states");
  }
  const double a = J.alpha();
  RescaledFlowReport rep;
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < ngf.raw.size(); ++k) {
    const VertexField& u0 = ngf.raw[k];
    const VertexField& u1 = ngf.raw[k + 1];
    const double n1 = u1.norm();
    if (n1 == 0.0) break;
    const VertexField& w0 = ngf.states[k];
    const VertexField& w1 = ngf.states[k + 1];
    const VertexField zeta = (u0 - u1) / ngf.dt;  // in dJ(u1)
    const double ds = ngf.dt * std::pow(n1, a - 2.0);
    const VertexField target = a * J.value(w1) * w1 - zeta / std::pow(n1, a - 1.0);
    const double res = ((w1 - w0) / ds - target).norm();
    rep.max_residual = std::max(rep.max_residual, res);
    sum += res;
    ++rep.steps;
  }
  if (rep.steps > 0) rep.mean_residual = sum / static_cast<double>(rep.steps);
  return rep;
}

}  // namespace nleig
