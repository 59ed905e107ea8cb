#include "nleig/power.hpp"

#include "nleig/errors.hpp"
#include "nleig/rng.hpp"

#include <cmath>
#include <sstream>

namespace nleig {

std::string to_string(ParameterRule rule) {
  return rule == ParameterRule::Constant ? "constant" : "variable";
}

std::string to_string(PowerStatus status) {
  switch (status) {
    case PowerStatus::Converged:
      return "converged";
    case PowerStatus::Stalled:
      return "stalled";
    case PowerStatus::MaxIterations:
      return "max_iterations";
  }
  return "unknown";
}

void validate(const PowerConfig& cfg) {
  if (!(cfg.c > 0.0 && cfg.c < 1.0)) throw InputError("power: c must lie in (0, 1)");
  if (cfg.data_p != 1 && cfg.data_p != 2) throw InputError("power: data_p must be 1 or 2");
  if (cfg.max_iter <= 0) throw InputError("power: max_iter must be positive");
  if (!(cfg.angle_tol > 0.0) || !(cfg.affinity_tol > 0.0) || !(cfg.rq_stall_tol > 0.0) ||
      !(cfg.ext_eps > 0.0) || !(cfg.inner_tol > 0.0)) {
    throw InputError("power: thresholds must be positive");
  }
  if (cfg.stall_window <= 0) throw InputError("power: stall window must be positive");
}

double step_size(ParameterRule rule, double c, double J0, double Jk) {
  const double j = rule == ParameterRule::Constant ? J0 : Jk;
  if (!(j > 0.0)) throw DegenerateInputError("step size: J must be positive");
  return c / j;
}

VertexField normalize_initial(const Functional& J, const VertexField& u0, NormKind normalization) {
  check_length(J.graph(), u0, "power");
  if (!u0.allFinite()) throw InputError("power: initial field has non-finite entries");
  VertexField u = J.restrict_to_feasible(u0);
  u -= J.nullspace_project(u);
  const double n = norm(u, normalization);
  if (n == 0.0 || J.value(u) == 0.0) {
    throw DegenerateInputError("power: initial field lies in the nullspace");
  }
  return u / n;
}

namespace {

NormKind resolved_norm(const PowerConfig& cfg) {
  if (cfg.data_p == 2) return NormKind::L2;
  return cfg.data_norm.value_or(NormKind::L1);
}

double min_entry(const VertexField& u) { return u.size() ? u.minCoeff() : 0.0; }

}  // namespace

PowerStep power_step(const Functional& J, const VertexField& u, double sigma,
                     const PowerConfig& cfg) {
  ProxProblem pb{.f = u,
                 .sigma = sigma,
                 .functional = J,
                 .data_p = cfg.data_p,
                 .data_norm = cfg.data_norm,
                 .tol = cfg.inner_tol,
                 .max_iter = cfg.inner_max_iter};

  PowerStep st;
  st.prox = solve_prox(pb);
  st.u_half = st.prox.u;
  VertexField projected = st.u_half - J.nullspace_project(st.u_half);
  st.mu = norm(projected, cfg.normalization);
  const double scale = norm(u, cfg.normalization);
  if (!(st.mu > cfg.ext_eps * scale)) {
    double lower = 0.0;
    try {
      lower = extinction_bounds(J, u, cfg.data_p, resolved_norm(cfg)).lower;
    } catch (const DegenerateInputError&) {
    }
    std::ostringstream msg;
    msg << "power: prox step at sigma=" << sigma
        << " landed in the nullspace; reduce c (extinction time is at least " << lower << ")";
    throw ExtinctionError(msg.str(), sigma, lower);
  }
  st.u_next = projected / st.mu;
  return st;
}

double angle_metric(const VertexField& u_half, const VertexField& u, int p, NormKind kind) {
  if (u_half.size() != u.size()) throw DimensionError("angle_metric: length mismatch");
  const double nh = norm(u_half, kind);
  if (nh == 0.0) throw DegenerateInputError("angle_metric: zero half step");
  const double d = norm(VertexField(u_half - u), kind);
  const double r = std::abs(nh - norm(u, kind));
  return std::max(std::pow(d, p) - std::pow(r, p), 0.0);
}

std::optional<double> cosine(const VertexField& u_half, const VertexField& u) {
  const double a = u_half.norm();
  const double b = u.norm();
  if (a == 0.0 || b == 0.0) return std::nullopt;
  return u_half.dot(u) / (a * b);
}

std::optional<double> affinity(const Functional& J, const VertexField& u, const VertexField& u_half,
                               double sigma) {
  if (J.alpha() != 1.0) return std::nullopt;
  const VertexField zeta = (u - u_half) / sigma;
  const double jz = J.value(zeta);
  if (jz <= 0.0 || zeta.squaredNorm() == 0.0) return std::nullopt;
  return zeta.squaredNorm() / jz;
}

PowerRun run_power(const Functional& J, const VertexField& u0, const PowerConfig& cfg) {
  validate(cfg);
  const NormKind dnorm = resolved_norm(cfg);
  const bool hilbert = cfg.data_p == 2;

  PowerRun run;
  run.trace.initial_min_entry = min_entry(u0);
  VertexField u = normalize_initial(J, u0, cfg.normalization);
  const double J0 = J.value(u);

  int stalled = 0;
  double sigma = 0.0;
  double mu = 0.0;
  long k = 0;
  run.result.status = PowerStatus::MaxIterations;
  for (; k < cfg.max_iter; ++k) {
    const double Jk = J.value(u);
    sigma = step_size(cfg.rule, cfg.c, J0, Jk);
    PowerStep st = power_step(J, u, sigma, cfg);
    mu = st.mu;

    PowerRecord rec;
    rec.k = k;
    rec.sigma = sigma;
    rec.J = Jk;
    const VertexField anchor = J.nullspace_project(u);
    rec.rayleigh = rayleigh(J, u, anchor, dnorm);
    rec.rayleigh_half = rayleigh(J, st.u_half, anchor, dnorm);
    rec.angle = angle_metric(st.u_half, u, cfg.data_p, dnorm);
    if (hilbert) {
      rec.cos = cosine(st.u_half, u);
      rec.affinity = affinity(J, u, st.u_half, sigma);
    }
    rec.mu = st.mu;
    rec.min_entry = min_entry(st.u_next);
    rec.inner_iterations = st.prox.iterations;
    rec.inner_gap = st.prox.gap;
    rec.inner_converged = st.prox.converged;
    run.trace.records.push_back(rec);

    const double r_next = rayleigh(J, st.u_next, J.nullspace_project(st.u_next), dnorm);
    u = std::move(st.u_next);

    bool done = rec.angle <= cfg.angle_tol;
    if (rec.cos) done = done && 1.0 - *rec.cos <= cfg.angle_tol;
    if (rec.affinity) done = done && *rec.affinity >= 1.0 - cfg.affinity_tol;
    if (done) {
      run.result.status = PowerStatus::Converged;
      ++k;
      break;
    }
    stalled = std::abs(r_next - rec.rayleigh) < cfg.rq_stall_tol ? stalled + 1 : 0;
    if (stalled >= cfg.stall_window) {
      run.result.status = PowerStatus::Stalled;
      ++k;
      break;
    }
  }

  run.result.u = u;
  run.result.iterations = k;
  run.result.sigma = sigma;
  run.result.mu = mu;
  run.result.lambda = rayleigh(J, u, dnorm);
  return run;
}

CertifyReport certify(const Functional& J, const EigenResult& r, const PowerConfig& cfg,
                      double residual_tol, int samples, std::uint64_t seed) {
  if (cfg.data_p != 2) throw InputError("certify: only data_p = 2 is certifiable");
  if (!(r.sigma > 0.0)) throw InputError("certify: result has no step size");
  PowerConfig c2 = cfg;
  c2.normalization = NormKind::L2;
  const VertexField u = r.u / r.u.norm();
  PowerStep st = power_step(J, u, r.sigma, c2);

  CertifyReport rep;
  rep.mu = st.mu;
  const double a = J.alpha();
  const double scale = std::pow(st.mu, a - 1.0);
  rep.lambda = (1.0 - st.mu) / (r.sigma * scale);
  // zeta lies in dJ(u_half) = mu^(alpha-1) dJ(u) when u_half = mu u.
  const VertexField zeta = (u - st.u_half) / (r.sigma * scale);
  rep.residual = (rep.lambda * u - zeta).norm();

  Rng rng(seed);
  const double ju = J.value(u);
  for (int s = 0; s < samples; ++s) {
    VertexField v = J.restrict_to_feasible(rng.normal_field(u.size()));
    const double viol = ju + zeta.dot(v - u) - J.value(v);
    rep.subgradient_violation = std::max(rep.subgradient_violation, viol / (1.0 + std::abs(J.value(v))));
  }
  rep.certified = rep.residual <= residual_tol && rep.subgradient_violation <= residual_tol;
  return rep;
}

bool positivity_guard(const PowerTrace& trace, double tol) {
  if (trace.initial_min_entry < -tol) return false;
  for (const auto& r : trace.records) {
    if (r.min_entry < -tol) return false;
  }
  return true;
}

}  // namespace nleig
