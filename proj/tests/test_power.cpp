#include "oracles.hpp"

#include "nleig/errors.hpp"
#include "nleig/power.hpp"
#include "nleig/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace nleig;

TEST_CASE("step sizes") {
  CHECK(step_size(ParameterRule::Constant, 0.5, 4.0, 1.0) == doctest::Approx(0.125));
  CHECK(step_size(ParameterRule::Variable, 0.5, 4.0, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(step_size(ParameterRule::Variable, 0.5, 4.0, 0.0), DegenerateInputError);
  PowerConfig cfg;
  cfg.c = 1.0;
  CHECK_THROWS_AS(validate(cfg), InputError);
  cfg.c = 0.5;
  cfg.angle_tol = 0.0;
  CHECK_THROWS_AS(validate(cfg), InputError);
}

TEST_CASE("angle metric and cosine") {
  VertexField u(2), h(2);
  u << 1.0, 0.0;
  h = 0.3 * u;
  CHECK(angle_metric(h, u, 2, NormKind::L2) == doctest::Approx(0.0));
  CHECK(cosine(h, u).value() == doctest::Approx(1.0));
  h << 0.0, 1.0;
  CHECK(angle_metric(h, u, 2, NormKind::L2) == doctest::Approx(2.0));
  CHECK(cosine(h, u).value() == doctest::Approx(0.0));
  CHECK_THROWS_AS(angle_metric(VertexField::Zero(2), u, 2, NormKind::L2), DegenerateInputError);
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    CHECK(angle_metric(rng.normal_field(4), rng.normal_field(4), 1, NormKind::L1) >= 0.0);
  }
}

TEST_CASE("two-node TV is a fixed point in one step") {
  const auto J = Functional::graph_tv(oracle::two_node());
  VertexField u0(2);
  u0 << 1.0, -1.0;
  u0 /= std::sqrt(2.0);
  PowerConfig cfg;
  const PowerRun run = run_power(J, u0, cfg);
  CHECK(run.result.status == PowerStatus::Converged);
  CHECK(run.result.iterations == 1);
  CHECK(run.result.lambda == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(run.trace.records[0].affinity.value() == doctest::Approx(1.0).epsilon(1e-10));

  const CertifyReport rep = certify(J, run.result, cfg);
  CHECK(rep.certified);
  CHECK(rep.lambda == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-6));
  CHECK(rep.mu < 1.0);
}

TEST_CASE("affinity oracle") {
  const auto J = Functional::graph_tv(oracle::path(3));
  VertexField u(3), h(3);
  u << 1.0, 0.0, -1.0;
  h << 0.7, 0.1, -0.5;
  const double sigma = 0.2;
  const VertexField z = (u - h) / sigma;
  // Recomputed by hand under the same double-sum convention.
  const double jz = 2.0 * (std::abs(z[1] - z[0]) + std::abs(z[2] - z[1]));
  CHECK(affinity(J, u, h, sigma).value() == doctest::Approx(z.squaredNorm() / jz));
  // ||zeta||^2 / J(zeta) is one-homogeneous in zeta.
  CHECK(affinity(J, 2.0 * u, 2.0 * h, sigma).value() == doctest::Approx(2.0 * z.squaredNorm() / jz));
  CHECK_FALSE(affinity(Functional::graph_dirichlet(oracle::path(3), 2.0), u, h, sigma).has_value());
}

TEST_CASE("affinity of a prox residual is at most one") {
  // zeta lies in dJ(u_half), so its dual seminorm is at most 1 and
  // ||zeta||^2 = <zeta, zeta> <= J(zeta).
  auto g = oracle::random_connected(6, 0.4, 302);
  const auto J = Functional::graph_tv(g);
  Rng rng(3);
  PowerConfig cfg;
  cfg.inner_tol = 1e-12;
  for (int t = 0; t < 20; ++t) {
    const VertexField u = normalize_initial(J, rng.normal_field(6), NormKind::L2);
    const double sigma = 0.2 / J.value(u);
    const PowerStep st = power_step(J, u, sigma, cfg);
    const auto a = affinity(J, u, st.u_half, sigma);
    REQUIRE(a.has_value());
    CHECK(*a <= 1.0 + 1e-6);
    CHECK(*a >= 0.0);
  }
}

TEST_CASE("P3 Dirichlet matches the Fiedler vector") {
  auto p = oracle::path(3);
  const auto J = Functional::graph_dirichlet(p, 2.0);
  const auto fi = oracle::fiedler(*p);
  VertexField u0(3);
  u0 << 1.0, 0.3, -0.2;
  PowerConfig cfg;
  cfg.angle_tol = 1e-12;
  cfg.inner_tol = 1e-12;
  const PowerRun run = run_power(J, u0, cfg);
  CHECK(std::abs(run.result.u.normalized().dot(fi.vector)) >= 0.999);
  CHECK(run.result.lambda == doctest::Approx(4.0 * fi.value).epsilon(1e-6));
  CHECK(run.result.u.norm() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(run.result.mu < 1.0);
}

TEST_CASE("power iterates stay normalized and J decreases") {
  Rng rng(5);
  auto g = oracle::random_connected(15, 0.2, 300);
  for (const auto& J : {Functional::graph_tv(g), Functional::graph_dirichlet(g, 2.0),
                        Functional::graph_dirichlet(g, 1.5), Functional::graph_lipschitz(g, {0})}) {
    PowerConfig cfg;
    cfg.max_iter = 30;
    cfg.inner_tol = 1e-10;
    const VertexField u0 = rng.normal_field(15);
    const PowerRun run = run_power(J, u0, cfg);
    const auto& rs = run.trace.records;
    for (std::size_t k = 0; k + 1 < rs.size(); ++k) {
      CHECK(rs[k + 1].J <= rs[k].J + 10 * cfg.inner_tol * (1.0 + rs[k].J));
      CHECK(rs[k].rayleigh_half <= rs[k].rayleigh + 10 * cfg.inner_tol * (1.0 + rs[k].rayleigh));
      CHECK(rs[k + 1].sigma >= rs[k].sigma * (1 - 1e-9));
    }
    CHECK(run.result.u.norm() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("extinction is reported with the lower bound") {
  const auto J = Functional::graph_tv(oracle::two_node());
  VertexField u(2);
  u << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  // Extinction time of the unit antisymmetric field is 1/(2 sqrt 2) < 0.5.
  try {
    power_step(J, u, 0.5, PowerConfig{});
    FAIL("expected extinction");
  } catch (const ExtinctionError& e) {
    CHECK(e.sigma_dstar_lower() == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))));
  }
}

TEST_CASE("degenerate start is rejected") {
  const auto J = Functional::graph_tv(oracle::path(3));
  CHECK_THROWS_AS(run_power(J, VertexField::Constant(3, 1.0), PowerConfig{}), DegenerateInputError);
  CHECK_THROWS_AS(run_power(J, VertexField::Constant(4, 1.0), PowerConfig{}), DimensionError);
}

TEST_CASE("positivity from nonnegative starts") {
  Rng rng(7);
  auto g = oracle::random_connected(12, 0.25, 301);
  const auto J = Functional::graph_tv(g, {0});
  VertexField u0 = rng.normal_field(12).cwiseAbs();
  u0[0] = 0.0;
  PowerConfig cfg;
  cfg.max_iter = 20;
  const PowerRun run = run_power(J, u0, cfg);
  CHECK(positivity_guard(run.trace));
  PowerTrace mixed;
  mixed.initial_min_entry = -1.0;
  CHECK_FALSE(positivity_guard(mixed));
}

TEST_CASE("certification may fail for l1 data but is not fatal") {
  const auto J = Functional::graph_tv(oracle::two_node());
  VertexField u0(2);
  u0 << 1.0, -1.0;
  PowerConfig cfg;
  cfg.data_p = 1;
  const PowerRun run = run_power(J, u0, cfg);
  CHECK_THROWS_AS(certify(J, run.result, cfg), InputError);
}
