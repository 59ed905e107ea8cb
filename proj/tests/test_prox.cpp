#include "oracles.hpp"

#include "nleig/errors.hpp"
#include "nleig/prox.hpp"
#include "nleig/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace nleig;

namespace {

ProxProblem problem(const Functional& J, const VertexField& f, double sigma, int data_p = 2,
                    std::optional<NormKind> norm = std::nullopt, double tol = 1e-10) {
  return ProxProblem{.f = f,
                     .sigma = sigma,
                     .functional = J,
                     .data_p = data_p,
                     .data_norm = norm,
                     .tol = tol,
                     .max_iter = 200000};
}

VertexField two(double a, double b) {
  VertexField v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("two-node TV prox against the shrinkage oracle") {
  const auto J = Functional::graph_tv(oracle::two_node());
  const VertexField f = two(1.0, -1.0);
  for (double sigma : {0.01, 0.125, 0.25, 0.4, 0.5, 0.6}) {
    const ProxSolution s = solve_prox(problem(J, f, sigma));
    CHECK((s.u - oracle::two_node_tv_prox(f, sigma)).norm() < 1e-8);
    CHECK(s.converged);
  }
  CHECK(solve_prox(problem(J, f, 0.5)).hit_extinction);
  // Off-center data keeps its mean.
  const VertexField g = two(3.0, 0.5);
  CHECK((solve_prox(problem(J, g, 0.3)).u - oracle::two_node_tv_prox(g, 0.3)).norm() < 1e-8);
}

TEST_CASE("objective is a literal evaluation") {
  const auto J = Functional::graph_tv(oracle::two_node());
  const VertexField f = two(1.0, -1.0);
  auto pb = problem(J, f, 0.25);
  CHECK(objective(pb, two(0.75, -0.75)) == doctest::Approx(0.8125).epsilon(1e-12));
  CHECK(objective(pb, f) == doctest::Approx(0.25 * 4.0));
  CHECK(objective(pb, two(0.0, 0.0)) == doctest::Approx(1.0));
  CHECK(objective(pb, two(0.5, -0.5)) == doctest::Approx(0.75));
}

TEST_CASE("prox of Dirichlet(2) is the resolvent") {
  auto g = oracle::random_connected(12, 0.3, 77);
  const auto J = Functional::graph_dirichlet(g, 2.0);
  Rng rng(12);
  const VertexField f = rng.normal_field(12);
  const double sigma = 0.3;
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(12, 12) + 4.0 * sigma * oracle::dense_laplacian(*g);
  const VertexField expect = A.ldlt().solve(f);
  CHECK((solve_prox(problem(J, f, sigma)).u - expect).norm() < 1e-8);
}

TEST_CASE("tiny sigma returns the data") {
  Rng rng(13);
  auto g = oracle::random_connected(10, 0.3, 78);
  const VertexField f = rng.normal_field(10);
  for (const auto& J : {Functional::graph_dirichlet(g, 2.0), Functional::graph_dirichlet(g, 3.0),
                        Functional::graph_tv(g)}) {
    CHECK((solve_prox(problem(J, f, 1e-9)).u - f).norm() < 1e-6);
  }
}

TEST_CASE("minimizers are fixed points") {
  auto g = oracle::random_connected(10, 0.3, 79);
  const VertexField c = VertexField::Constant(10, 2.5);
  for (const auto& J : {Functional::graph_dirichlet(g, 2.0), Functional::graph_dirichlet(g, 1.5),
                        Functional::graph_tv(g), Functional::graph_lipschitz(g)}) {
    CHECK((solve_prox(problem(J, c, 0.7)).u - c).norm() == 0.0);
    CHECK((solve_prox(problem(J, c, 0.7, 1)).u - c).norm() == 0.0);
  }
  const auto L = Functional::graph_lipschitz(g, {1, 2});
  CHECK(solve_prox(problem(L, VertexField::Zero(10), 0.7)).u.norm() == 0.0);
}

TEST_CASE("prox properties on random instances") {
  Rng rng(14);
  auto g = oracle::random_connected(8, 0.35, 80);
  auto grid = std::make_shared<const WeightedGraph>(WeightedGraph::grid2d(3, 3, 1.0 / 3.0, 9.0));
  const double tol = 1e-10;
  std::vector<Functional> kinds{Functional::graph_dirichlet(g, 2.0), Functional::graph_dirichlet(g, 1.5),
                                Functional::graph_dirichlet(g, 3.0), Functional::graph_tv(g),
                                Functional::graph_lipschitz(g),      Functional::graph_lipschitz(g, {0, 3}),
                                Functional::grid_tv_central(grid, 1.0 / 3.0)};
  for (const auto& J : kinds) {
    CAPTURE(to_string(J.kind()));
    for (int t = 0; t < 3; ++t) {
      const VertexField f1 = J.restrict_to_feasible(rng.normal_field(J.size()));
      const VertexField f2 = J.restrict_to_feasible(rng.normal_field(J.size()));
      const double sigma = rng.uniform(0.02, 0.3);
      const auto pb = problem(J, f1, sigma, 2, std::nullopt, tol);
      const ProxSolution s1 = solve_prox(pb);
      const ProxSolution s2 = solve_prox(problem(J, f2, sigma, 2, std::nullopt, tol));
      CHECK(s1.converged);
      // Energy decrease and objective no worse than at f.
      CHECK(J.value(s1.u) <= J.value(f1) + tol);
      CHECK(objective(pb, s1.u) <= objective(pb, f1) + tol);
      // Nonexpansive.
      CHECK((s1.u - s2.u).norm() <= (f1 - f2).norm() + 10 * tol);
      // zeta = (f - u) / sigma is a subgradient at u.
      const VertexField z = (f1 - s1.u) / sigma;
      for (int k = 0; k < 30; ++k) {
        const VertexField v = J.restrict_to_feasible(rng.normal_field(J.size()));
        CHECK(J.value(v) >= J.value(s1.u) + z.dot(v - s1.u) - 1e-5);
      }
    }
  }
}

TEST_CASE("l1 data term is solved") {
  Rng rng(15);
  auto g = oracle::random_connected(8, 0.35, 81);
  const auto J = Functional::graph_tv(g);
  const VertexField f = rng.normal_field(8);
  for (NormKind nk : {NormKind::L1, NormKind::L2}) {
    const auto pb = problem(J, f, 0.05, 1, nk, 1e-9);
    const ProxSolution s = solve_prox(pb);
    CHECK(s.converged);
    // No random perturbation does better.
    for (int k = 0; k < 200; ++k) {
      const VertexField v = s.u + 1e-3 * rng.normal_field(8);
      CHECK(objective(pb, s.u) <= objective(pb, v) + 1e-7);
    }
  }
}

TEST_CASE("exact reconstruction on two nodes with the l2 data norm") {
  const auto J = Functional::graph_tv(oracle::two_node());
  const VertexField f = two(1.0, -1.0);
  const double star = 1.0 / (2.0 * std::sqrt(2.0));
  CHECK(exact_reconstruction_bound(J, f, NormKind::L2) == doctest::Approx(std::sqrt(2.0) / 4.0));
  CHECK(exact_reconstruction_time(J, f, NormKind::L2).value() == doctest::Approx(star));
  const auto below = solve_prox(problem(J, f, 0.9 * star, 1, NormKind::L2));
  CHECK((below.u - f).norm() < 1e-6);
  CHECK(below.hit_exact_reconstruction);
  const auto above = solve_prox(problem(J, f, 1.1 * std::sqrt(2.0) / 4.0, 1, NormKind::L2));
  CHECK((above.u - f).norm() > 1e-3);
}

TEST_CASE("exact reconstruction with the l1 data norm") {
  // With the l1 data norm the threshold is 1 / ||zeta||_inf = 1/2.
  const auto J = Functional::graph_tv(oracle::two_node());
  const VertexField f = two(1.0, -1.0);
  CHECK(exact_reconstruction_time(J, f, NormKind::L1).value() == doctest::Approx(0.5));
  CHECK((solve_prox(problem(J, f, 0.45, 1, NormKind::L1)).u - f).norm() < 1e-6);
  CHECK((solve_prox(problem(J, f, 0.55, 1, NormKind::L1)).u - f).norm() > 1e-3);
}

TEST_CASE("extinction bounds") {
  const auto J = Functional::graph_tv(oracle::two_node());
  const VertexField f = two(1.0, -1.0);
  CHECK(extinction_bounds(J, f, 2, NormKind::L2).lower == doctest::Approx(0.5));
  // Still alive just below, extinct at the bound.
  const auto s4 = solve_prox(problem(J, f, 0.4));
  CHECK((s4.u - J.nullspace_project(s4.u)).norm() > 0.1);
  CHECK(solve_prox(problem(J, f, 0.5)).u.norm() < 1e-8);
  CHECK_THROWS_AS(extinction_bounds(J, VertexField::Constant(2, 1.0), 2, NormKind::L2), DegenerateInputError);
  CHECK_THROWS_AS(extinction_bounds(J, f, 2, NormKind::L2, 0.0), InputError);
}

TEST_CASE("extinction lower bound stays below the upper bound") {
  Rng rng(16);
  for (int t = 0; t < 20; ++t) {
    auto g = oracle::random_connected(6, 0.4, 200 + t);
    const auto J = Functional::graph_dirichlet(g, 2.0);
    const double lambda1 = 4.0 * oracle::fiedler(*g).value;
    const VertexField f = rng.normal_field(6);
    const auto b = extinction_bounds(J, f, 2, NormKind::L2, lambda1);
    CHECK(b.lower <= b.upper.value() * (1 + 1e-12));
  }
}

TEST_CASE("invalid problems are rejected") {
  const auto J = Functional::graph_tv(oracle::two_node());
  CHECK_THROWS_AS(solve_prox(problem(J, two(1, 0), 0.0)), InputError);
  CHECK_THROWS_AS(solve_prox(problem(J, two(1, 0), 0.1, 3)), InputError);
  CHECK_THROWS_AS(solve_prox(problem(J, VertexField::Zero(3), 0.1)), DimensionError);
  auto pb = problem(J, two(1, 0), 0.1);
  pb.tol = 0.0;
  CHECK_THROWS_AS(solve_prox(pb), InputError);
}

TEST_CASE("infeasible data is projected first") {
  const auto L = Functional::graph_lipschitz(oracle::path(3), {0});
  VertexField f(3);
  f << 5.0, 1.0, 2.0;
  const auto s = solve_prox(problem(L, f, 0.1));
  CHECK(s.u[0] == 0.0);
  CHECK(L.feasible(s.u));
}
