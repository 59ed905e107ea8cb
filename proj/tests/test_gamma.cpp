#include "oracles.hpp"

#include "nleig/errors.hpp"
#include "nleig/gamma.hpp"

#include <doctest.h>

using namespace nleig;

namespace {

FunctionalSpec lipschitz_boundary() {
  FunctionalSpec fs;
  fs.kind = FunctionalKind::GraphLipschitz;
  fs.constraint = "boundary";
  return fs;
}

}  // namespace

TEST_CASE("grid family level shape") {
  FamilySpec spec;
  spec.levels = {4};
  const auto fam = build_family(spec, {lipschitz_boundary()});
  const auto& g = *fam.levels[0].graph;
  CHECK(g.num_vertices() == 16);
  CHECK(g.num_edges() == 24);
  for (const Edge& e : g.edges()) CHECK(e.w == doctest::Approx(16.0));
  CHECK(fam.levels[0].functional.constraint().size() == 12);
}

TEST_CASE("family validation") {
  FamilySpec spec;
  spec.levels = {8, 4};
  CHECK_THROWS_AS(build_family(spec, {lipschitz_boundary()}), InputError);
  spec.levels = {4, 8};
  FunctionalSpec tv;
  tv.kind = FunctionalKind::GraphTV;
  CHECK_THROWS_AS(build_family(spec, {lipschitz_boundary(), tv}), InputError);
  FunctionalSpec bad = tv;
  bad.constraint = "edges";
  CHECK_THROWS_AS(build_family(spec, {bad}), InputError);
}

TEST_CASE("random geometric families") {
  FamilySpec spec;
  spec.kind = FamilySpec::Kind::RandomGeometric;
  spec.levels = {60, 120};
  spec.seed = 3;
  FunctionalSpec tv;
  tv.kind = FunctionalKind::GraphTV;
  const auto a = build_family(spec, {tv});
  const auto b = build_family(spec, {tv});
  for (std::size_t k = 0; k < 2; ++k) {
    REQUIRE(a.levels[k].graph->num_edges() == b.levels[k].graph->num_edges());
    for (Index e = 0; e < a.levels[k].graph->num_edges(); ++e) {
      CHECK(a.levels[k].graph->edge(e).i == b.levels[k].graph->edge(e).i);
      CHECK(a.levels[k].graph->edge(e).j == b.levels[k].graph->edge(e).j);
    }
  }
  spec.eps = 0.01;
  try {
    build_family(spec, {tv});
    FAIL("expected a disconnected level");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("level 0") != std::string::npos);
  }
}

TEST_CASE("epsilon graph against brute force") {
  std::vector<Point> pts{{0.0, 0.0}, {0.05, 0.0}, {0.3, 0.3}, {0.32, 0.31}, {0.9, 0.9}};
  const auto g = epsilon_graph(pts, 0.1);
  CHECK(g.num_edges() == 2);
  for (const Edge& e : g.edges()) CHECK(e.w == doctest::Approx(100.0));
}

TEST_CASE("Dijkstra agrees with the dense oracle") {
  auto g = oracle::random_connected(25, 0.15, 501);
  const VertexField a = dijkstra_distance(*g, {0, 7});
  const VertexField b = oracle::geodesic(*g, {0, 7});
  CHECK((a - b).norm() < 1e-12);
}

TEST_CASE("geodesic ground states per level") {
  FamilySpec spec;
  spec.levels = {6, 10};
  const auto fam = build_family(spec, {lipschitz_boundary()});
  PowerConfig cfg;
  cfg.inner_tol = 1e-10;
  const auto table = ground_state_per_level(fam, cfg);
  REQUIRE(table.rows.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& lv = fam.levels[k];
    VertexField d = oracle::geodesic(*lv.graph, lv.functional.constraint());
    d.normalize();
    const VertexField u = table.rows[k].u.normalized();
    CHECK((u - d).norm() <= 1e-2);
    CHECK(table.rows[k].lambda >= 0.0);
  }
  CHECK(table.rows[0].successor_distance.has_value());
  CHECK_FALSE(table.rows[1].successor_distance.has_value());
}

TEST_CASE("thread count does not change the table") {
  FamilySpec spec;
  spec.levels = {5, 7, 9};
  FunctionalSpec tv;
  tv.kind = FunctionalKind::GraphTV;
  const auto fam = build_family(spec, {tv});
  PowerConfig cfg;
  cfg.max_iter = 15;
  const auto a = ground_state_per_level(fam, cfg, 1, 4);
  const auto b = ground_state_per_level(fam, cfg, 3, 4);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a.rows[k].lambda == b.rows[k].lambda);
    CHECK((a.rows[k].u - b.rows[k].u).norm() == 0.0);
  }
}

TEST_CASE("single level and report preconditions") {
  FamilySpec spec;
  spec.levels = {5};
  const auto table = ground_state_per_level(build_family(spec, {lipschitz_boundary()}), PowerConfig{});
  CHECK(table.rows.size() == 1);
  CHECK_FALSE(table.rows[0].successor_distance.has_value());
  CHECK_THROWS_AS(convergence_report(table), InputError);
}

TEST_CASE("report on constant tables passes trivially") {
  ConvergenceTable t;
  for (int k = 0; k < 3; ++k) {
    TableRow r;
    r.lambda = 2.0;
    r.successor_distance = 0.0;
    t.rows.push_back(r);
  }
  t.rows.back().successor_distance.reset();
  CHECK(convergence_report(t).passed());
}

TEST_CASE("aligned distance ignores sign and scale") {
  VertexField a(3), b(3);
  a << 1.0, 2.0, 3.0;
  b = -5.0 * a;
  CHECK(aligned_distance(a, b) < 1e-15);
}

TEST_CASE("prolongation to a finer grid") {
  FamilySpec spec;
  spec.levels = {2, 4};
  const auto fam = build_family(spec, {lipschitz_boundary()});
  VertexField u(4);
  u << 1.0, 2.0, 3.0, 4.0;
  const VertexField up = prolongate(fam.levels[0], u, fam.levels[1]);
  CHECK(up[0] == 1.0);
  CHECK(up[3] == 2.0);
  CHECK(up[15] == 4.0);
}

TEST_CASE("list constraints map by nearest neighbor") {
  FamilySpec spec;
  spec.levels = {2, 4};
  FunctionalSpec fs;
  fs.kind = FunctionalKind::GraphLipschitz;
  fs.constraint = "list";
  fs.constraint_list = {0};
  const auto fam = build_family(spec, {fs});
  REQUIRE(fam.levels[1].functional.constraint().size() == 1);
  const Index v = fam.levels[1].functional.constraint()[0];
  // Nearest fine cell to the center of the coarse cell (0.25, 0.25).
  CHECK((v == 0 || v == 1 || v == 4 || v == 5));
}
