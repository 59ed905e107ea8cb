#include "nleig/errors.hpp"
#include "nleig/io.hpp"

#include <doctest.h>

#include <sstream>

using namespace nleig;

TEST_CASE("graph TSV") {
  std::istringstream in("# two edges\n0\t1\t1.5\n\n1\t2\t0\n2\t3\t2\n");
  const auto g = parse_graph_tsv(in);
  CHECK(g.num_vertices() == 4);
  CHECK(g.num_edges() == 2);

  std::istringstream hdr("n=6\n0\t1\t1\n");
  CHECK(parse_graph_tsv(hdr).num_vertices() == 6);

  std::istringstream bad("0\t1\n");
  CHECK_THROWS_AS(parse_graph_tsv(bad), ParseError);
  std::istringstream small("n=2\n0\t5\t1\n");
  CHECK_THROWS_AS(parse_graph_tsv(small), ParseError);
  std::istringstream junk("0\t1\tabc\n");
  CHECK_THROWS_AS(parse_graph_tsv(junk), ParseError);
}

TEST_CASE("grid JSON") {
  const auto g = parse_grid_json(R"({"kind":"grid2d","nx":4,"ny":3,"h":0.5,"stencil":"nearest"})");
  CHECK(g.num_vertices() == 12);
  CHECK(g.num_edges() == 17);
  CHECK(g.edge(0).w == doctest::Approx(4.0));
  CHECK(g.grid()->h == 0.5);
  CHECK_THROWS_AS(parse_grid_json(R"({"kind":"grid3d","nx":2,"ny":2,"h":1})"), ParseError);
  CHECK_THROWS_AS(parse_grid_json(R"({"kind":"grid2d","nx":2,"ny":2,"h":1,"stencil":"diag"})"), ParseError);
  CHECK_THROWS_AS(parse_grid_json("{"), ParseError);
}

TEST_CASE("field CSV round trip is exact") {
  VertexField u(4);
  u << 0.1, -1.0 / 3.0, 1e-300, 6.02214076e23;
  std::stringstream ss;
  write_field_csv(ss, u);
  const VertexField v = parse_field_csv(ss);
  REQUIRE(v.size() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(v[i] == u[i]);
  CHECK(format_double(0.1) == "0.1");
  std::istringstream bad("1.0\nfoo\n");
  CHECK_THROWS_AS(parse_field_csv(bad), ParseError);
}

TEST_CASE("functional descriptors") {
  auto g = std::make_shared<const WeightedGraph>(8, std::vector<Edge>{{0, 1, 1}, {1, 2, 1}, {5, 7, 1}});
  CHECK(parse_functional(R"({"kind":"graph_dirichlet","p":2})", g).kind() == FunctionalKind::GraphDirichlet);
  CHECK(parse_functional(R"({"kind":"graph_dirichlet","p":3})", g).alpha() == 3.0);
  CHECK(parse_functional(R"({"kind":"graph_tv"})", g).kind() == FunctionalKind::GraphTV);
  const auto L = parse_functional(R"({"kind":"graph_lipschitz","constraint":[0,5,7]})", g);
  CHECK(L.constraint().size() == 3);
  auto grid = std::make_shared<const WeightedGraph>(WeightedGraph::grid2d(3, 3, 0.01, 1.0));
  CHECK(parse_functional(R"({"kind":"grid_tv_central","h":0.01})", grid).h() == 0.01);
  CHECK(parse_functional(R"({"kind":"graph_lipschitz","constraint":"boundary"})", grid).constraint().size() == 8);
  CHECK_THROWS_AS(parse_functional(R"({"kind":"graph_tv","p":2})", g), ParseError);
  CHECK_THROWS_AS(parse_functional(R"({"kind":"graph_tv","q":2})", g), ParseError);
  CHECK_THROWS_AS(parse_functional(R"({"kind":"nope"})", g), ParseError);
  CHECK_THROWS_AS(parse_functional(R"({"kind":"graph_tv","constraint":"boundary"})", g), InputError);
}

TEST_CASE("family descriptors") {
  const auto f = parse_family(R"({"kind":"grid2d","levels":[8,16,32]})");
  CHECK(f.kind == FamilySpec::Kind::Grid2D);
  CHECK(f.levels.size() == 3);
  const auto r = parse_family(R"({"kind":"random_geometric","levels":[100,200],"eps":0.2,"seed":5})");
  CHECK(r.kind == FamilySpec::Kind::RandomGeometric);
  CHECK(r.eps.value() == 0.2);
  CHECK(r.seed == 5);
  CHECK_THROWS_AS(parse_family(R"({"kind":"mesh","levels":[1]})"), ParseError);
  const auto specs = parse_functional_specs(R"([{"kind":"graph_tv"},{"kind":"graph_tv"}])");
  CHECK(specs.size() == 2);
}
