#include "nleig/errors.hpp"
#include "nleig/flows.hpp"
#include "nleig/gamma.hpp"
#include "nleig/power.hpp"
#include "nleig/prox.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace nleig;

namespace {

// pybind11 holders cannot be pointers to const.
using GraphPtr = std::shared_ptr<WeightedGraph>;

GraphPtr make_graph(Index n, const std::vector<std::tuple<Index, Index, double>>& edges) {
  std::vector<Edge> es;
  es.reserve(edges.size());
  for (const auto& [i, j, w] : edges) es.push_back({i, j, w});
  return std::make_shared<WeightedGraph>(n, std::move(es));
}

NormKind norm_of(const std::string& s) {
  if (s == "l1") return NormKind::L1;
  if (s == "l2") return NormKind::L2;
  if (s == "linf") return NormKind::Linf;
  throw InputError("unknown norm '" + s + "'");
}

std::optional<NormKind> opt_norm(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return norm_of(*s);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Proximal power methods for nonlinear eigenproblems on graphs";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<WeightedGraph, GraphPtr>(m, "Graph")
      .def(py::init([](Index n, const std::vector<std::tuple<Index, Index, double>>& edges) {
             return make_graph(n, edges);
           }),
           py::arg("n"), py::arg("edges"))
      .def_static(
          "grid2d",
          [](Index nx, Index ny, double h, double weight) {
            return std::make_shared<WeightedGraph>(WeightedGraph::grid2d(nx, ny, h, weight));
          },
          py::arg("nx"), py::arg("ny"), py::arg("h"), py::arg("weight"))
      .def_property_readonly("num_vertices", &WeightedGraph::num_vertices)
      .def_property_readonly("num_edges", &WeightedGraph::num_edges)
      .def("edges", [](const WeightedGraph& g) {
        std::vector<std::tuple<Index, Index, double>> out;
        for (const Edge& e : g.edges()) out.emplace_back(e.i, e.j, e.w);
        return out;
      });

  py::class_<Functional>(m, "Functional")
      .def_static(
          "graph_dirichlet",
          [](GraphPtr g, double p, std::vector<Index> c) { return Functional::graph_dirichlet(g, p, c); },
          py::arg("graph"), py::arg("p"), py::arg("constraint") = std::vector<Index>{})
      .def_static(
          "graph_tv", [](GraphPtr g, std::vector<Index> c) { return Functional::graph_tv(g, c); },
          py::arg("graph"), py::arg("constraint") = std::vector<Index>{})
      .def_static(
          "grid_tv_central",
          [](GraphPtr g, double h, std::vector<Index> c) { return Functional::grid_tv_central(g, h, c); },
          py::arg("graph"), py::arg("h"), py::arg("constraint") = std::vector<Index>{})
      .def_static(
          "graph_lipschitz",
          [](GraphPtr g, std::vector<Index> c) { return Functional::graph_lipschitz(g, c); },
          py::arg("graph"), py::arg("constraint") = std::vector<Index>{})
      .def_property_readonly("kind", [](const Functional& J) { return to_string(J.kind()); })
      .def_property_readonly("alpha", &Functional::alpha)
      .def("__call__", &Functional::evaluate, py::arg("u"))
      .def("subgradient", &Functional::subgradient, py::arg("u"))
      .def("nullspace_project", &Functional::nullspace_project, py::arg("u"));

  m.def(
      "rayleigh", [](const Functional& J, const VertexField& u) { return rayleigh(J, u); },
      py::arg("J"), py::arg("u"));

  m.def(
      "prox",
      [](const Functional& J, const VertexField& f, double sigma, int data_p,
         std::optional<std::string> data_norm, double tol, long max_iter) {
        ProxProblem pb{.f = f,
                       .sigma = sigma,
                       .functional = J,
                       .data_p = data_p,
                       .data_norm = opt_norm(data_norm),
                       .tol = tol,
                       .max_iter = max_iter};
        ProxSolution s = solve_prox(pb);
        py::dict d;
        d["u"] = s.u;
        d["gap"] = s.gap;
        d["iterations"] = s.iterations;
        d["converged"] = s.converged;
        d["hit_exact_reconstruction"] = s.hit_exact_reconstruction;
        d["hit_extinction"] = s.hit_extinction;
        return d;
      },
      py::arg("J"), py::arg("f"), py::arg("sigma"), py::arg("data_p") = 2,
      py::arg("data_norm") = py::none(), py::arg("tol") = 1e-8, py::arg("max_iter") = 50000);

  m.def(
      "power",
      [](const Functional& J, const VertexField& u0, const std::string& rule, double c, int data_p,
         long max_iter, double angle_tol, double inner_tol) {
        PowerConfig cfg;
        cfg.rule = rule == "constant" ? ParameterRule::Constant : ParameterRule::Variable;
        if (rule != "constant" && rule != "variable") throw InputError("unknown rule '" + rule + "'");
        cfg.c = c;
        cfg.data_p = data_p;
        cfg.max_iter = max_iter;
        cfg.angle_tol = angle_tol;
        cfg.inner_tol = inner_tol;
        PowerRun run = run_power(J, u0, cfg);
        py::dict d;
        d["u"] = run.result.u;
        d["lambda"] = run.result.lambda;
        d["iterations"] = run.result.iterations;
        d["status"] = to_string(run.result.status);
        std::vector<double> rq;
        for (const auto& r : run.trace.records) rq.push_back(r.rayleigh_half);
        d["rayleigh_half"] = rq;
        return d;
      },
      py::arg("J"), py::arg("u0"), py::arg("rule") = "variable", py::arg("c") = 0.5,
      py::arg("data_p") = 2, py::arg("max_iter") = 1000, py::arg("angle_tol") = 1e-6,
      py::arg("inner_tol") = 1e-8);

  m.def(
      "flow",
      [](const Functional& J, const VertexField& f, const std::string& kind, double dt, long steps) {
        FlowConfig cfg;
        cfg.kind = parse_flow_kind(kind);
        cfg.dt = dt;
        cfg.steps = steps;
        FlowTrace tr = run_flow(J, f, cfg);
        py::dict d;
        d["final_state"] = tr.final_state;
        d["dt"] = tr.dt;
        d["extinct"] = tr.extinct;
        std::vector<double> rq;
        for (const auto& r : tr.records) rq.push_back(r.rayleigh);
        d["rayleigh"] = rq;
        return d;
      },
      py::arg("J"), py::arg("f"), py::arg("kind") = "minmove", py::arg("dt") = 0.0,
      py::arg("steps") = 1000);

  m.def("dijkstra_distance", &dijkstra_distance, py::arg("graph"), py::arg("sources"));
}
