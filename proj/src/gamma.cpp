#include "nleig/gamma.hpp"

#include "nleig/errors.hpp"
#include "nleig/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <set>
#include <thread>

namespace nleig {

WeightedGraph epsilon_graph(const std::vector<Point>& pts, double eps) {
  if (!(eps > 0.0)) throw InputError("epsilon_graph: eps must be positive");
  const double w = 1.0 / (eps * eps);
  std::vector<Edge> edges;
  const auto n = static_cast<Index>(pts.size());
  // Bucket points into eps-cells so only neighboring cells are compared.
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  for (const Point& p : pts) {
    lo_x = std::min(lo_x, p[0]);
    lo_y = std::min(lo_y, p[1]);
  }
  std::map<std::pair<long, long>, std::vector<Index>> cells;
  auto cell_of = [&](const Point& p) {
    return std::pair<long, long>{static_cast<long>(std::floor((p[0] - lo_x) / eps)),
                                 static_cast<long>(std::floor((p[1] - lo_y) / eps))};
  };
  for (Index i = 0; i < n; ++i) cells[cell_of(pts[static_cast<std::size_t>(i)])].push_back(i);
  for (Index i = 0; i < n; ++i) {
    const Point& a = pts[static_cast<std::size_t>(i)];
    auto [cx, cy] = cell_of(a);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = cells.find({cx + dx, cy + dy});
        if (it == cells.end()) continue;
        for (Index j : it->second) {
          if (j <= i) continue;
          const Point& b = pts[static_cast<std::size_t>(j)];
          if (std::hypot(a[0] - b[0], a[1] - b[1]) < eps) edges.push_back({i, j, w});
        }
      }
    }
  }
  return WeightedGraph(n, std::move(edges));
}

std::vector<Point> two_moons(Index n, double noise, std::uint64_t seed) {
  if (n < 2) throw InputError("two_moons: need at least 2 points");
  Rng rng(seed);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n));
  const Index upper = n / 2;
  for (Index i = 0; i < n; ++i) {
    const double t = std::numbers::pi * rng.uniform();
    Point p = i < upper ? Point{std::cos(t), std::sin(t)} : Point{1.0 - std::cos(t), 0.5 - std::sin(t)};
    p[0] += noise * rng.normal();
    p[1] += noise * rng.normal();
    pts.push_back(p);
  }
  return pts;
}

VertexField dijkstra_distance(const WeightedGraph& g, const std::vector<Index>& sources) {
  const Index n = g.num_vertices();
  VertexField d = VertexField::Constant(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (Index s : sources) {
    if (s < 0 || s >= n) throw InputError("dijkstra: source out of range");
    d[s] = 0.0;
    pq.push({0.0, s});
  }
  while (!pq.empty()) {
    auto [dv, v] = pq.top();
    pq.pop();
    if (dv > d[v]) continue;
    for (const Neighbor& nb : g.neighbors(v)) {
      const double nd = dv + 1.0 / std::sqrt(g.edge(nb.edge).w);
      if (nd < d[nb.vertex]) {
        d[nb.vertex] = nd;
        pq.push({nd, nb.vertex});
      }
    }
  }
  return d;
}

namespace {

Index nearest(const std::vector<Point>& pts, const Point& q) {
  Index best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = std::hypot(pts[i][0] - q[0], pts[i][1] - q[1]);
    if (d < bd) {
      bd = d;
      best = static_cast<Index>(i);
    }
  }
  return best;
}

std::vector<Index> boundary_set(const FamilySpec& spec, const FunctionalSpec& fs, Index size,
                                const std::vector<Point>& coords, double eps) {
  std::vector<Index> out;
  if (spec.kind == FamilySpec::Kind::Grid2D) {
    for (Index iy = 0; iy < size; ++iy) {
      for (Index ix = 0; ix < size; ++ix) {
        if (ix == 0 || iy == 0 || ix == size - 1 || iy == size - 1) out.push_back(iy * size + ix);
      }
    }
    return out;
  }
  const double width = fs.boundary_width.value_or(eps);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const Point& p = coords[i];
    if (std::min({p[0], p[1], 1.0 - p[0], 1.0 - p[1]}) <= width) out.push_back(static_cast<Index>(i));
  }
  return out;
}

}  // namespace

RefinementFamily build_family(const FamilySpec& spec, const std::vector<FunctionalSpec>& fspecs) {
  if (spec.levels.empty()) throw InputError("family: no levels");
  for (std::size_t k = 1; k < spec.levels.size(); ++k) {
    if (spec.levels[k] <= spec.levels[k - 1]) {
      throw InputError("family: levels must be strictly increasing");
    }
  }
  if (fspecs.empty()) throw InputError("family: no functional");
  for (const auto& fs : fspecs) {
    if (fs.kind != fspecs.front().kind) {
      throw InputError("family: all levels must use the same functional kind");
    }
  }
  const FunctionalSpec& fs = fspecs.front();
  if (fs.constraint != "none" && fs.constraint != "boundary" && fs.constraint != "list") {
    throw InputError("family: unknown constraint rule '" + fs.constraint + "'");
  }
  if (fs.kind == FunctionalKind::GridTVCentral && spec.kind != FamilySpec::Kind::Grid2D) {
    throw InputError("family: grid_tv_central needs a grid family");
  }

  RefinementFamily fam;
  fam.spec = spec;
  Rng rng(spec.seed);
  std::vector<Point> level0;
  for (std::size_t k = 0; k < spec.levels.size(); ++k) {
    const Index size = spec.levels[k];
    if (size < 2) throw InputError("family: level sizes must be at least 2");
    std::shared_ptr<const WeightedGraph> g;
    std::vector<Point> coords;
    double eps = 0.0;
    double h = 0.0;
    if (spec.kind == FamilySpec::Kind::Grid2D) {
      h = 1.0 / static_cast<double>(size);
      g = std::make_shared<const WeightedGraph>(WeightedGraph::grid2d(size, size, h, 1.0 / (h * h)));
      for (Index iy = 0; iy < size; ++iy) {
        for (Index ix = 0; ix < size; ++ix) {
          coords.push_back({(static_cast<double>(ix) + 0.5) * h, (static_cast<double>(iy) + 0.5) * h});
        }
      }
    } else {
      const double n = static_cast<double>(size);
      eps = spec.eps.value_or(spec.eps_scale * std::sqrt(std::log(n) / n));
      for (Index i = 0; i < size; ++i) coords.push_back({rng.uniform(), rng.uniform()});
      g = std::make_shared<const WeightedGraph>(epsilon_graph(coords, eps));
    }
    if (connected_components(*g).count != 1) {
      throw InputError("family: level " + std::to_string(k) + " (size " + std::to_string(size) +
                       ") is disconnected");
    }
    if (k == 0) level0 = coords;

    std::vector<Index> constraint;
    if (fs.constraint == "boundary") {
      constraint = boundary_set(spec, fs, size, coords, eps);
    } else if (fs.constraint == "list") {
      std::set<Index> mapped;
      for (Index v : fs.constraint_list) {
        if (v < 0 || v >= static_cast<Index>(level0.size())) {
          throw InputError("family: constraint vertex out of range on level 0");
        }
        mapped.insert(k == 0 ? v : nearest(coords, level0[static_cast<std::size_t>(v)]));
      }
      constraint.assign(mapped.begin(), mapped.end());
    }

    Functional J = [&] {
      switch (fs.kind) {
        case FunctionalKind::GraphDirichlet:
          return Functional::graph_dirichlet(g, fs.p, constraint);
        case FunctionalKind::GraphTV:
          return Functional::graph_tv(g, constraint);
        case FunctionalKind::GridTVCentral:
          return Functional::grid_tv_central(g, fs.h.value_or(h), constraint);
        case FunctionalKind::GraphLipschitz:
          return Functional::graph_lipschitz(g, constraint);
      }
      throw InputError("family: unknown functional kind");
    }();
    fam.levels.push_back(Level{size, g, std::move(coords), std::move(J)});
  }
  return fam;
}

VertexField prolongate(const Level& from, const VertexField& u, const Level& to) {
  check_length(*from.graph, u, "prolongate");
  VertexField out(static_cast<Index>(to.coords.size()));
  const auto& grid = from.graph->grid();
  for (std::size_t i = 0; i < to.coords.size(); ++i) {
    const Point& p = to.coords[i];
    Index src;
    if (grid) {
      const double h = 1.0 / static_cast<double>(grid->nx);
      const Index ix = std::clamp<Index>(static_cast<Index>(std::floor(p[0] / h)), 0, grid->nx - 1);
      const Index iy = std::clamp<Index>(static_cast<Index>(std::floor(p[1] / h)), 0, grid->ny - 1);
      src = grid->index(ix, iy);
    } else {
      src = nearest(from.coords, p);
    }
    out[static_cast<Index>(i)] = u[src];
  }
  return out;
}

ConvergenceTable ground_state_per_level(const RefinementFamily& fam, const PowerConfig& cfg,
                                        unsigned threads, std::uint64_t seed) {
  const std::size_t L = fam.levels.size();
  ConvergenceTable table;
  table.rows.resize(L);
  std::vector<std::exception_ptr> errors(L);

  auto solve = [&](std::size_t k) {
    try {
      const Level& lv = fam.levels[k];
      const Functional& J = lv.functional;
      VertexField u0;
      if (!J.constraint().empty()) {
        u0 = J.restrict_to_feasible(VertexField::Ones(lv.graph->num_vertices()));
      } else {
        Rng rng(seed + k);
        u0 = rng.normal_field(lv.graph->num_vertices());
      }
      const auto t0 = std::chrono::steady_clock::now();
      PowerRun run = run_power(J, u0, cfg);
      TableRow& row = table.rows[k];
      row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.level = static_cast<Index>(k);
      row.vertices = lv.graph->num_vertices();
      row.lambda = run.result.lambda;
      row.iterations = run.result.iterations;
      row.status = run.result.status;
      row.flagged = run.result.status == PowerStatus::MaxIterations;
      row.u = run.result.u;
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(L)));
  if (nt == 1) {
    for (std::size_t k = 0; k < L; ++k) solve(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < L; k = next++) solve(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const Level& finest = fam.levels.back();
  std::vector<VertexField> up(L);
  for (std::size_t k = 0; k < L; ++k) {
    up[k] = prolongate(fam.levels[k], table.rows[k].u, finest);
    up[k] /= up[k].norm();
  }
  for (std::size_t k = 0; k + 1 < L; ++k) {
    table.rows[k].successor_distance = aligned_distance(up[k], up[k + 1]);
  }
  return table;
}

double aligned_distance(const VertexField& a, const VertexField& b) {
  if (a.size() != b.size()) throw DimensionError("aligned_distance: length mismatch");
  const VertexField an = a / a.norm();
  const VertexField bn = b / b.norm();
  return std::min((an - bn).norm(), (an + bn).norm());
}

ConvergenceReport convergence_report(const ConvergenceTable& table) {
  if (table.rows.size() < 3) throw InputError("convergence report needs at least 3 levels");
  ConvergenceReport rep;
  for (std::size_t k = 0; k + 1 < table.rows.size(); ++k) {
    rep.rayleigh_gaps.push_back(std::abs(table.rows[k + 1].lambda - table.rows[k].lambda));
    rep.field_distances.push_back(table.rows[k].successor_distance.value_or(0.0));
  }
  auto decreasing = [](const std::vector<double>& v) {
    const double last = v[v.size() - 1];
    const double prev = v[v.size() - 2];
    return last < prev || (last <= 1e-12 && prev <= 1e-12);
  };
  rep.rayleigh_gaps_decreasing = decreasing(rep.rayleigh_gaps);
  rep.field_distances_decreasing = decreasing(rep.field_distances);
  return rep;
}

}  // namespace nleig
