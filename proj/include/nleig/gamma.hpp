#pragma once

#include "nleig/power.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nleig {

using Point = std::array<double, 2>;

// Graph with all pairs closer than eps joined by weight 1 / eps^2.
WeightedGraph epsilon_graph(const std::vector<Point>& pts, double eps);

// Two interleaved half circles with Gaussian jitter.
std::vector<Point> two_moons(Index n, double noise, std::uint64_t seed);

// Geodesic distance to `sources` with edge lengths 1 / sqrt(w).
VertexField dijkstra_distance(const WeightedGraph& g, const std::vector<Index>& sources);

struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::GraphLipschitz;
  double p = 2.0;          // GraphDirichlet
  std::optional<double> h;  // GridTVCentral; defaults to the level spacing
  // "none", "boundary" or "list" (indices on level 0, mapped to other levels
  // by nearest neighbor).
  std::string constraint = "none";
  std::vector<Index> constraint_list;
  std::optional<double> boundary_width;  // random geometric families; default eps
};

struct FamilySpec {
  enum class Kind { Grid2D, RandomGeometric };
  Kind kind = Kind::Grid2D;
  std::vector<Index> levels;  // N per side (grids) or point counts
  std::optional<double> eps;  // fixed radius; default eps_scale * sqrt(log n / n)
  double eps_scale = 2.0;
  std::uint64_t seed = 0;
};

struct Level {
  Index size = 0;  // N or point count
  std::shared_ptr<const WeightedGraph> graph;
  std::vector<Point> coords;
  Functional functional;
};

struct RefinementFamily {
  FamilySpec spec;
  std::vector<Level> levels;
};

// Several functional specs are accepted only if they agree on the kind; the
// first one is used.
RefinementFamily build_family(const FamilySpec& spec, const std::vector<FunctionalSpec>& fspecs);

// Nearest-neighbor injection of a field on `from` onto the points of `to`.
VertexField prolongate(const Level& from, const VertexField& u, const Level& to);

struct TableRow {
  Index level = 0;
  Index vertices = 0;
  double lambda = 0.0;
  std::optional<double> successor_distance;
  long iterations = 0;
  double runtime_s = 0.0;
  PowerStatus status = PowerStatus::MaxIterations;
  bool flagged = false;  // power run did not converge
  VertexField u;         // ground state on this level
};

struct ConvergenceTable {
  std::vector<TableRow> rows;
};

// Initial field per level: ones off the constraint set for constrained
// kinds, a seeded normal field otherwise. Levels run on up to `threads`
// threads; the result does not depend on the thread count.
ConvergenceTable ground_state_per_level(const RefinementFamily& fam, const PowerConfig& cfg,
                                        unsigned threads = 1, std::uint64_t seed = 0);

// min(||a - b||, ||a + b||) for unit-normalized a, b.
double aligned_distance(const VertexField& a, const VertexField& b);

struct ConvergenceReport {
  std::vector<double> rayleigh_gaps;
  std::vector<double> field_distances;
  bool rayleigh_gaps_decreasing = false;
  bool field_distances_decreasing = false;
  bool passed() const { return rayleigh_gaps_decreasing && field_distances_decreasing; }
};

// Needs at least 3 levels.
ConvergenceReport convergence_report(const ConvergenceTable& table);

}  // namespace nleig
