#pragma once

#include "nleig/gamma.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace nleig {

// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

// Edge list: `i<TAB>j<TAB>w`, 0-based. `#` starts a comment line. An optional
// `n=<count>` line fixes the vertex count; otherwise it is 1 + max index.
WeightedGraph parse_graph_tsv(std::istream& in);

// {"kind":"grid2d","nx":N,"ny":M,"h":h,"stencil":"nearest"}; optional
// "weight" (default 1 / h^2).
WeightedGraph parse_grid_json(const std::string& text);

// Dispatches on content: a leading '{' means a grid spec, otherwise TSV.
std::shared_ptr<const WeightedGraph> load_graph(const std::string& path);

VertexField parse_field_csv(std::istream& in);
VertexField load_field(const std::string& path);
void write_field_csv(std::ostream& out, const VertexField& u);
void save_field(const std::string& path, const VertexField& u);

// One descriptor object, e.g. {"kind":"graph_lipschitz","constraint":[0,5]}.
// "constraint" may also be "boundary" on grid graphs.
Functional parse_functional(const std::string& text, std::shared_ptr<const WeightedGraph> g);
Functional load_functional(const std::string& path, std::shared_ptr<const WeightedGraph> g);

// Descriptor (or array of descriptors) for a refinement family.
std::vector<FunctionalSpec> parse_functional_specs(const std::string& text);

// {"kind":"grid2d","levels":[8,16,32]} or
// {"kind":"random_geometric","levels":[...],"eps":e,"eps_scale":s,"seed":k}
FamilySpec parse_family(const std::string& text);

std::string read_text(const std::string& path);

}  // namespace nleig
