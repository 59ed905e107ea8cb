#include "nleig/io.hpp"

#include "nleig/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nleig {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok[0] == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ParseError(where + ": cannot parse number '" + tok + "'");
  }
  return v;
}

Index parse_index(const std::string& tok, const std::string& where) {
  Index v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ParseError(where + ": cannot parse index '" + tok + "'");
  }
  return v;
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

template <class T>
T get_field(const json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string(what) + ": missing or invalid field '" + key + "'");
  }
}

FunctionalKind parse_kind(const std::string& s) {
  if (s == "graph_dirichlet") return FunctionalKind::GraphDirichlet;
  if (s == "graph_tv") return FunctionalKind::GraphTV;
  if (s == "grid_tv_central") return FunctionalKind::GridTVCentral;
  if (s == "graph_lipschitz") return FunctionalKind::GraphLipschitz;
  throw ParseError("functional: unknown kind '" + s + "'");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ParseError(std::string(what) + ": unknown field '" + it.key() + "'");
  }
}

FunctionalSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("functional: descriptor must be an object");
  check_keys(j, {"kind", "p", "h", "constraint", "boundary_width"}, "functional");
  FunctionalSpec fs;
  fs.kind = parse_kind(get_field<std::string>(j, "kind", "functional"));
  if (j.contains("p")) {
    if (fs.kind != FunctionalKind::GraphDirichlet) {
      throw ParseError("functional: 'p' applies to graph_dirichlet only");
    }
    fs.p = get_field<double>(j, "p", "functional");
  }
  if (j.contains("h")) fs.h = get_field<double>(j, "h", "functional");
  if (j.contains("boundary_width")) fs.boundary_width = get_field<double>(j, "boundary_width", "functional");
  if (j.contains("constraint")) {
    const json& c = j.at("constraint");
    if (c.is_string()) {
      fs.constraint = c.get<std::string>();
      if (fs.constraint != "none" && fs.constraint != "boundary") {
        throw ParseError("functional: constraint must be a list, \"none\" or \"boundary\"");
      }
    } else if (c.is_array()) {
      fs.constraint = "list";
      for (const auto& v : c) {
        if (!v.is_number_integer()) throw ParseError("functional: constraint entries must be integers");
        fs.constraint_list.push_back(v.get<Index>());
      }
    } else {
      throw ParseError("functional: invalid constraint");
    }
  }
  return fs;
}

}  // namespace

WeightedGraph parse_graph_tsv(std::istream& in) {
  std::vector<Edge> edges;
  std::optional<Index> n;
  Index max_index = -1;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = "graph line " + std::to_string(lineno);
    if (t.rfind("n=", 0) == 0) {
      if (n) throw ParseError(where + ": repeated n= header");
      n = parse_index(trim(t.substr(2)), where);
      if (*n < 0) throw ParseError(where + ": negative vertex count");
      continue;
    }
    std::istringstream ss(t);
    std::string a, b, c, extra;
    if (!(ss >> a >> b >> c) || (ss >> extra)) {
      throw ParseError(where + ": expected 'i<TAB>j<TAB>w'");
    }
    Edge e{parse_index(a, where), parse_index(b, where), parse_number(c, where)};
    if (e.i < 0 || e.j < 0) throw ParseError(where + ": negative vertex index");
    max_index = std::max({max_index, e.i, e.j});
    edges.push_back(e);
  }
  const Index count = n.value_or(max_index + 1);
  if (max_index >= count) throw ParseError("graph: index exceeds the n= header");
  return WeightedGraph(count, std::move(edges));
}

WeightedGraph parse_grid_json(const std::string& text) {
  const json j = parse_json(text, "grid");
  check_keys(j, {"kind", "nx", "ny", "h", "stencil", "weight"}, "grid");
  if (get_field<std::string>(j, "kind", "grid") != "grid2d") throw ParseError("grid: kind must be grid2d");
  if (j.contains("stencil") && get_field<std::string>(j, "stencil", "grid") != "nearest") {
    throw ParseError("grid: only the nearest stencil is supported");
  }
  const Index nx = get_field<Index>(j, "nx", "grid");
  const Index ny = get_field<Index>(j, "ny", "grid");
  const double h = get_field<double>(j, "h", "grid");
  if (!(h > 0.0)) throw InputError("grid: h must be positive");
  const double w = j.contains("weight") ? get_field<double>(j, "weight", "grid") : 1.0 / (h * h);
  return WeightedGraph::grid2d(nx, ny, h, w);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<const WeightedGraph> load_graph(const std::string& path) {
  const std::string text = read_text(path);
  if (trim(text).rfind('{', 0) == 0) return std::make_shared<const WeightedGraph>(parse_grid_json(text));
  std::istringstream in(text);
  return std::make_shared<const WeightedGraph>(parse_graph_tsv(in));
}

VertexField parse_field_csv(std::istream& in) {
  std::vector<double> vals;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    vals.push_back(parse_number(t, "field line " + std::to_string(lineno)));
  }
  return Eigen::Map<VertexField>(vals.data(), static_cast<Index>(vals.size()));
}

VertexField load_field(const std::string& path) {
  std::istringstream in(read_text(path));
  return parse_field_csv(in);
}

void write_field_csv(std::ostream& out, const VertexField& u) {
  for (Index i = 0; i < u.size(); ++i) out << format_double(u[i]) << '\n';
}

void save_field(const std::string& path, const VertexField& u) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_field_csv(out, u);
}

Functional parse_functional(const std::string& text, std::shared_ptr<const WeightedGraph> g) {
  const json j = parse_json(text, "functional");
  const FunctionalSpec fs = spec_from_json(j);
  std::vector<Index> constraint = fs.constraint_list;
  if (fs.constraint == "boundary") {
    const auto& grid = g->grid();
    if (!grid) throw InputError("functional: \"boundary\" constraint needs a grid graph");
    for (Index iy = 0; iy < grid->ny; ++iy) {
      for (Index ix = 0; ix < grid->nx; ++ix) {
        if (ix == 0 || iy == 0 || ix == grid->nx - 1 || iy == grid->ny - 1) {
          constraint.push_back(grid->index(ix, iy));
        }
      }
    }
  }
  switch (fs.kind) {
    case FunctionalKind::GraphDirichlet:
      return Functional::graph_dirichlet(g, fs.p, constraint);
    case FunctionalKind::GraphTV:
      return Functional::graph_tv(g, constraint);
    case FunctionalKind::GridTVCentral: {
      double h = 0.0;
      if (fs.h) {
        h = *fs.h;
      } else if (g->grid()) {
        h = g->grid()->h;
      } else {
        throw InputError("functional: grid_tv_central needs a grid graph");
      }
      return Functional::grid_tv_central(g, h, constraint);
    }
    case FunctionalKind::GraphLipschitz:
      return Functional::graph_lipschitz(g, constraint);
  }
  throw ParseError("functional: unknown kind");
}

Functional load_functional(const std::string& path, std::shared_ptr<const WeightedGraph> g) {
  return parse_functional(read_text(path), std::move(g));
}

std::vector<FunctionalSpec> parse_functional_specs(const std::string& text) {
  const json j = parse_json(text, "functional");
  std::vector<FunctionalSpec> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(spec_from_json(e));
  } else {
    out.push_back(spec_from_json(j));
  }
  return out;
}

FamilySpec parse_family(const std::string& text) {
  const json j = parse_json(text, "family");
  check_keys(j, {"kind", "levels", "eps", "eps_scale", "seed"}, "family");
  FamilySpec fs;
  const std::string kind = get_field<std::string>(j, "kind", "family");
  if (kind == "grid2d") {
    fs.kind = FamilySpec::Kind::Grid2D;
  } else if (kind == "random_geometric") {
    fs.kind = FamilySpec::Kind::RandomGeometric;
  } else {
    throw ParseError("family: unknown kind '" + kind + "'");
  }
  fs.levels = get_field<std::vector<Index>>(j, "levels", "family");
  if (j.contains("eps")) fs.eps = get_field<double>(j, "eps", "family");
  if (j.contains("eps_scale")) fs.eps_scale = get_field<double>(j, "eps_scale", "family");
  if (j.contains("seed")) fs.seed = get_field<std::uint64_t>(j, "seed", "family");
  return fs;
}

}  // namespace nleig
