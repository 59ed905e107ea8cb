#include "cli.hpp"

#include "nleig/errors.hpp"
#include "nleig/flows.hpp"
#include "nleig/gamma.hpp"
#include "nleig/io.hpp"
#include "nleig/power.hpp"
#include "nleig/prox.hpp"
#include "nleig/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace nleig::cli {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "nonlin-eig 0.1.0";

// Thrown after outputs are written when the run itself counts as a failure.
struct RunFailure {
  json diagnostic;
};

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

struct Manifest {
  json inputs = json::array();
  json outputs = json::array();
  json config = json::object();

  void input(const std::string& path) {
    inputs.push_back({{"path", path}, {"sha256", sha256_file(path)}});
  }
  void output(const std::string& path) { outputs.push_back(path); }
};

NormKind parse_norm(const std::string& s) {
  if (s == "l1") return NormKind::L1;
  if (s == "l2") return NormKind::L2;
  if (s == "linf") return NormKind::Linf;
  throw InputError("unknown norm '" + s + "'");
}

std::string norm_name(NormKind k) {
  switch (k) {
    case NormKind::L1:
      return "l1";
    case NormKind::L2:
      return "l2";
    case NormKind::Linf:
      return "linf";
  }
  return "?";
}

std::optional<NormKind> opt_norm(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_norm(s);
}

// "random" or "random:<seed>" gives a mean-zero unit-norm normal field.
VertexField load_init(const std::string& spec, Index n, std::uint64_t seed, Manifest& m) {
  if (spec.rfind("random", 0) == 0) {
    if (spec.size() > 6) {
      if (spec[6] != ':') throw InputError("init: expected random:<seed>");
      try {
        std::size_t pos = 0;
        seed = std::stoull(spec.substr(7), &pos);
        if (pos != spec.size() - 7) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw InputError("init: bad seed in '" + spec + "'");
      }
    }
    Rng rng(seed);
    VertexField u = rng.normal_field(n);
    u.array() -= u.mean();
    return u / u.norm();
  }
  m.input(spec);
  return load_field(spec);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_jsonl(const std::string& path, const std::vector<json>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  for (const auto& r : rows) out << r.dump() << '\n';
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

// ---- prox ----

struct ProxOpts {
  std::string graph, functional, input, out, cert, data_norm;
  double sigma = 0.0;
  int data_p = 2;
  double tol = 1e-8;
  long max_iter = 50000;
};

json run_prox(const ProxOpts& o, std::uint64_t seed, Manifest& m, std::ostream& out) {
  m.input(o.graph);
  m.input(o.functional);
  m.input(o.input);
  auto g = load_graph(o.graph);
  const Functional J = load_functional(o.functional, g);
  const VertexField f = load_field(o.input);
  ProxProblem pb{.f = f,
                 .sigma = o.sigma,
                 .functional = J,
                 .data_p = o.data_p,
                 .data_norm = opt_norm(o.data_norm),
                 .tol = o.tol,
                 .max_iter = o.max_iter};
  m.config = {{"sigma", o.sigma},         {"data_p", o.data_p}, {"data_norm", norm_name(data_norm(pb))},
              {"tol", o.tol},             {"max_iter", o.max_iter}, {"out", o.out},
              {"cert", o.cert}};
  const ProxSolution s = solve_prox(pb);
  save_field(o.out, s.u);
  m.output(o.out);

  ProxProblem fe = pb;
  fe.f = J.restrict_to_feasible(f);
  json cert = {{"gap", s.gap},
               {"iterations", s.iterations},
               {"converged", s.converged},
               {"objective", objective(fe, s.u)},
               {"objective_at_f", objective(fe, fe.f)},
               {"hit_exact_reconstruction", s.hit_exact_reconstruction},
               {"hit_extinction", s.hit_extinction}};
  if (o.data_p == 2) {
    // zeta = (f - u) / sigma should be a subgradient of J at u.
    const VertexField zeta = (fe.f - s.u) / o.sigma;
    const double ju = J.value(s.u);
    Rng rng(seed);
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 100; ++k) {
      const VertexField v = J.restrict_to_feasible(rng.normal_field(f.size()));
      worst = std::max(worst, ju + zeta.dot(v - s.u) - J.value(v));
    }
    cert["subgradient_violation"] = worst;
  }
  if (!o.cert.empty()) {
    write_json(o.cert, cert);
    m.output(o.cert);
  }
  out << cert.dump() << '\n';

  if (s.hit_extinction) {
    const double lower = extinction_bounds(J, fe.f, o.data_p, data_norm(pb)).lower;
    throw RunFailure{{{"error", "extinction"},
                      {"message", "prox landed in the nullspace; sigma is at or above the extinction time"},
                      {"sigma", o.sigma},
                      {"sigma_dstar_lower", lower}}};
  }
  if (!s.converged) {
    throw RunFailure{{{"error", "not_converged"},
                      {"message", "prox solver hit max_iter"},
                      {"gap", s.gap},
                      {"iterations", s.iterations}}};
  }
  return cert;
}

// ---- power ----

struct PowerOpts {
  std::string graph, functional, init = "random", rule = "variable", trace = "trace.jsonl",
                                  out = "eigvec.csv", cert, data_norm;
  double c = 0.5;
  int data_p = 2;
  long max_iter = 1000;
  double angle_tol = 1e-6, affinity_tol = 1e-4, inner_tol = 1e-8;
  long inner_max_iter = 50000;
};

PowerConfig power_config(const PowerOpts& o) {
  PowerConfig cfg;
  cfg.data_p = o.data_p;
  cfg.data_norm = opt_norm(o.data_norm);
  if (o.rule == "variable") {
    cfg.rule = ParameterRule::Variable;
  } else if (o.rule == "constant") {
    cfg.rule = ParameterRule::Constant;
  } else {
    throw InputError("unknown rule '" + o.rule + "'");
  }
  cfg.c = o.c;
  cfg.max_iter = o.max_iter;
  cfg.angle_tol = o.angle_tol;
  cfg.affinity_tol = o.affinity_tol;
  cfg.inner_tol = o.inner_tol;
  cfg.inner_max_iter = o.inner_max_iter;
  validate(cfg);
  return cfg;
}

json power_config_json(const PowerConfig& cfg) {
  return {{"data_p", cfg.data_p},
          {"data_norm", cfg.data_norm ? json(norm_name(*cfg.data_norm)) : json(nullptr)},
          {"normalization", norm_name(cfg.normalization)},
          {"rule", to_string(cfg.rule)},
          {"c", cfg.c},
          {"max_iter", cfg.max_iter},
          {"angle_tol", cfg.angle_tol},
          {"affinity_tol", cfg.affinity_tol},
          {"rq_stall_tol", cfg.rq_stall_tol},
          {"stall_window", cfg.stall_window},
          {"ext_eps", cfg.ext_eps},
          {"inner_tol", cfg.inner_tol},
          {"inner_max_iter", cfg.inner_max_iter}};
}

json run_power_cmd(const PowerOpts& o, std::uint64_t seed, Manifest& m, std::ostream& out) {
  m.input(o.graph);
  m.input(o.functional);
  auto g = load_graph(o.graph);
  const Functional J = load_functional(o.functional, g);
  const PowerConfig cfg = power_config(o);
  const VertexField u0 = load_init(o.init, g->num_vertices(), seed, m);
  m.config = power_config_json(cfg);
  m.config["init"] = o.init;
  m.config["trace"] = o.trace;
  m.config["out"] = o.out;
  m.config["cert"] = o.cert;

  const PowerRun run = run_power(J, u0, cfg);
  save_field(o.out, run.result.u);
  m.output(o.out);
  std::vector<json> rows;
  for (const auto& r : run.trace.records) {
    rows.push_back({{"k", r.k},
                    {"sigma", r.sigma},
                    {"J", r.J},
                    {"rayleigh", r.rayleigh},
                    {"rayleigh_half", r.rayleigh_half},
                    {"angle", r.angle},
                    {"cos", opt_json(r.cos)},
                    {"affinity", opt_json(r.affinity)},
                    {"mu", r.mu},
                    {"min_entry", r.min_entry},
                    {"inner_iterations", r.inner_iterations},
                    {"inner_gap", r.inner_gap}});
  }
  write_jsonl(o.trace, rows);
  m.output(o.trace);

  json summary = {{"lambda", run.result.lambda},
                  {"status", to_string(run.result.status)},
                  {"iterations", run.result.iterations},
                  {"mu", run.result.mu},
                  {"sigma", run.result.sigma}};
  if (!o.cert.empty()) {
    const CertifyReport rep = certify(J, run.result, cfg);
    json c = {{"lambda", rep.lambda},
              {"mu", rep.mu},
              {"residual", rep.residual},
              {"subgradient_violation", rep.subgradient_violation},
              {"certified", rep.certified}};
    write_json(o.cert, c);
    m.output(o.cert);
    summary["certificate"] = c;
  }
  out << summary.dump() << '\n';
  if (run.result.status == PowerStatus::MaxIterations) {
    throw RunFailure{{{"error", "not_converged"},
                      {"message", "power method hit max_iter"},
                      {"iterations", run.result.iterations},
                      {"lambda", run.result.lambda}}};
  }
  return summary;
}

// ---- flow ----

struct FlowOpts {
  std::string kind = "minmove", graph, functional, init = "random", trace = "trace.jsonl", out,
              data_norm;
  double dt = 0.0;
  long steps = 1000;
  int data_p = 2;
  double inner_tol = 1e-10;
  double blowup = 10.0;
};

json run_flow_cmd(const FlowOpts& o, std::uint64_t seed, Manifest& m, std::ostream& out) {
  m.input(o.graph);
  m.input(o.functional);
  auto g = load_graph(o.graph);
  const Functional J = load_functional(o.functional, g);
  FlowConfig cfg;
  cfg.kind = parse_flow_kind(o.kind);
  cfg.dt = o.dt;
  cfg.steps = o.steps;
  cfg.data_p = o.data_p;
  cfg.data_norm = opt_norm(o.data_norm);
  cfg.inner_tol = o.inner_tol;
  cfg.blowup = o.blowup;
  const VertexField f = load_init(o.init, g->num_vertices(), seed, m);

  const FlowTrace tr = run_flow(J, f, cfg);
  m.config = {{"kind", to_string(cfg.kind)}, {"dt", tr.dt},          {"steps", cfg.steps},
              {"data_p", cfg.data_p},        {"inner_tol", cfg.inner_tol}, {"blowup", cfg.blowup},
              {"init", o.init},              {"trace", o.trace},    {"out", o.out},
              {"data_norm", cfg.data_norm ? json(norm_name(*cfg.data_norm)) : json(nullptr)}};
  std::vector<json> rows;
  for (const auto& r : tr.records) {
    rows.push_back({{"t", r.t},
                    {"J", r.J},
                    {"norm", r.norm},
                    {"rayleigh", r.rayleigh},
                    {"quotient", opt_json(r.quotient)},
                    {"phi", opt_json(r.phi)},
                    {"rhs_norm", opt_json(r.rhs_norm)}});
  }
  write_jsonl(o.trace, rows);
  m.output(o.trace);
  if (!o.out.empty()) {
    save_field(o.out, tr.final_state);
    m.output(o.out);
  }
  json summary = {{"kind", to_string(cfg.kind)},
                  {"dt", tr.dt},
                  {"steps", static_cast<long>(tr.records.size()) - 1},
                  {"extinct", tr.extinct},
                  {"final_rayleigh", tr.records.back().rayleigh}};
  out << summary.dump() << '\n';
  return summary;
}

// ---- gamma ----

struct GammaOpts {
  std::string family, functional, out = "table.csv", rule = "variable";
  double c = 0.5;
  long max_iter = 200;
  double angle_tol = 1e-6, inner_tol = 1e-10;
};

json run_gamma_cmd(const GammaOpts& o, unsigned threads, std::uint64_t seed, Manifest& m,
                   std::ostream& out) {
  m.input(o.family);
  m.input(o.functional);
  const FamilySpec fs = parse_family(read_text(o.family));
  const auto fspecs = parse_functional_specs(read_text(o.functional));
  PowerOpts po;
  po.rule = o.rule;
  po.c = o.c;
  po.max_iter = o.max_iter;
  po.angle_tol = o.angle_tol;
  po.inner_tol = o.inner_tol;
  const PowerConfig cfg = power_config(po);
  m.config = power_config_json(cfg);
  m.config["out"] = o.out;

  const RefinementFamily fam = build_family(fs, fspecs);
  const ConvergenceTable table = ground_state_per_level(fam, cfg, threads, seed);
  {
    std::ofstream csv(o.out);
    if (!csv) throw InputError("cannot write '" + o.out + "'");
    csv << "level,vertices,lambda,successor_distance,iterations,runtime_s,status,flagged\n";
    for (const auto& r : table.rows) {
      csv << r.level << ',' << r.vertices << ',' << format_double(r.lambda) << ','
          << (r.successor_distance ? format_double(*r.successor_distance) : "") << ',' << r.iterations
          << ',' << format_double(r.runtime_s) << ',' << to_string(r.status) << ','
          << (r.flagged ? "true" : "false") << '\n';
    }
  }
  m.output(o.out);
  json summary = {{"levels", table.rows.size()}};
  if (table.rows.size() >= 3) {
    const ConvergenceReport rep = convergence_report(table);
    summary["rayleigh_gaps"] = rep.rayleigh_gaps;
    summary["field_distances"] = rep.field_distances;
    summary["rayleigh_gaps_decreasing"] = rep.rayleigh_gaps_decreasing;
    summary["field_distances_decreasing"] = rep.field_distances_decreasing;
    summary["passed"] = rep.passed();
  }
  out << summary.dump() << '\n';
  return summary;
}

// ---- bounds ----

struct BoundsOpts {
  std::string graph, functional, input, data_norm = "l2";
  int data_p = 2;
  std::optional<double> lambda1;
};

json run_bounds_cmd(const BoundsOpts& o, Manifest& m, std::ostream& out) {
  m.input(o.graph);
  m.input(o.functional);
  m.input(o.input);
  auto g = load_graph(o.graph);
  const Functional J = load_functional(o.functional, g);
  const VertexField f = load_field(o.input);
  check_length(*g, f, "bounds");
  const NormKind nk = parse_norm(o.data_norm);
  if (o.data_p != 1 && o.data_p != 2) throw InputError("bounds: data_p must be 1 or 2");
  m.config = {{"data_p", o.data_p}, {"data_norm", o.data_norm}, {"lambda1", opt_json(o.lambda1)}};

  json res;
  res["sigma_star_upper"] = exact_reconstruction_bound(J, f, nk);
  if (auto t = exact_reconstruction_time(J, f, nk)) res["sigma_star_exact"] = *t;
  const ExtinctionBounds eb = extinction_bounds(J, f, o.data_p, nk, o.lambda1);
  res["sigma_dstar_lower"] = eb.lower;
  if (eb.upper) res["sigma_dstar_upper"] = *eb.upper;
  out << res.dump() << '\n';
  return res;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlinear eigenvectors of homogeneous functionals on graphs", "nonlin-eig"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string manifest_path;
  app.add_option("--threads", threads, "Worker threads (gamma levels)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Seed for random initializations");
  app.add_option("--manifest", manifest_path, "Write a run manifest here");

  ProxOpts px;
  auto* prox = app.add_subcommand("prox", "Solve one proximal problem");
  prox->add_option("--graph", px.graph)->required();
  prox->add_option("--functional", px.functional)->required();
  prox->add_option("--input", px.input)->required();
  prox->add_option("--sigma", px.sigma)->required()->check(CLI::PositiveNumber);
  prox->add_option("--data-p", px.data_p)->check(CLI::IsMember({1, 2}));
  prox->add_option("--data-norm", px.data_norm)->check(CLI::IsMember({"l1", "l2"}));
  prox->add_option("--tol", px.tol)->check(CLI::PositiveNumber);
  prox->add_option("--max-iter", px.max_iter)->check(CLI::PositiveNumber);
  prox->add_option("--out", px.out)->required();
  prox->add_option("--cert", px.cert);

  PowerOpts pw;
  auto* power = app.add_subcommand("power", "Proximal power method");
  power->add_option("--graph", pw.graph)->required();
  power->add_option("--functional", pw.functional)->required();
  power->add_option("--init", pw.init, "CSV file or random[:seed]");
  power->add_option("--rule", pw.rule)->check(CLI::IsMember({"variable", "constant"}));
  power->add_option("--c", pw.c);
  power->add_option("--data-p", pw.data_p)->check(CLI::IsMember({1, 2}));
  power->add_option("--data-norm", pw.data_norm)->check(CLI::IsMember({"l1", "l2"}));
  power->add_option("--max-iter", pw.max_iter)->check(CLI::PositiveNumber);
  power->add_option("--angle-tol", pw.angle_tol)->check(CLI::PositiveNumber);
  power->add_option("--affinity-tol", pw.affinity_tol)->check(CLI::PositiveNumber);
  power->add_option("--inner-tol", pw.inner_tol)->check(CLI::PositiveNumber);
  power->add_option("--inner-max-iter", pw.inner_max_iter)->check(CLI::PositiveNumber);
  power->add_option("--trace", pw.trace);
  power->add_option("--out", pw.out);
  power->add_option("--cert", pw.cert, "Write an eigenvector certificate (data_p = 2)");

  FlowOpts fl;
  auto* flow = app.add_subcommand("flow", "Gradient-flow simulations");
  flow->add_option("--kind", fl.kind)->check(CLI::IsMember({"minmove", "ngf", "fagp", "nossek"}));
  flow->add_option("--graph", fl.graph)->required();
  flow->add_option("--functional", fl.functional)->required();
  flow->add_option("--init", fl.init, "CSV file or random[:seed]");
  flow->add_option("--dt", fl.dt, "0 picks 1e-3 / R(f)")->check(CLI::NonNegativeNumber);
  flow->add_option("--steps", fl.steps)->check(CLI::PositiveNumber);
  flow->add_option("--data-p", fl.data_p)->check(CLI::IsMember({1, 2}));
  flow->add_option("--data-norm", fl.data_norm)->check(CLI::IsMember({"l1", "l2"}));
  flow->add_option("--inner-tol", fl.inner_tol)->check(CLI::PositiveNumber);
  flow->add_option("--blowup", fl.blowup);
  flow->add_option("--trace", fl.trace);
  flow->add_option("--out", fl.out);

  GammaOpts gm;
  auto* gamma = app.add_subcommand("gamma", "Ground states along a refinement family");
  gamma->add_option("--family", gm.family)->required();
  gamma->add_option("--functional", gm.functional)->required();
  gamma->add_option("--out", gm.out);
  gamma->add_option("--rule", gm.rule)->check(CLI::IsMember({"variable", "constant"}));
  gamma->add_option("--c", gm.c);
  gamma->add_option("--max-iter", gm.max_iter)->check(CLI::PositiveNumber);
  gamma->add_option("--angle-tol", gm.angle_tol)->check(CLI::PositiveNumber);
  gamma->add_option("--inner-tol", gm.inner_tol)->check(CLI::PositiveNumber);

  BoundsOpts bd;
  auto* bounds = app.add_subcommand("bounds", "Exact reconstruction and extinction time bounds");
  bounds->add_option("--graph", bd.graph)->required();
  bounds->add_option("--functional", bd.functional)->required();
  bounds->add_option("--input", bd.input)->required();
  bounds->add_option("--data-p", bd.data_p)->check(CLI::IsMember({1, 2}));
  bounds->add_option("--data-norm", bd.data_norm)->check(CLI::IsMember({"l1", "l2"}));
  bounds->add_option("--lambda1", bd.lambda1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  Manifest m;
  int code = 0;
  json diag;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (sub == "prox") {
      run_prox(px, seed, m, out);
    } else if (sub == "power") {
      run_power_cmd(pw, seed, m, out);
    } else if (sub == "flow") {
      run_flow_cmd(fl, seed, m, out);
    } else if (sub == "gamma") {
      run_gamma_cmd(gm, threads, seed, m, out);
    } else {
      run_bounds_cmd(bd, m, out);
    }
  } catch (const RunFailure& f) {
    code = 3;
    diag = f.diagnostic;
  } catch (const ExtinctionError& e) {
    code = 3;
    diag = {{"error", "extinction"},
            {"message", e.what()},
            {"sigma", e.sigma()},
            {"sigma_dstar_lower", e.sigma_dstar_lower()}};
  } catch (const DegenerateInputError& e) {
    code = 3;
    diag = {{"error", "degenerate_input"}, {"message", e.what()}};
  } catch (const FlowError& e) {
    code = 3;
    diag = {{"error", "flow"}, {"message", e.what()}};
  } catch (const NumericalError& e) {
    code = 3;
    diag = {{"error", "numerical"}, {"message", e.what()}};
  } catch (const InputError& e) {
    code = 2;
    diag = {{"error", "input"}, {"message", e.what()}};
  } catch (const std::exception& e) {
    code = 3;
    diag = {{"error", "internal"}, {"message", e.what()}};
  }
  if (code != 0) err << diag.dump() << '\n';

  if (!manifest_path.empty()) {
    json man = {{"subcommand", sub},
                {"version", kVersion},
                {"argv", std::vector<std::string>(argv, argv + argc)},
                {"config", m.config},
                {"seed", seed},
                {"threads", threads},
                {"rng", Rng::kName},
                {"inputs", m.inputs},
                {"outputs", m.outputs},
                {"exit_code", code},
                {"wall_clock_s",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    try {
      write_json(manifest_path, man);
    } catch (const InputError& e) {
      err << json{{"error", "input"}, {"message", e.what()}}.dump() << '\n';
      if (code == 0) code = 2;
    }
  }
  return code;
}

}  // namespace nleig::cli
