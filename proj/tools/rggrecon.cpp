// Command line front end: generate, reconstruct, evaluate, sweep, plot, selftest.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "rggrecon/graph.hpp"
#include "rggrecon/io.hpp"
#include "rggrecon/parallel.hpp"
#include "rggrecon/plot.hpp"
#include "rggrecon/reconstruct.hpp"
#include "rggrecon/selftest.hpp"
#include "rggrecon/sweep.hpp"

namespace fs = std::filesystem;
using namespace rgg;

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kParameter = 3,
  kDomain = 4,
  kEstimation = 5,
  kReconstruction = 6,
  kLengthMismatch = 7,
  kIo = 8,
  kFormat = 9,
  kSelftestFailed = 10,
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parameter: return kParameter;
    case ErrorKind::Domain: return kDomain;
    case ErrorKind::DeepRequired:
    case ErrorKind::WrongRange:
    case ErrorKind::NoPath: return kEstimation;
    case ErrorKind::LandmarkSearchFailed:
    case ErrorKind::TriangleInequalityViolated:
    case ErrorKind::SingularGeometry:
    case ErrorKind::DegenerateProjection:
    case ErrorKind::CornerSearchFailed: return kReconstruction;
    case ErrorKind::LengthMismatch: return kLengthMismatch;
    case ErrorKind::Io: return kIo;
    case ErrorKind::Format: return kFormat;
  }
  return kInternal;
}

void report_error(std::string_view kind, std::string_view message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

double ms_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t).count();
}

struct Options {
  std::int64_t n = 0;
  std::optional<double> alpha, r;
  std::string domain = "square";
  int m = 2;
  std::string model = "uniform";
  std::uint64_t seed = 1;
  std::string graph, positions, recon, out, csv, constants;
  unsigned jobs = 0;
  double budget_edges = 2.0e8;
  std::vector<double> alphas;
  std::vector<std::int64_t> ns;
  std::vector<std::uint64_t> seeds;
};

ConstantsLedger load_constants(const Options& o) {
  if (o.constants.empty()) return {};
  ConstantsLedger c = constants_from_json(read_json(o.constants));
  c.validate();
  return c;
}

DomainSpec make_domain(const std::string& kind, std::int64_t n, int m) {
  DomainSpec d;
  if (kind == "square") d = DomainSpec::square(n);
  else if (kind == "hypercube") d = DomainSpec::hypercube(n, m);
  else if (kind == "sphere") d = DomainSpec::sphere(n);
  else throw Error(ErrorKind::Parameter, "unknown domain '" + kind + "'");
  d.validate();
  return d;
}

PointProcess make_process(const std::string& model) {
  if (model == "uniform") return PointProcess::UniformN;
  if (model == "poisson") return PointProcess::Poisson;
  throw Error(ErrorKind::Parameter, "unknown model '" + model + "'");
}

fs::path in_out(const Options& o, const std::string& explicit_path, const char* name) {
  if (!explicit_path.empty()) return explicit_path;
  if (o.out.empty()) throw Error(ErrorKind::Parameter, std::string("no path for ") + name + "; pass it or --out");
  fs::create_directories(o.out);
  return fs::path(o.out) / name;
}

int cmd_generate(const Options& o) {
  if (o.n <= 0) throw Error(ErrorKind::Parameter, "--n must be positive");
  if (o.alpha.has_value() == o.r.has_value()) throw Error(ErrorKind::Parameter, "give exactly one of --alpha and --r");
  const DomainSpec domain = make_domain(o.domain, o.n, o.m);
  const PointProcess process = make_process(o.model);
  ModelParams params;
  if (o.alpha) {
    params = ModelParams::from_alpha(domain, *o.alpha, process);
  } else {
    params.r = *o.r;
    params.process = process;
  }
  params.validate(domain);
  const fs::path graph = in_out(o, o.graph, "graph.json");
  const fs::path positions = in_out(o, o.positions, "positions.json");
  const GroundTruth truth = sample_positions(domain, params, o.seed);
  const GraphInstance g = build_adjacency(truth, params);
  write_graph(graph, g);
  write_positions(positions, truth);
  std::cout << nlohmann::json{{"graph", graph.string()},
                              {"positions", positions.string()},
                              {"n", g.n()},
                              {"r", g.r()},
                              {"edges", g.edge_count()}}
                   .dump()
            << std::endl;
  return kOk;
}

int cmd_reconstruct(const Options& o) {
  if (!o.positions.empty())
    throw Error(ErrorKind::Parameter, "reconstruct works from the graph alone and does not accept --positions");
  if (o.graph.empty()) throw Error(ErrorKind::Parameter, "--graph is required");
  const ConstantsLedger ledger = load_constants(o);
  const fs::path out = in_out(o, o.recon, "reconstruction.json");
  auto t0 = std::chrono::steady_clock::now();
  const GraphInstance g = read_graph(o.graph);
  const double load_ms = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  const Reconstruction recon = reconstruct(g, ledger);
  const double rec_ms = ms_since(t0);
  write_reconstruction(out, recon, g.r(), ledger, {{"load", load_ms}, {"reconstruct", rec_ms}});
  std::cout << nlohmann::json{{"reconstruction", out.string()},
                              {"landmarks", recon.landmarks.ids},
                              {"frame", to_string(recon.frame)},
                              {"reconstruct_ms", rec_ms}}
                   .dump()
            << std::endl;
  return kOk;
}

/// Accepts a reconstruction file, or a plain positions file taken as already
/// aligned with the domain.
Reconstruction load_recon_or_positions(const fs::path& path, const DomainSpec* fallback_domain) {
  const auto j = read_json(path);
  if (j.is_object() && j.contains("frame")) return reconstruction_from_json(j);
  if (!fallback_domain) throw Error(ErrorKind::Format, path.string() + ": not a reconstruction file");
  Reconstruction r;
  r.domain = *fallback_domain;
  r.frame = Frame::DomainAligned;
  r.positions = read_positions(path, *fallback_domain).positions;
  return r;
}

int cmd_evaluate(const Options& o) {
  if (o.recon.empty() || o.positions.empty()) throw Error(ErrorKind::Parameter, "--recon and --positions are required");
  const ConstantsLedger ledger = load_constants(o);
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<GraphInstance> g;
  if (!o.graph.empty()) g = read_graph(o.graph);
  std::optional<DomainSpec> domain;
  if (g) domain = g->domain();
  else if (o.n > 0) domain = make_domain(o.domain, o.n, o.m);
  Reconstruction recon = load_recon_or_positions(o.recon, domain ? &*domain : nullptr);
  const GroundTruth truth = read_positions(o.positions, recon.domain);
  if (truth.size() != recon.positions.size())
    throw Error(ErrorKind::LengthMismatch, "reconstruction has " + std::to_string(recon.positions.size()) +
                                                " points, positions file has " + std::to_string(truth.size()));
  const DistortionReport report = distortion(recon, truth);
  const double eval_ms = ms_since(t0);
  const fs::path out = in_out(o, "", "report.json");
  write_json(out, report_json(report, ledger, {{"evaluate", eval_ms}}));

  if (!o.csv.empty()) {
    if (!g) throw Error(ErrorKind::Parameter, "--csv needs --graph to recompute estimates");
    const DeepOracle deep = recon.relativeDepth ? median_depth_oracle(*g) : default_deep_oracle(*g, ledger);
    const KappaParams kappa = KappaParams::for_graph(*g, ledger.kappaC3);
    std::vector<EstimateRow> rows;
    for (VertexId l : recon.landmarks.ids) {
      const HybridField field = hybrid_field(*g, deep, l, kappa, ledger);
      for (VertexId u = 0; u < g->n(); ++u) {
        if (u == l) continue;
        const DistanceEstimate e = field.at(u);
        rows.push_back({u, l, e.kind, e.value, e.envelope,
                        geodesic_distance(truth.positions[u], truth.positions[l], truth.domain)});
      }
    }
    write_estimates_csv(o.csv, rows);
  }
  std::cout << nlohmann::json{{"report", out.string()}, {"d_star", report.dStar}, {"surrogate", report.surrogate}}.dump()
            << std::endl;
  return kOk;
}

int cmd_sweep(const Options& o) {
  if (o.csv.empty()) throw Error(ErrorKind::Parameter, "--csv is required");
  SweepSpec spec;
  spec.alphas = o.alphas;
  spec.ns = o.ns;
  spec.seeds = o.seeds.empty() ? std::vector<std::uint64_t>{o.seed} : o.seeds;
  spec.domain = o.domain == "square" ? DomainKind::Square2D
                : o.domain == "hypercube" ? DomainKind::Hypercube
                : o.domain == "sphere" ? DomainKind::Sphere2
                : throw Error(ErrorKind::Parameter, "unknown domain '" + o.domain + "'");
  spec.m = spec.domain == DomainKind::Hypercube ? o.m : 2;
  spec.process = make_process(o.model);
  spec.constants = load_constants(o);
  spec.budgetEdges = o.budget_edges;
  spec.jobs = o.jobs;
  const auto rows = run_sweep(spec, o.csv, [](const SweepRow& r) {
    std::cerr << nlohmann::json{{"cell", r.cell}, {"n", r.n}, {"alpha", r.alpha}, {"seed", r.seed},
                                {"status", r.status}, {"d_star", r.d_star}}
                     .dump()
              << std::endl;
  });
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.ok() ? 0 : 1;
  std::cout << nlohmann::json{{"csv", o.csv}, {"rows", rows.size()}, {"failed", failed}}.dump() << std::endl;
  return kOk;
}

int cmd_plot(const Options& o) {
  if (o.csv.empty() || o.out.empty()) throw Error(ErrorKind::Parameter, "--csv and --out are required");
  const Plot p = plot_csv(o.csv, o.out);
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& s : p.series) {
    nlohmann::json f = {{"alpha", s.alpha}};
    if (s.fitted) f["slope"] = s.fit.slope;
    fits.push_back(f);
  }
  std::cout << nlohmann::json{{"svg", o.out}, {"series", fits}}.dump() << std::endl;
  return kOk;
}

int cmd_selftest(const Options& o) {
  SelftestOptions so;
  so.seed = o.seed;
  bool all = true;
  for (const auto& c : run_selftest(so)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << std::endl;
    all = all && c.passed;
  }
  return all ? kOk : kSelftestFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstruct random geometric graphs from adjacency alone"};
  app.require_subcommand(1);
  Options o;

  const auto add_model_flags = [&](CLI::App* c, bool sweep) {
    c->add_option("--domain", o.domain, "square, hypercube or sphere")
        ->check(CLI::IsMember({"square", "hypercube", "sphere"}));
    c->add_option("--m", o.m, "hypercube dimension");
    c->add_option("--model", o.model, "uniform or poisson")->check(CLI::IsMember({"uniform", "poisson"}));
    if (sweep) {
      c->add_option("--n", o.ns, "sizes, comma separated")->delimiter(',')->required();
      c->add_option("--alpha", o.alphas, "exponents, comma separated")->delimiter(',')->required();
      c->add_option("--seed", o.seeds, "seeds, comma separated")->delimiter(',');
    } else {
      c->add_option("--n", o.n, "number of points");
      c->add_option("--seed", o.seed, "random seed");
    }
  };
  const auto add_common = [&](CLI::App* c) {
    c->add_option("--constants", o.constants, "constants ledger JSON");
    c->add_option("--jobs", o.jobs, "worker threads (0: all cores)");
  };

  auto* gen = app.add_subcommand("generate", "sample points and write graph and positions files");
  add_model_flags(gen, false);
  add_common(gen);
  auto* alpha_opt = gen->add_option("--alpha", o.alpha, "radius exponent, r = n^alpha");
  auto* r_opt = gen->add_option("--r", o.r, "connection radius");
  alpha_opt->excludes(r_opt);
  gen->add_option("--graph", o.graph, "graph output path");
  gen->add_option("--positions", o.positions, "positions output path");
  gen->add_option("--out", o.out, "output directory for default file names");

  auto* rec = app.add_subcommand("reconstruct", "reconstruct positions from a graph file");
  add_common(rec);
  rec->add_option("--graph", o.graph, "graph input path");
  rec->add_option("--recon", o.recon, "reconstruction output path");
  rec->add_option("--out", o.out, "output directory for default file names");
  // Parsed only so the refusal can be reported with its own exit code.
  rec->add_option("--positions", o.positions, "not accepted");

  auto* eval = app.add_subcommand("evaluate", "score a reconstruction against true positions");
  add_common(eval);
  eval->add_option("--recon", o.recon, "reconstruction (or aligned positions) path");
  eval->add_option("--positions", o.positions, "true positions path");
  eval->add_option("--graph", o.graph, "graph path; needed for --csv and for plain positions input");
  eval->add_option("--out", o.out, "output directory for report.json");
  eval->add_option("--csv", o.csv, "estimate dump path");
  eval->add_option("--n", o.n, "nominal n when --recon is a positions file and no graph is given");
  eval->add_option("--domain", o.domain)->check(CLI::IsMember({"square", "hypercube", "sphere"}));
  eval->add_option("--m", o.m);

  auto* sw = app.add_subcommand("sweep", "run the pipeline over a grid of (alpha, n, seed) cells");
  add_model_flags(sw, true);
  add_common(sw);
  sw->add_option("--csv", o.csv, "results CSV (resumed if present)");
  sw->add_option("--budget-edges", o.budget_edges, "largest expected edge count allowed per cell");

  auto* pl = app.add_subcommand("plot", "render a sweep CSV as SVG");
  pl->add_option("--csv", o.csv, "sweep CSV");
  pl->add_option("--out", o.out, "SVG output path");

  auto* st = app.add_subcommand("selftest", "run the geometry oracle checks");
  st->add_option("--seed", o.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("Usage", e.what());
    return kUsage;
  }

  try {
    thread_setting() = o.jobs;
    if (gen->parsed()) return cmd_generate(o);
    if (rec->parsed()) return cmd_reconstruct(o);
    if (eval->parsed()) return cmd_evaluate(o);
    if (sw->parsed()) return cmd_sweep(o);
    if (pl->parsed()) return cmd_plot(o);
    if (st->parsed()) return cmd_selftest(o);
  } catch (const Error& e) {
    report_error(to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    report_error("Format", e.what());
    return kFormat;
  } catch (const fs::filesystem_error& e) {
    report_error("Io", e.what());
    return kIo;
  } catch (const std::exception& e) {
    report_error("Internal", e.what());
    return kInternal;
  }
  return kUsage;
}
