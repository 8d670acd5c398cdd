#include "rggrecon/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "rggrecon/graph.hpp"
#include "rggrecon/io.hpp"
#include "rggrecon/parallel.hpp"
#include "rggrecon/reconstruct.hpp"

namespace rgg {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kCsvVersionLine = "#format_version=1";

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace

DomainSpec SweepSpec::domain_for(std::int64_t n) const {
  switch (domain) {
    case DomainKind::Square2D: return DomainSpec::square(n);
    case DomainKind::Hypercube: return DomainSpec::hypercube(n, m);
    case DomainKind::Sphere2: return DomainSpec::sphere(n);
  }
  return DomainSpec::square(n);
}

void SweepSpec::validate() const {
  if (alphas.empty() || ns.empty() || seeds.empty())
    throw Error(ErrorKind::Parameter, "sweep needs at least one alpha, one n and one seed");
  constants.validate();
  if (!(budgetEdges > 0)) throw Error(ErrorKind::Parameter, "edge budget must be positive");
  for (double alpha : alphas) {
    for (std::int64_t n : ns) {
      const DomainSpec d = domain_for(n);
      d.validate();
      const ModelParams p = ModelParams::from_alpha(d, alpha, process);
      p.validate(d);
      const double e = expected_edge_count(d, p.r);
      if (e > budgetEdges) {
        std::ostringstream msg;
        msg << "cell n=" << n << " alpha=" << alpha << " expects about " << static_cast<long long>(e)
            << " edges, over the budget of " << static_cast<long long>(budgetEdges);
        throw Error(ErrorKind::Parameter, msg.str());
      }
    }
  }
}

std::string cell_hash(const DomainSpec& domain, const ModelParams& params, std::uint64_t seed,
                      const ConstantsLedger& ledger) {
  nlohmann::json j = {{"format_version", kFormatVersion},
                      {"domain", to_json(domain)},
                      {"n", domain.n},
                      {"r", format_double(params.r)},
                      {"model", params.process == PointProcess::Poisson ? "poisson" : "uniform"},
                      {"seed", seed},
                      {"constants", to_json(ledger)}};
  // FNV-1a over the canonical dump; object keys are sorted by the json library.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SweepRow run_cell(const DomainSpec& domain, const ModelParams& params, std::uint64_t seed,
                  const ConstantsLedger& ledger) {
  SweepRow row;
  row.cell = cell_hash(domain, params, seed, ledger);
  row.domain = domain.kind;
  row.m = domain.m;
  row.n = domain.n;
  row.alpha = params.alpha.value_or(std::log(params.r) / std::log(static_cast<double>(domain.n)));
  row.r = params.r;
  row.seed = seed;
  row.beta_expected = expected_beta(row.alpha, domain.m);
  row.beta_fitted = kNaN;
  row.d_star = kNaN;
  const auto start = std::chrono::steady_clock::now();
  try {
    const GroundTruth truth = sample_positions(domain, params, seed);
    const GraphInstance g = build_adjacency(truth, params);
    row.edges = g.edge_count();
    const auto t_rec = std::chrono::steady_clock::now();
    const Reconstruction recon = reconstruct(g, ledger);
    row.reconstruct_ms = elapsed_ms(t_rec);
    const DeepOracle deep = default_deep_oracle(g, ledger);
    const DistortionReport report = distortion(recon, truth);
    row.d_star = report.dStar;
    row.surrogate = report.surrogate;
    // Estimated on an evenly spaced sample of vertices.
    const std::size_t probes = std::min<std::size_t>(g.n(), 2000);
    std::size_t deep_count = 0;
    for (std::size_t i = 0; i < probes; ++i) deep_count += deep.is_deep(static_cast<VertexId>(i * g.n() / probes)) ? 1 : 0;
    row.deep_fraction = probes ? static_cast<double>(deep_count) / static_cast<double>(probes) : 0.0;
    row.status = "ok";
  } catch (const Error& e) {
    row.status = std::string(to_string(e.kind()));
    row.message = sanitize(e.what());
  } catch (const std::bad_alloc&) {
    row.status = "OutOfMemory";
    row.message = "allocation failed";
  }
  row.runtime_ms = elapsed_ms(start);
  return row;
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "fit needs equally many x and y values");
  if (x.size() < 2) throw Error(ErrorKind::Parameter, "fit needs at least two points");
  double sx = 0, sy = 0;
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw Error(ErrorKind::Parameter, "log-log fit needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double k = static_cast<double>(x.size());
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0) throw Error(ErrorKind::Parameter, "fit needs at least two distinct x values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace

void fit_betas(std::vector<SweepRow>& rows) {
  using Key = std::tuple<int, int, double>;
  std::map<Key, std::map<std::int64_t, std::vector<double>>> groups;
  for (const auto& r : rows)
    if (r.ok() && r.d_star > 0) groups[{static_cast<int>(r.domain), r.m, r.alpha}][r.n].push_back(r.d_star);
  std::map<Key, double> slope;
  for (const auto& [key, by_n] : groups) {
    if (by_n.size() < 2) continue;
    std::vector<double> xs, ys;
    for (const auto& [n, ds] : by_n) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(median(ds));
    }
    slope[key] = fit_loglog(xs, ys).slope;
  }
  for (auto& r : rows) {
    const auto it = slope.find({static_cast<int>(r.domain), r.m, r.alpha});
    r.beta_fitted = it == slope.end() ? kNaN : it->second;
  }
}

std::string sweep_csv_header() {
  return "cell,status,domain,m,n,alpha,r,seed,d_star,surrogate,beta_expected,beta_fitted,runtime_ms,"
         "reconstruct_ms,edges,deep_fraction,message";
}

namespace {

std::string num(double x) { return std::isnan(x) ? std::string() : format_double(x); }

}  // namespace

std::string to_csv_line(const SweepRow& r) {
  std::ostringstream s;
  s << r.cell << ',' << r.status << ',' << to_string(r.domain) << ',' << r.m << ',' << r.n << ','
    << format_double(r.alpha) << ',' << format_double(r.r) << ',' << r.seed << ',' << num(r.d_star) << ','
    << (r.surrogate ? 1 : 0) << ',' << num(r.beta_expected) << ',' << num(r.beta_fitted) << ','
    << num(r.runtime_ms) << ',' << num(r.reconstruct_ms) << ',' << r.edges << ',' << num(r.deep_fraction) << ','
    << sanitize(r.message);
  return s.str();
}

void write_sweep_csv(const fs::path& path, const std::vector<SweepRow>& rows) {
  std::string text = std::string(kCsvVersionLine) + "\n" + sweep_csv_header() + "\n";
  for (const auto& r : rows) text += to_csv_line(r) + "\n";
  write_text(path, text);
}

namespace {

[[noreturn]] void bad_cell(std::size_t line, const std::string& column, const std::string& what) {
  throw Error(ErrorKind::Format, "row " + std::to_string(line) + ", column " + column + ": " + what);
}

double parse_num(const std::string& s, std::size_t line, const std::string& column, bool allow_empty) {
  if (s.empty()) {
    if (allow_empty) return kNaN;
    bad_cell(line, column, "empty value");
  }
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    bad_cell(line, column, "not a number: '" + s + "'");
  }
  if (used != s.size()) bad_cell(line, column, "not a number: '" + s + "'");
  return x;
}

std::uint64_t parse_uint(const std::string& s, std::size_t line, const std::string& column) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    bad_cell(line, column, "not a non-negative integer: '" + s + "'");
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    bad_cell(line, column, "integer out of range: '" + s + "'");
  }
}

}  // namespace

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  std::vector<SweepRow> rows;
  const std::vector<std::string> expected = [] {
    std::vector<std::string> cols;
    std::stringstream hs(sweep_csv_header());
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
    return cols;
  }();
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("#format_version=", 0) == 0 && line != kCsvVersionLine)
        throw Error(ErrorKind::Format, "row " + std::to_string(lineno) + ": unsupported " + line.substr(1));
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (header.empty()) {
      header = f;
      if (header != expected) throw Error(ErrorKind::Format, "row " + std::to_string(lineno) + ": unexpected header");
      continue;
    }
    if (f.size() != expected.size())
      throw Error(ErrorKind::Format, "row " + std::to_string(lineno) + ": expected " +
                                         std::to_string(expected.size()) + " columns, found " +
                                         std::to_string(f.size()));
    SweepRow r;
    r.cell = f[0];
    r.status = f[1];
    try {
      r.domain = domain_kind_from_string(f[2]);
    } catch (const Error&) {
      bad_cell(lineno, "domain", "unknown domain '" + f[2] + "'");
    }
    r.m = static_cast<int>(parse_uint(f[3], lineno, "m"));
    r.n = static_cast<std::int64_t>(parse_uint(f[4], lineno, "n"));
    r.alpha = parse_num(f[5], lineno, "alpha", false);
    r.r = parse_num(f[6], lineno, "r", false);
    r.seed = parse_uint(f[7], lineno, "seed");
    r.d_star = parse_num(f[8], lineno, "d_star", !r.ok());
    if (f[9] != "0" && f[9] != "1") bad_cell(lineno, "surrogate", "expected 0 or 1");
    r.surrogate = f[9] == "1";
    r.beta_expected = parse_num(f[10], lineno, "beta_expected", true);
    r.beta_fitted = parse_num(f[11], lineno, "beta_fitted", true);
    r.runtime_ms = parse_num(f[12], lineno, "runtime_ms", true);
    r.reconstruct_ms = parse_num(f[13], lineno, "reconstruct_ms", true);
    r.edges = static_cast<std::size_t>(parse_uint(f[14], lineno, "edges"));
    r.deep_fraction = parse_num(f[15], lineno, "deep_fraction", true);
    r.message = f[16];
    rows.push_back(std::move(r));
  }
  if (header.empty()) throw Error(ErrorKind::Format, "sweep CSV is empty");
  return rows;
}

std::vector<SweepRow> read_sweep_csv(const fs::path& path) { return parse_sweep_csv(read_text(path)); }

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const fs::path& csv,
                                const std::function<void(const SweepRow&)>& progress) {
  spec.validate();

  std::vector<SweepRow> existing;
  if (fs::exists(csv)) existing = read_sweep_csv(csv);
  std::set<std::string> done;
  for (const auto& r : existing)
    if (r.ok()) done.insert(r.cell);

  struct Cell {
    DomainSpec domain;
    ModelParams params;
    std::uint64_t seed;
    std::string hash;
  };
  std::vector<Cell> todo;
  for (double alpha : spec.alphas)
    for (std::int64_t n : spec.ns)
      for (std::uint64_t seed : spec.seeds) {
        const DomainSpec d = spec.domain_for(n);
        const ModelParams p = ModelParams::from_alpha(d, alpha, spec.process);
        std::string h = cell_hash(d, p, seed, spec.constants);
        if (!done.count(h)) todo.push_back({d, p, seed, std::move(h)});
      }

  // Rows finished by earlier runs stay; failed rows for cells about to rerun are dropped.
  std::set<std::string> rerun;
  for (const auto& c : todo) rerun.insert(c.hash);
  std::vector<SweepRow> rows;
  for (auto& r : existing)
    if (!rerun.count(r.cell)) rows.push_back(std::move(r));
  write_sweep_csv(csv, rows);

  std::mutex writer;
  std::ofstream out(csv, std::ios::app);
  if (!out) throw Error(ErrorKind::Io, "cannot append to " + csv.string());
  const unsigned jobs = spec.jobs ? spec.jobs : worker_count();
  const unsigned saved = thread_setting().load();
  // With one job the cell itself may use every core.
  if (jobs > 1) thread_setting() = jobs;
  try {
    parallel_for(todo.size(), [&](std::size_t begin, std::size_t end, unsigned) {
      for (std::size_t i = begin; i < end; ++i) {
        const Cell& c = todo[i];
        SweepRow row;
        if (expected_edge_count(c.domain, c.params.r) > spec.budgetEdges) {
          row.cell = c.hash;
          row.status = "BudgetExceeded";
          row.message = "expected edge count over budget";
        } else {
          row = run_cell(c.domain, c.params, c.seed, spec.constants);
        }
        std::lock_guard lock(writer);
        out << to_csv_line(row) << '\n' << std::flush;
        rows.push_back(row);
        if (progress) progress(row);
      }
    }, 1);
  } catch (...) {
    thread_setting() = saved;
    throw;
  }
  thread_setting() = saved;
  out.close();

  // Restore spec order so the rewritten file does not depend on scheduling.
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < todo.size(); ++i) order[todo[i].hash] = i;
  std::stable_sort(rows.begin(), rows.end(), [&](const SweepRow& a, const SweepRow& b) {
    const auto ia = order.find(a.cell), ib = order.find(b.cell);
    const std::size_t ka = ia == order.end() ? 0 : ia->second + 1;
    const std::size_t kb = ib == order.end() ? 0 : ib->second + 1;
    return ka < kb;
  });
  fit_betas(rows);
  write_sweep_csv(csv, rows);
  return rows;
}

}  // namespace rgg
