#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>

#include "oracles.hpp"
#include "rggrecon/io.hpp"
#include "rggrecon/plot.hpp"
#include "rggrecon/selftest.hpp"
#include "rggrecon/sweep.hpp"

using namespace rgg;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Parameter;
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("rggrecon_test_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

/// Row equality ignoring wall-clock fields.
bool same_result(const SweepRow& a, const SweepRow& b) {
  auto eq = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || same_bits(x, y); };
  return a.cell == b.cell && a.status == b.status && a.domain == b.domain && a.m == b.m && a.n == b.n &&
         eq(a.alpha, b.alpha) && eq(a.r, b.r) && a.seed == b.seed && eq(a.d_star, b.d_star) &&
         a.surrogate == b.surrogate && eq(a.beta_expected, b.beta_expected) && eq(a.beta_fitted, b.beta_fitted) &&
         a.edges == b.edges && eq(a.deep_fraction, b.deep_fraction);
}

}  // namespace

TEST_CASE("number formatting round trips") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(same_bits(std::stod(format_double(x)), x));
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("graph and positions files round trip") {
  TempDir tmp;
  const auto d = DomainSpec::square(1500);
  const auto p = ModelParams::from_alpha(d, 0.3);
  const auto t = sample_positions(d, p, 3);
  const auto g = build_adjacency(t, p);
  write_graph(tmp / "g.json", g);
  write_positions(tmp / "p.json", t);
  const auto g2 = read_graph(tmp / "g.json");
  CHECK(g2.n() == g.n());
  CHECK(g2.edges() == g.edges());
  CHECK(same_bits(g2.r(), g.r()));
  CHECK(g2.domain() == g.domain());
  const auto t2 = read_positions(tmp / "p.json", d);
  REQUIRE(t2.positions.coords.size() == t.positions.coords.size());
  CHECK(std::memcmp(t2.positions.coords.data(), t.positions.coords.data(), t.positions.coords.size() * 8) == 0);

  // The graph file carries no coordinates.
  CHECK(read_text(tmp / "g.json").find("positions") == std::string::npos);

  write_text(tmp / "bad.json", "{\"format_version\": 1, \"n\": 3, \"edges\": [[0, 7]]");
  CHECK(kind_of([&] { read_graph(tmp / "bad.json"); }) == ErrorKind::Format);
  write_text(tmp / "future.json", "{\"format_version\": 99, \"positions\": []}");
  CHECK(kind_of([&] { read_positions(tmp / "future.json", d); }) == ErrorKind::Format);
  CHECK(kind_of([&] { read_graph(tmp / "missing.json"); }) == ErrorKind::Io);
}

TEST_CASE("reconstruction file round trip") {
  TempDir tmp;
  const auto d = DomainSpec::square(10000);
  const auto p = ModelParams::from_alpha(d, 0.3);
  const auto t = sample_positions(d, p, 1);
  const auto g = build_adjacency(t, p);
  const ConstantsLedger ledger;
  const auto recon = reconstruct(g, ledger);
  write_reconstruction(tmp / "r.json", recon, g.r(), ledger, nlohmann::json{{"reconstruct", 1.0}});
  const auto back = read_reconstruction(tmp / "r.json");
  CHECK(back.frame == recon.frame);
  CHECK(back.landmarks.ids == recon.landmarks.ids);
  CHECK(back.corners == recon.corners);
  CHECK(back.relativeDepth == recon.relativeDepth);
  CHECK(back.positions.coords == recon.positions.coords);
  CHECK(same_bits(distortion(back, t).dStar, distortion(recon, t).dStar));

  const auto rep = distortion(recon, t);
  const auto j = report_json(rep, ledger, nlohmann::json::object());
  CHECK(same_bits(j["d_star"].get<double>(), rep.dStar));
  CHECK(j.contains("percentiles"));
  CHECK(j["surrogate"] == false);
}

TEST_CASE("estimate CSV round trip and errors") {
  TempDir tmp;
  std::vector<EstimateRow> rows(3);
  rows[0] = {1, 2, DistanceEstimate::Kind::Hybrid, 12.5, 3.25, 12.0};
  rows[1] = {4, 2, DistanceEstimate::Kind::ShortLune, 0.1 + 0.2, 1.0 / 3.0, std::nullopt};
  rows[2] = {7, 9, DistanceEstimate::Kind::ShortLens, 2.0, kInfinity, 1.5};
  write_estimates_csv(tmp / "e.csv", rows);
  const auto back = read_estimates_csv(tmp / "e.csv");
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].u == rows[i].u);
    CHECK(back[i].kind == rows[i].kind);
    CHECK(same_bits(back[i].value, rows[i].value));
    CHECK(same_bits(back[i].envelope, rows[i].envelope));
    CHECK(back[i].true_distance == rows[i].true_distance);
  }
  write_text(tmp / "broken.csv", "pair_u,pair_v,kind,value,envelope,true_distance\n1,2,hybrid,abc,1,\n");
  try {
    read_estimates_csv(tmp / "broken.csv");
    FAIL("malformed value accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
    CHECK(std::string(e.what()).find("row 2, column value") != std::string::npos);
  }
}

TEST_CASE("log-log fit is exact on a power law") {
  std::vector<double> x, y;
  for (double n : {1000.0, 4096.0, 20000.0, 65536.0}) {
    x.push_back(n);
    y.push_back(std::pow(n, 1.0 / 6.0));
  }
  const auto f = fit_loglog(x, y);
  CHECK(std::abs(f.slope - 1.0 / 6.0) <= 1e-12);
  CHECK(std::abs(f.intercept) <= 1e-10);
  CHECK(f.slope == doctest::Approx(oracle::loglog_slope(x, y)).epsilon(1e-12));
}

TEST_CASE("sweep CSV parsing") {
  CHECK(kind_of([] { parse_sweep_csv(""); }) == ErrorKind::Format);
  CHECK(kind_of([] { parse_sweep_csv("#format_version=1\n"); }) == ErrorKind::Format);
  SweepRow row;
  row.cell = "abc";
  row.status = "ok";
  row.n = 4096;
  row.alpha = 0.25;
  row.r = 8;
  row.seed = 3;
  row.d_star = 0.1 + 0.2;
  row.beta_expected = 1.0 / 6.0;
  row.beta_fitted = std::nan("");
  row.message = "";
  const std::string text = "#format_version=1\n" + sweep_csv_header() + "\n" + to_csv_line(row) + "\n";
  const auto rows = parse_sweep_csv(text);
  REQUIRE(rows.size() == 1);
  CHECK(same_result(rows[0], row));

  std::string bad = text;
  bad.replace(bad.find("4096"), 4, "40x6");
  try {
    parse_sweep_csv(bad);
    FAIL("malformed row accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
    const std::string what = e.what();
    CHECK(what.find("row 3") != std::string::npos);  // rows count file lines
    CHECK(what.find("column n") != std::string::npos);
  }
}

TEST_CASE("plot from a synthetic power law") {
  TempDir tmp;
  std::vector<SweepRow> rows;
  for (std::int64_t n : {4096, 16384, 65536})
    for (std::uint64_t s : {1, 2, 3}) {
      SweepRow r;
      r.cell = std::to_string(n) + "_" + std::to_string(s);
      r.status = "ok";
      r.n = n;
      r.alpha = 0.25;
      r.r = std::pow(double(n), 0.25);
      r.seed = s;
      r.d_star = std::pow(double(n), 1.0 / 6.0);
      r.beta_expected = 1.0 / 6.0;
      rows.push_back(r);
    }
  write_sweep_csv(tmp / "s.csv", rows);
  const auto plot = plot_csv(tmp / "s.csv", tmp / "s.svg");
  REQUIRE(plot.series.size() == 1);
  CHECK(plot.series[0].fitted);
  CHECK(std::abs(plot.series[0].fit.slope - 1.0 / 6.0) <= 1e-6);
  const auto svg = read_text(tmp / "s.svg");
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("slope=0.166667") != std::string::npos);
  CHECK(svg.find("http://www.w3.org/2000/svg") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);

  write_text(tmp / "empty.csv", "");
  CHECK(kind_of([&] { plot_csv(tmp / "empty.csv", tmp / "e.svg"); }) == ErrorKind::Format);
  rows.resize(1);
  rows[0].status = "LandmarkSearchFailed";
  write_sweep_csv(tmp / "failed.csv", rows);
  CHECK(kind_of([&] { plot_csv(tmp / "failed.csv", tmp / "f.svg"); }) == ErrorKind::Format);
}

TEST_CASE("single cell equals the pipeline") {
  const auto d = DomainSpec::square(4000);
  const auto p = ModelParams::from_alpha(d, 0.3);
  const ConstantsLedger ledger;
  const auto row = run_cell(d, p, 7, ledger);
  REQUIRE(row.ok());
  const auto t = sample_positions(d, p, 7);
  const auto g = build_adjacency(t, p);
  const auto rep = distortion(reconstruct(g, ledger), t);
  CHECK(same_bits(row.d_star, rep.dStar));
  CHECK(row.edges == g.edge_count());
  CHECK(row.n == 4000);
  CHECK(row.beta_expected == expected_beta(0.3, 2));
  CHECK(row.cell == cell_hash(d, p, 7, ledger));
  CHECK(row.cell != cell_hash(d, p, 8, ledger));
}

TEST_CASE("sweep is deterministic and resumable") {
  TempDir tmp;
  SweepSpec spec;
  spec.alphas = {0.3};
  spec.ns = {1500, 3000};
  spec.seeds = {1, 2};
  int calls = 0;
  const auto first = run_sweep(spec, tmp / "a.csv", [&](const SweepRow&) { ++calls; });
  CHECK(calls == 4);
  REQUIRE(first.size() == 4);
  for (const auto& r : first) CHECK(r.ok());
  // Two sizes per alpha: every row carries the fitted slope.
  for (const auto& r : first) CHECK(std::isfinite(r.beta_fitted));

  const auto second = run_sweep(spec, tmp / "b.csv");
  REQUIRE(second.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(same_result(first[i], second[i]));

  calls = 0;
  const auto resumed = run_sweep(spec, tmp / "a.csv", [&](const SweepRow&) { ++calls; });
  CHECK(calls == 0);
  REQUIRE(resumed.size() == 4);
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(same_result(first[i], resumed[i]));

  // Extending the seeds only runs the new cells.
  spec.seeds = {1, 2, 3};
  calls = 0;
  const auto extended = run_sweep(spec, tmp / "a.csv", [&](const SweepRow&) { ++calls; });
  CHECK(calls == 2);
  CHECK(extended.size() == 6);
  CHECK(read_sweep_csv(tmp / "a.csv").size() == 6);

  SweepSpec big = spec;
  big.budgetEdges = 10;
  CHECK(kind_of([&] { run_sweep(big, tmp / "c.csv"); }) == ErrorKind::Parameter);
  SweepSpec none = spec;
  none.seeds.clear();
  CHECK(kind_of([&] { run_sweep(none, tmp / "c.csv"); }) == ErrorKind::Parameter);
}

TEST_CASE("selftest passes with reduced sample counts") {
  SelftestOptions opt;
  opt.monteCarloSamples = 200000;
  const auto checks = run_selftest(opt);
  CHECK(checks.size() >= 5);
  for (const auto& c : checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
}
