#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "rggrecon/generate.hpp"

using namespace rgg;

namespace {

ModelParams radius(double r) {
  ModelParams p;
  p.r = r;
  return p;
}

GroundTruth flat_truth(const DomainSpec& d, std::vector<std::vector<double>> pts) {
  GroundTruth t;
  t.domain = d;
  t.positions = PointSet(d.ambient_dim(), 0);
  for (const auto& p : pts) t.positions.push_back(p);
  return t;
}

void check_matches_brute(const GroundTruth& truth, const ModelParams& params, AdjacencyLayout layout) {
  const auto g = build_adjacency(truth, params, layout);
  const auto a = oracle::brute_adjacency(truth, params.r);
  REQUIRE(g.n() == truth.size());
  std::size_t mismatches = 0;
  std::uint64_t edges = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::uint32_t deg = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const bool want = a[i][j] != 0;
      mismatches += g.adjacent(static_cast<VertexId>(i), static_cast<VertexId>(j)) != want;
      deg += want;
      edges += want && j > i;
    }
    mismatches += g.degree(static_cast<VertexId>(i)) != deg;
  }
  CHECK(mismatches == 0);
  CHECK(g.edge_count() == edges);
}

}  // namespace

TEST_CASE("sampling examples") {
  const auto tiny = DomainSpec::square(4);
  const auto t = sample_positions(tiny, radius(0.5), 17);
  REQUIRE(t.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (double c : t.positions[i]) {
      CHECK(c >= 0.0);
      CHECK(c <= 2.0);
    }

  const auto sph = DomainSpec::sphere(100);
  const auto s = sample_positions(sph, radius(1.0), 5);
  REQUIRE(s.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto p = s.positions[i];
    CHECK(std::abs(std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) - 1.0) <= 1e-12);
  }

  const auto cube = DomainSpec::hypercube(1000, 3);
  const auto c = sample_positions(cube, radius(1.5), 5);
  CHECK(c.positions.dim == 3);
  CHECK(c.size() == 1000);
}

TEST_CASE("sampling is deterministic and seed dependent") {
  const auto d = DomainSpec::square(2000);
  const ModelParams p = radius(3.0);
  const auto a = sample_positions(d, p, 99), b = sample_positions(d, p, 99), c = sample_positions(d, p, 100);
  REQUIRE(a.positions.coords.size() == b.positions.coords.size());
  CHECK(std::memcmp(a.positions.coords.data(), b.positions.coords.data(), a.positions.coords.size() * 8) == 0);
  CHECK(a.positions.coords != c.positions.coords);
  const auto ga = build_adjacency(a, p), gb = build_adjacency(b, p);
  CHECK(ga.edges() == gb.edges());
}

TEST_CASE("sub-square counts follow the binomial law") {
  // Fixed region [0, side/2]^2 has area n/4; over 200 seeds the mean count
  // must lie within 4 standard errors of n/4.
  const std::int64_t n = 4096;
  const auto d = DomainSpec::square(n);
  const double half = d.side() / 2;
  const int seeds = 200;
  double total = 0;
  for (int s = 0; s < seeds; ++s) {
    const auto t = sample_positions(d, radius(2.0), 1000 + s);
    for (std::size_t i = 0; i < t.size(); ++i)
      total += (t.positions[i][0] < half && t.positions[i][1] < half) ? 1 : 0;
  }
  const double mean = total / seeds, expect = n / 4.0;
  CHECK(std::abs(mean - expect) <= 4 * std::sqrt(expect) / std::sqrt(double(seeds)));
}

TEST_CASE("poisson process varies the count") {
  const auto d = DomainSpec::square(2500);
  ModelParams p = radius(3.0);
  p.process = PointProcess::Poisson;
  double sum = 0, sq = 0;
  bool varied = false;
  std::size_t first = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    const auto t = sample_positions(d, p, s);
    const double k = static_cast<double>(t.size());
    if (s == 0) first = t.size();
    varied |= t.size() != first;
    sum += k;
    sq += k * k;
  }
  CHECK(varied);
  const double mean = sum / seeds, var = sq / seeds - mean * mean;
  CHECK(std::abs(mean - 2500) <= 4 * std::sqrt(2500.0 / seeds));
  CHECK(var == doctest::Approx(2500).epsilon(0.5));
}

TEST_CASE("edge rule is strict") {
  const auto d = DomainSpec::square(100);
  const auto t = flat_truth(d, {{1.0, 1.0}, {4.0, 1.0}, {1.0, 3.9999}, {7.0, 5.0}});
  const auto g = build_adjacency(t, radius(3.0));
  CHECK_FALSE(g.adjacent(0, 1));  // exactly r apart
  CHECK(g.adjacent(0, 2));
  CHECK(g.adjacent(2, 0));
  CHECK_FALSE(g.adjacent(0, 0));
  CHECK(g.degree(3) == 0);
  CHECK(g.edge_count() == 1);
}

TEST_CASE("adjacency equals brute force on small instances") {
  int instance = 0;
  for (std::int64_t n : {50, 300, 1000, 2000}) {
    for (double alpha : {0.2, 0.3, 0.4}) {
      const auto d = DomainSpec::square(n);
      if (std::pow(double(n), alpha) >= d.side() / 2) continue;
      const auto p = ModelParams::from_alpha(d, alpha);
      const auto t = sample_positions(d, p, 7 + instance++);
      check_matches_brute(t, p, AdjacencyLayout::Lists);
      check_matches_brute(t, p, AdjacencyLayout::Matrix);
    }
  }
  for (int m : {3, 4}) {
    const auto d = DomainSpec::hypercube(1500, m);
    ModelParams p = radius(0.35 * d.side());
    const auto t = sample_positions(d, p, 40 + m);
    check_matches_brute(t, p, AdjacencyLayout::Auto);
  }
  const auto sph = DomainSpec::sphere(1800);
  ModelParams p = radius(3.0);
  check_matches_brute(sample_positions(sph, p, 3), p, AdjacencyLayout::Lists);
  check_matches_brute(sample_positions(sph, p, 4), p, AdjacencyLayout::Matrix);
}

TEST_CASE("neighbor lists are sorted, symmetric and loop free") {
  const auto d = DomainSpec::square(5000);
  const auto p = ModelParams::from_alpha(d, 0.3);
  const auto g = build_adjacency(sample_positions(d, p, 12), p, AdjacencyLayout::Lists);
  REQUIRE_FALSE(g.is_matrix());
  std::size_t bad = 0;
  for (VertexId v = 0; v < g.n(); ++v) {
    const auto nb = g.lists().neighbors(v);
    bad += !std::is_sorted(nb.begin(), nb.end());
    bad += std::adjacent_find(nb.begin(), nb.end()) != nb.end();
    for (VertexId w : nb) {
      bad += w == v;
      const auto back = g.lists().neighbors(w);
      bad += !std::binary_search(back.begin(), back.end(), v);
    }
  }
  CHECK(bad == 0);
  const auto edges = g.edges();
  CHECK(edges.size() == g.edge_count());
  const auto again = GraphInstance::from_edges(d, p, g.n(), edges, AdjacencyLayout::Matrix);
  CHECK(again.edges() == edges);
  CHECK(again.degrees() == g.degrees());
}

TEST_CASE("interior mean degree matches the area intensity") {
  const std::int64_t n = 40000;
  const auto d = DomainSpec::square(n);
  const auto p = ModelParams::from_alpha(d, 0.3);
  const auto t = sample_positions(d, p, 2024);
  const auto g = build_adjacency(t, p);
  double sum = 0;
  std::size_t count = 0;
  for (VertexId v = 0; v < g.n(); ++v) {
    const auto q = t.positions[v];
    if (q[0] > p.r && q[0] < d.side() - p.r && q[1] > p.r && q[1] < d.side() - p.r) {
      sum += g.degree(v);
      ++count;
    }
  }
  REQUIRE(count >= 10000);
  const double mean = sum / static_cast<double>(count);
  // n - 1 other points, each inside the disk with probability pi r^2 / n.
  const double expect = (n - 1) * oracle::kPi * p.r * p.r / n;
  CHECK(std::abs(mean - expect) <= 0.05 * expect);
  CHECK(std::abs(mean - (oracle::kPi * p.r * p.r - 1)) <= 0.05 * expect);
}
