#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "rggrecon/estimate.hpp"
#include "rggrecon/graph.hpp"

using namespace rgg;

namespace {

GraphInstance from_list(std::size_t n, const std::vector<std::pair<VertexId, VertexId>>& edges, double r = 1.0,
                        AdjacencyLayout layout = AdjacencyLayout::Lists) {
  ModelParams p;
  p.r = r;
  return GraphInstance::from_edges(DomainSpec::square(10000), p, n, edges, layout);
}

struct Instance {
  GroundTruth truth;
  GraphInstance graph;
};

Instance random_instance(std::int64_t n, double alpha, std::uint64_t seed,
                         AdjacencyLayout layout = AdjacencyLayout::Auto) {
  const auto d = DomainSpec::square(n);
  const auto p = ModelParams::from_alpha(d, alpha);
  auto t = sample_positions(d, p, seed);
  auto g = build_adjacency(t, p, layout);
  return {std::move(t), std::move(g)};
}

}  // namespace

TEST_CASE("bfs on small graphs") {
  const auto path = from_list(5, {{0, 1}, {1, 2}, {2, 3}});
  const auto b = bfs(path, 0);
  CHECK(b.dist == std::vector<std::uint32_t>{0, 1, 2, 3, kUnreachable});
  CHECK_FALSE(b.reachable(4));
  CHECK(bfs(path, 0, 2).dist[3] == kUnreachable);
  const std::vector<VertexId> both{0, 3};
  CHECK(bfs_multi(path, both) == std::vector<std::uint32_t>{0, 1, 1, 0, kUnreachable});
}

TEST_CASE("bfs matches Floyd-Warshall") {
  for (int s = 0; s < 6; ++s) {
    const auto layout = s % 2 ? AdjacencyLayout::Matrix : AdjacencyLayout::Lists;
    const auto inst = random_instance(200 + 60 * s, 0.25 + 0.02 * s, 300 + s, layout);
    const auto a = oracle::brute_adjacency(inst.truth, inst.graph.r());
    const auto d = oracle::apsp(a);
    std::size_t mismatches = 0, edge_jumps = 0;
    for (VertexId v = 0; v < inst.graph.n(); ++v) {
      const auto row = bfs(inst.graph, v);
      mismatches += row.dist != d[v];
      for (const auto& [x, y] : inst.graph.edges())
        if (row.reachable(x)) edge_jumps += std::max(row.dist[x], row.dist[y]) - std::min(row.dist[x], row.dist[y]) > 1;
    }
    CHECK(mismatches == 0);
    CHECK(edge_jumps == 0);
  }
}

TEST_CASE("neighbor counts on small graphs") {
  const auto tri = from_list(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(common_neighbors(tri, 0, 1) == 1);
  CHECK(common_neighbors(tri, 2, 0) == 1);
  CHECK(exclusive_neighbors(tri, 0, 1) == 1);  // just the other endpoint
  const auto pair = from_list(2, {{0, 1}});
  CHECK(common_neighbors(pair, 0, 1) == 0);
  const auto apart = from_list(6, {{0, 1}, {0, 2}, {3, 4}});
  CHECK(exclusive_neighbors(apart, 0, 3) == 2);
  CHECK_THROWS_AS(common_neighbors(tri, 1, 1), Error);
  CHECK_THROWS_AS(exclusive_neighbors(tri, 1, 1), Error);
}

TEST_CASE("neighbor counts match membership scans") {
  for (int s = 0; s < 4; ++s) {
    const auto layout = s % 2 ? AdjacencyLayout::Matrix : AdjacencyLayout::Lists;
    const auto inst = random_instance(500, 0.3, 400 + s, layout);
    const auto a = oracle::brute_adjacency(inst.truth, inst.graph.r());
    std::size_t bad = 0;
    for (VertexId v = 0; v < 500; ++v) {
      for (VertexId w = 0; w < 500; ++w) {
        if (v == w) continue;
        bad += common_neighbors(inst.graph, v, w) != oracle::common(a, v, w);
        bad += exclusive_neighbors(inst.graph, v, w) != oracle::exclusive(a, v, w);
      }
      bad += two_hop_count(inst.graph, v) != oracle::two_hop(a, v);
      bad += two_hop_ball(inst.graph, v).size() != oracle::two_hop(a, v) + 1;  // the ball holds v itself
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("deep classification examples") {
  // Star with ten leaves: 11 r^2 = 11 exceeds every two-hop count.
  std::vector<std::pair<VertexId, VertexId>> star;
  for (VertexId k = 1; k <= 10; ++k) star.emplace_back(0, k);
  const auto g = from_list(11, star);
  const auto labels = classify_deep(g);
  CHECK(labels.deep_count() == 0);
  CHECK(labels.twoHopCount[0] == 10);
  CHECK(labels.twoHopCount[3] == 10);

  // Twelve-vertex clique: every vertex sees 11 others within two hops.
  std::vector<std::pair<VertexId, VertexId>> clique;
  for (VertexId i = 0; i < 12; ++i)
    for (VertexId j = i + 1; j < 12; ++j) clique.emplace_back(i, j);
  const auto k = from_list(12, clique);
  const auto kl = classify_deep(k);
  CHECK(kl.deep_count() == 12);
  CHECK(DeepOracle::lazy(k, 11.0).is_deep(0));
  CHECK_FALSE(DeepOracle::lazy(g, 11.0).is_deep(0));
  CHECK(DeepOracle::all(5).is_deep(4));
}

TEST_CASE("lazy deep oracle agrees with full labels") {
  const auto inst = random_instance(3000, 0.3, 55);
  const auto labels = classify_deep(inst.graph);
  const auto lazy = DeepOracle::lazy(inst.graph, 11.0);
  std::size_t bad = 0;
  for (VertexId v = 0; v < inst.graph.n(); ++v) {
    bad += (labels.isDeep[v] != 0) != lazy.is_deep(v);
    bad += (labels.isDeep[v] != 0) != (labels.twoHopCount[v] >= labels.threshold);
  }
  CHECK(bad == 0);
}

TEST_CASE("classification is invariant under relabeling") {
  const auto inst = random_instance(1500, 0.3, 77);
  const auto n = inst.graph.n();
  std::vector<VertexId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(1);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto edges = inst.graph.edges();
  for (auto& [a, b] : edges) {
    a = perm[a];
    b = perm[b];
    if (a > b) std::swap(a, b);
  }
  const auto h = GraphInstance::from_edges(inst.graph.domain(), inst.graph.params(), n, edges);
  const auto x = classify_deep(inst.graph), y = classify_deep(h);
  std::size_t bad = 0;
  for (VertexId v = 0; v < n; ++v) bad += x.twoHopCount[v] != y.twoHopCount[perm[v]];
  CHECK(bad == 0);
}

TEST_CASE("deep vertices stay away from the boundary") {
  // Interior vertices are deep and deep vertices avoid a strip of width r.
  const auto inst = random_instance(10000, 0.3, 5);
  const double r = inst.graph.r(), side = inst.graph.domain().side();
  const auto labels = classify_deep(inst.graph);
  std::size_t interior_shallow = 0, deep_near_edge = 0;
  for (VertexId v = 0; v < inst.graph.n(); ++v) {
    const auto p = inst.truth.positions[v];
    const bool inner = p[0] >= 2 * r && p[0] <= side - 2 * r && p[1] >= 2 * r && p[1] <= side - 2 * r;
    const bool band = p[0] >= r && p[0] <= side - r && p[1] >= r && p[1] <= side - r;
    interior_shallow += inner && !labels.isDeep[v];
    deep_near_edge += labels.isDeep[v] && !band;
  }
  CHECK(interior_shallow == 0);
  CHECK(deep_near_edge == 0);
}

TEST_CASE("greedy paths") {
  const auto inst = random_instance(10000, 0.3, 8);
  const auto& g = inst.graph;
  CHECK(greedy_path(g, inst.truth, 5, 5).path == std::vector<VertexId>{5});
  CHECK(greedy_path(g, inst.truth, 5, 5).reached);
  const VertexId nb = g.neighbors(5).front();
  CHECK(greedy_path(g, inst.truth, 5, nb).path == std::vector<VertexId>{5, nb});

  const auto kappa = KappaParams::for_graph(g, ConstantsLedger{}.kappaC3);
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(g.n() - 1));
  int good = 0;
  for (int i = 0; i < 100; ++i) {
    const VertexId u = pick(rng), v = pick(rng);
    const auto gp = greedy_path(g, inst.truth, u, v);
    const double d = oracle::distance(inst.truth.positions[u], inst.truth.positions[v], g.domain());
    const double hops = static_cast<double>(gp.path.size() - 1);
    good += gp.reached && hops <= guarded_ceil((d + kappa(d)) / g.r());
  }
  CHECK(good >= 99);
}

TEST_CASE("hop count never undercuts the distance over r") {
  for (double alpha : {0.25, 0.3, 0.35}) {
    const auto inst = random_instance(4000, alpha, 600);
    const double r = inst.graph.r();
    std::size_t bad = 0, checked = 0;
    for (VertexId s = 0; s < 20; ++s) {
      const auto row = bfs(inst.graph, s * 97);
      for (VertexId v = 0; v < inst.graph.n(); ++v) {
        if (!row.reachable(v)) continue;
        const double d = oracle::distance(inst.truth.positions[s * 97], inst.truth.positions[v], inst.graph.domain());
        ++checked;
        bad += guarded_ceil(d / r) > row.dist[v];
      }
    }
    CHECK(checked > 0);
    CHECK(bad == 0);
  }
}
