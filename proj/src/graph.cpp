#include "rggrecon/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "rggrecon/parallel.hpp"

namespace rgg {

std::uint32_t BfsDistances::eccentricity() const {
  std::uint32_t e = 0;
  for (auto d : dist)
    if (d != kUnreachable) e = std::max(e, d);
  return e;
}

namespace {

/// Level-synchronous BFS over the bit matrix. `unvisited` holds one bit per
/// vertex; only words that still have unvisited bits are scanned.
void bfs_dense(const AdjacencyMatrix& m, std::vector<std::uint32_t>& dist, std::vector<VertexId> frontier,
               std::uint32_t max_depth) {
  const std::size_t n = m.size(), words = m.words_per_row();
  std::vector<std::uint64_t> unvisited(words, ~std::uint64_t{0});
  if (n % 64) unvisited[words - 1] = (std::uint64_t{1} << (n % 64)) - 1;
  for (VertexId s : frontier) unvisited[s >> 6] &= ~(std::uint64_t{1} << (s & 63));
  std::vector<std::uint32_t> live;
  for (std::uint32_t w = 0; w < words; ++w)
    if (unvisited[w]) live.push_back(w);

  std::vector<VertexId> next;
  for (std::uint32_t level = 1; !frontier.empty() && level <= max_depth && !live.empty(); ++level) {
    next.clear();
    for (VertexId u : frontier) {
      const std::uint64_t* row = m.row(u).data();
      for (std::uint32_t w : live) {
        std::uint64_t x = row[w] & unvisited[w];
        if (!x) continue;
        unvisited[w] &= ~x;
        while (x) {
          const auto v = static_cast<VertexId>(w * 64 + static_cast<std::uint32_t>(std::countr_zero(x)));
          dist[v] = level;
          next.push_back(v);
          x &= x - 1;
        }
      }
      // Drop exhausted words occasionally so later rows scan less.
      if (next.size() > 64) {
        std::erase_if(live, [&](std::uint32_t w) { return unvisited[w] == 0; });
        if (live.empty()) break;
      }
    }
    std::erase_if(live, [&](std::uint32_t w) { return unvisited[w] == 0; });
    frontier.swap(next);
  }
}

void bfs_lists(const NeighborLists& l, std::vector<std::uint32_t>& dist, std::vector<VertexId> queue,
               std::uint32_t max_depth) {
  std::size_t head = 0;
  while (head < queue.size()) {
    const VertexId u = queue[head++];
    const std::uint32_t du = dist[u];
    if (du >= max_depth) continue;
    for (VertexId v : l.neighbors(u)) {
      if (dist[v] == kUnreachable) {
        dist[v] = du + 1;
        queue.push_back(v);
      }
    }
  }
}

void run_bfs(const GraphInstance& g, std::vector<std::uint32_t>& dist, std::vector<VertexId> sources,
             std::uint32_t max_depth) {
  for (VertexId s : sources) {
    if (s >= g.n()) throw Error(ErrorKind::Parameter, "BFS source out of range");
    dist[s] = 0;
  }
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  if (g.is_matrix()) bfs_dense(g.matrix(), dist, std::move(sources), max_depth);
  else bfs_lists(g.lists(), dist, std::move(sources), max_depth);
}

}  // namespace

BfsDistances bfs(const GraphInstance& g, VertexId source, std::uint32_t max_depth) {
  BfsDistances out{source, std::vector<std::uint32_t>(g.n(), kUnreachable)};
  run_bfs(g, out.dist, {source}, max_depth);
  return out;
}

std::vector<std::uint32_t> bfs_multi(const GraphInstance& g, std::span<const VertexId> sources) {
  std::vector<std::uint32_t> dist(g.n(), kUnreachable);
  run_bfs(g, dist, {sources.begin(), sources.end()}, kUnreachable);
  return dist;
}

std::uint32_t common_neighbors(const GraphInstance& g, VertexId v, VertexId w) {
  if (v == w) throw Error(ErrorKind::Parameter, "common_neighbors needs two distinct vertices");
  if (g.is_matrix()) {
    const auto a = g.matrix().row(v), b = g.matrix().row(w);
    std::uint32_t c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += static_cast<std::uint32_t>(std::popcount(a[i] & b[i]));
    return c;
  }
  const auto a = g.lists().neighbors(v), b = g.lists().neighbors(w);
  std::uint32_t c = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else {
      ++c;
      ++i;
      ++j;
    }
  }
  return c;
}

std::uint32_t exclusive_neighbors(const GraphInstance& g, VertexId v, VertexId w) {
  if (v == w) throw Error(ErrorKind::Parameter, "exclusive_neighbors needs two distinct vertices");
  return g.degree(v) - common_neighbors(g, v, w);
}

namespace {

struct MarkScratch {
  std::vector<std::uint32_t> stamp;
  std::uint32_t epoch = 0;

  void prepare(std::size_t n) {
    if (stamp.size() != n) {
      stamp.assign(n, 0);
      epoch = 0;
    }
    if (++epoch == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      epoch = 1;
    }
  }
  bool mark(VertexId v) {
    if (stamp[v] == epoch) return false;
    stamp[v] = epoch;
    return true;
  }
};

MarkScratch& mark_scratch() {
  thread_local MarkScratch s;
  return s;
}

std::vector<VertexId> shuffled_neighbors(const GraphInstance& g, VertexId v) {
  auto nb = g.neighbors(v);
  auto rng = SplitMix64::stream(0x7477686F70ull, v);
  for (std::size_t i = nb.size(); i > 1; --i) std::swap(nb[i - 1], nb[rng() % i]);
  return nb;
}

}  // namespace

std::uint32_t two_hop_count(const GraphInstance& g, VertexId v, std::uint32_t stop_at) {
  const bool early = stop_at != std::numeric_limits<std::uint32_t>::max();
  if (g.degree(v) == 0) return 0;
  // A random neighbor order reaches the threshold after a small fraction of
  // the rows when the vertex is deep.
  const auto nb = early ? shuffled_neighbors(g, v) : g.neighbors(v);

  if (g.is_matrix()) {
    const auto& m = g.matrix();
    const std::size_t words = m.words_per_row();
    thread_local std::vector<std::uint64_t> acc;
    acc.assign(m.row(v).begin(), m.row(v).end());
    auto count = [&] {
      std::uint32_t c = 0;
      for (auto x : acc) c += static_cast<std::uint32_t>(std::popcount(x));
      // v itself is set through any neighbor's row.
      return c - static_cast<std::uint32_t>((acc[v >> 6] >> (v & 63)) & 1u);
    };
    std::size_t since_check = 0, check_every = 16;
    for (VertexId u : nb) {
      const std::uint64_t* row = m.row(u).data();
      for (std::size_t w = 0; w < words; ++w) acc[w] |= row[w];
      if (early && ++since_check == check_every) {
        since_check = 0;
        check_every = std::min<std::size_t>(check_every * 2, 256);
        if (count() >= stop_at) return count();
      }
    }
    return count();
  }

  const auto& l = g.lists();
  auto& s = mark_scratch();
  s.prepare(g.n());
  s.mark(v);
  std::uint32_t c = 0;
  for (VertexId u : nb)
    if (s.mark(u)) ++c;
  for (VertexId u : nb) {
    for (VertexId x : l.neighbors(u))
      if (s.mark(x)) ++c;
    if (early && c >= stop_at) return c;
  }
  return c;
}

std::vector<VertexId> two_hop_ball(const GraphInstance& g, VertexId v, std::vector<std::uint8_t>* hops) {
  std::vector<VertexId> first = g.neighbors(v);
  std::vector<VertexId> second;
  if (g.is_matrix()) {
    const auto& m = g.matrix();
    std::vector<std::uint64_t> acc(m.words_per_row(), 0);
    for (VertexId u : first) {
      const auto row = m.row(u);
      for (std::size_t w = 0; w < acc.size(); ++w) acc[w] |= row[w];
    }
    const auto own = m.row(v);
    for (std::size_t w = 0; w < acc.size(); ++w) acc[w] &= ~own[w];
    acc[v >> 6] &= ~(std::uint64_t{1} << (v & 63));
    for (std::size_t w = 0; w < acc.size(); ++w)
      for (std::uint64_t x = acc[w]; x; x &= x - 1)
        second.push_back(static_cast<VertexId>(w * 64 + static_cast<std::size_t>(std::countr_zero(x))));
  } else {
    auto& s = mark_scratch();
    s.prepare(g.n());
    s.mark(v);
    for (VertexId u : first) s.mark(u);
    for (VertexId u : first)
      for (VertexId x : g.lists().neighbors(u))
        if (s.mark(x)) second.push_back(x);
    std::sort(second.begin(), second.end());
  }
  std::vector<VertexId> out;
  out.reserve(1 + first.size() + second.size());
  out.push_back(v);
  out.insert(out.end(), first.begin(), first.end());
  out.insert(out.end(), second.begin(), second.end());
  if (hops) {
    hops->assign(out.size(), 2);
    (*hops)[0] = 0;
    std::fill(hops->begin() + 1, hops->begin() + 1 + static_cast<std::ptrdiff_t>(first.size()), 1);
  }
  return out;
}

std::size_t DeepLabels::deep_count() const {
  return static_cast<std::size_t>(std::count(isDeep.begin(), isDeep.end(), 1));
}

double deep_threshold(double deep_factor, double r, int m) {
  if (m == 2) return deep_factor * r * r;
  return deep_factor / (4.0 * std::numbers::pi) * ball_volume(2.0 * r, m);
}

std::uint32_t deep_threshold_count(double deep_factor, double r, int m) {
  const double t = std::ceil(deep_threshold(deep_factor, r, m));
  if (t >= static_cast<double>(std::numeric_limits<std::uint32_t>::max()))
    return std::numeric_limits<std::uint32_t>::max();
  return static_cast<std::uint32_t>(std::max(0.0, t));
}

DeepLabels classify_deep(const GraphInstance& g, double deep_factor) {
  DeepLabels out;
  out.threshold = deep_threshold(deep_factor, g.r(), g.domain().m);
  out.isDeep.assign(g.n(), 0);
  out.twoHopCount.assign(g.n(), 0);
  parallel_for(g.n(), [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t v = begin; v < end; ++v) {
      const auto c = two_hop_count(g, static_cast<VertexId>(v));
      out.twoHopCount[v] = c;
      out.isDeep[v] = static_cast<double>(c) >= out.threshold ? 1 : 0;
    }
  }, 64);
  return out;
}

DeepOracle DeepOracle::lazy(const GraphInstance& g, double deep_factor) {
  return lazy_count(g, deep_threshold_count(deep_factor, g.r(), g.domain().m));
}

DeepOracle DeepOracle::lazy_count(const GraphInstance& g, std::uint32_t threshold) {
  DeepOracle o;
  o.mode_ = Mode::Lazy;
  o.graph_ = &g;
  o.n_ = g.n();
  o.threshold_ = threshold;
  o.memo_ = std::shared_ptr<std::atomic<std::uint8_t>[]>(new std::atomic<std::uint8_t>[o.n_]);
  for (std::size_t i = 0; i < o.n_; ++i) o.memo_[i].store(0, std::memory_order_relaxed);
  return o;
}

DeepOracle DeepOracle::from_labels(DeepLabels labels) {
  DeepOracle o;
  o.mode_ = Mode::Labels;
  o.n_ = labels.isDeep.size();
  o.labels_ = std::make_shared<const DeepLabels>(std::move(labels));
  return o;
}

DeepOracle DeepOracle::all(std::size_t n) {
  DeepOracle o;
  o.mode_ = Mode::All;
  o.n_ = n;
  return o;
}

bool DeepOracle::is_deep(VertexId v) const {
  if (v >= n_) throw Error(ErrorKind::Parameter, "vertex out of range");
  switch (mode_) {
    case Mode::All: return true;
    case Mode::Labels: return labels_->isDeep[v] != 0;
    case Mode::Lazy: {
      const auto cached = memo_[v].load(std::memory_order_relaxed);
      if (cached) return cached == 2;
      // No vertex can have more than n - 1 others within two hops.
      const bool deep = threshold_ < graph_->n() && two_hop_count(*graph_, v, threshold_) >= threshold_;
      memo_[v].store(deep ? 2 : 1, std::memory_order_relaxed);
      return deep;
    }
  }
  return false;
}

GreedyPath greedy_path(const GraphInstance& g, const GroundTruth& truth, VertexId u, VertexId v) {
  if (truth.size() != g.n()) throw Error(ErrorKind::LengthMismatch, "ground truth size differs from graph");
  GreedyPath out;
  out.path.push_back(u);
  VertexId x = u;
  const auto target = truth.positions[v];
  double dx = geodesic_distance(truth.positions[x], target, g.domain());
  while (x != v) {
    VertexId best = x;
    double best_d = dx;
    // Neighbors arrive in ascending id order, so a strict comparison keeps the lowest id on ties.
    g.for_each_neighbor(x, [&](VertexId y) {
      const double d = geodesic_distance(truth.positions[y], target, g.domain());
      if (d < best_d) {
        best = y;
        best_d = d;
      }
    });
    if (best == x) return out;
    x = best;
    dx = best_d;
    out.path.push_back(x);
  }
  out.reached = true;
  return out;
}

}  // namespace rgg
