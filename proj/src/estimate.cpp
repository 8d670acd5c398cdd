#include "rggrecon/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "rggrecon/parallel.hpp"

namespace rgg {

std::string_view to_string(DistanceEstimate::Kind kind) {
  switch (kind) {
    case DistanceEstimate::Kind::ShortLune: return "short_lune";
    case DistanceEstimate::Kind::ShortLens: return "short_lens";
    case DistanceEstimate::Kind::LongGraph: return "long_graph";
    case DistanceEstimate::Kind::Hybrid: return "hybrid";
  }
  return "unknown";
}

double log_n(const GraphInstance& g) { return std::log(static_cast<double>(g.domain().n)); }

KappaParams KappaParams::for_graph(const GraphInstance& g, double c3) { return {c3, g.r(), log_n(g)}; }

double KappaParams::operator()(double d) const {
  return c3 * r * (d / std::pow(r, 7.0 / 3.0) + logn / std::pow(r, 4.0 / 3.0));
}

bool envelopes_vacuous(double r, double logn) { return r <= 100.0 * std::sqrt(logn); }

double short_range_profile(double x, double r, double logn) {
  if (!(x >= 0.0 && x <= 2.0 * r)) throw Error(ErrorKind::Domain, "profile argument must lie in [0, 2r]");
  const double b1 = logn / r;
  const double b3 = 2.0 * r - std::pow(logn, 2.0 / 3.0) / std::cbrt(r);
  if (x <= b1) return std::sqrt(logn) / r;
  if (x <= r) return std::sqrt(x / r);
  if (x <= b3) return std::pow((2.0 * r - x) / r, 0.25);
  return std::pow(logn, 1.0 / 6.0) / std::cbrt(r);
}

double lune_estimate(std::uint32_t exclusive, double r, int m) {
  return lune_volume_inverse(std::min(static_cast<double>(exclusive), lune_volume(r, r, m)), r, m);
}

double lens_estimate(std::uint32_t common, double r, int m) {
  const double full = m == 2 ? std::numbers::pi * r * r : ball_volume(r, m);
  return lune_volume_inverse(std::max(lune_volume(r, r, m), full - static_cast<double>(common)), r, m);
}

namespace {

void require_deep(const DeepOracle& deep, VertexId v) {
  if (!deep.is_deep(v)) throw Error(ErrorKind::DeepRequired, "vertex " + std::to_string(v) + " is not deep");
}

void require_distinct(const GraphInstance& g, VertexId v, VertexId w) {
  if (v >= g.n() || w >= g.n()) throw Error(ErrorKind::Parameter, "vertex out of range");
  if (v == w) throw Error(ErrorKind::WrongRange, "short-range estimate needs two distinct vertices");
}

}  // namespace

DistanceEstimate short_range_adjacent(const GraphInstance& g, const DeepOracle& deep, VertexId v, VertexId w) {
  require_distinct(g, v, w);
  require_deep(deep, v);
  if (!g.adjacent(v, w)) throw Error(ErrorKind::WrongRange, "vertices are not adjacent");
  const double r = g.r(), ln = log_n(g);
  DistanceEstimate e;
  e.kind = DistanceEstimate::Kind::ShortLune;
  e.value = lune_estimate(exclusive_neighbors(g, v, w), r, g.domain().m);
  e.envelope = 100.0 * std::max(ln / r, std::sqrt(e.value * ln / r));
  e.vacuous = envelopes_vacuous(r, ln);
  e.witness = w;
  return e;
}

DistanceEstimate short_range_two_apart(const GraphInstance& g, const DeepOracle& deep, VertexId v, VertexId w) {
  require_distinct(g, v, w);
  require_deep(deep, v);
  if (g.adjacent(v, w)) throw Error(ErrorKind::WrongRange, "vertices are adjacent, not two apart");
  const auto common = common_neighbors(g, v, w);
  if (common == 0) throw Error(ErrorKind::WrongRange, "vertices are more than two hops apart");
  const double r = g.r(), ln = log_n(g);
  DistanceEstimate e;
  e.kind = DistanceEstimate::Kind::ShortLens;
  e.value = lens_estimate(common, r, g.domain().m);
  e.envelope = 100.0 * std::max(std::pow(ln, 2.0 / 3.0) / std::cbrt(r),
                                std::pow(std::max(0.0, 2.0 * r - e.value) / r, 0.25) * std::sqrt(ln));
  e.vacuous = envelopes_vacuous(r, ln);
  e.witness = w;
  return e;
}

DistanceEstimate short_range(const GraphInstance& g, const DeepOracle& deep, VertexId v, VertexId w) {
  require_distinct(g, v, w);
  DistanceEstimate e = g.adjacent(v, w) ? short_range_adjacent(g, deep, v, w) : short_range_two_apart(g, deep, v, w);
  const double ln = log_n(g);
  e.envelope = 100.0 * short_range_profile(e.value, g.r(), ln) * std::sqrt(ln);
  return e;
}

LongRangeBounds long_range_from_hops(std::uint32_t hops, const KappaParams& kappa) {
  if (hops == kUnreachable) throw Error(ErrorKind::NoPath, "vertices are not connected");
  LongRangeBounds b;
  b.upper = kappa.r * static_cast<double>(hops);
  b.lower = hops == 0 ? 0.0 : std::max(0.0, b.upper - (kappa.r + kappa(b.upper)));
  return b;
}

LongRangeBounds long_range(const GraphInstance& g, VertexId u, VertexId v, const KappaParams& kappa) {
  if (u >= g.n() || v >= g.n()) throw Error(ErrorKind::Parameter, "vertex out of range");
  if (u == v) return {};
  return long_range_from_hops(bfs(g, u).dist[v], kappa);
}

namespace {

/// Short-range leg d-tilde(w, v) + C2 sqrt(log n) for every w in v's two-hop ball.
struct Seeds {
  std::vector<VertexId> ids;
  std::vector<double> leg;
};

Seeds short_range_seeds(const GraphInstance& g, VertexId v, const ConstantsLedger& ledger, bool include_self) {
  std::vector<std::uint8_t> hops;
  Seeds s;
  s.ids = two_hop_ball(g, v, &hops);
  s.leg.resize(s.ids.size());
  const double r = g.r(), bonus = ledger.shortRangeC2 * std::sqrt(log_n(g));
  const int m = g.domain().m;
  parallel_for(s.ids.size(), [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) {
      const VertexId w = s.ids[i];
      double d = 0.0;
      if (hops[i] == 1) d = lune_estimate(exclusive_neighbors(g, v, w), r, m);
      else if (hops[i] == 2) d = lens_estimate(common_neighbors(g, v, w), r, m);
      s.leg[i] = d + bonus;
    }
  }, 256);
  if (!include_self) {
    s.ids.erase(s.ids.begin());
    s.leg.erase(s.leg.begin());
  }
  return s;
}

}  // namespace

DistanceEstimate hybrid(const GraphInstance& g, const DeepOracle& deep, VertexId u, VertexId v,
                        const KappaParams& kappa, const ConstantsLedger& ledger, HybridOptions options) {
  if (u >= g.n() || v >= g.n()) throw Error(ErrorKind::Parameter, "vertex out of range");
  if (u == v) throw Error(ErrorKind::Parameter, "hybrid estimate needs two distinct vertices");
  require_deep(deep, v);
  const auto seeds = short_range_seeds(g, v, ledger, options.include_self);
  const auto du = bfs(g, u);
  const double r = g.r();
  DistanceEstimate best;
  best.value = kInfinity;
  best.kind = DistanceEstimate::Kind::Hybrid;
  bool found = false;
  for (std::size_t i = 0; i < seeds.ids.size(); ++i) {
    const VertexId w = seeds.ids[i];
    if (!du.reachable(w)) continue;
    const double value = r * static_cast<double>(du.dist[w]) + seeds.leg[i];
    if (!found || value < best.value || (value == best.value && w < best.witness)) {
      best.value = value;
      best.witness = w;
      found = true;
    }
  }
  if (!found) throw Error(ErrorKind::NoPath, "no vertex within two hops of the target is reachable");
  const double ln = log_n(g);
  best.envelope = kappa(best.value) + ledger.shortRangeC4 * std::sqrt(ln);
  best.vacuous = envelopes_vacuous(r, ln);
  return best;
}

double HybridField::envelope(VertexId u) const {
  if (!std::isfinite(value[u])) return kInfinity;
  const KappaParams kappa{kappa_c3, r, logn};
  return kappa(value[u]) + c4_term;
}

DistanceEstimate HybridField::at(VertexId u) const {
  DistanceEstimate e;
  e.kind = DistanceEstimate::Kind::Hybrid;
  e.value = value[u];
  e.envelope = envelope(u);
  e.vacuous = envelopes_vacuous(r, logn);
  e.witness = witness[u];
  return e;
}

HybridField hybrid_field(const GraphInstance& g, const DeepOracle& deep, VertexId v, const KappaParams& kappa,
                         const ConstantsLedger& ledger, HybridOptions options) {
  if (v >= g.n()) throw Error(ErrorKind::Parameter, "vertex out of range");
  require_deep(deep, v);
  const auto seeds = short_range_seeds(g, v, ledger, options.include_self);
  const std::size_t n = g.n();
  const double r = g.r();

  // Each vertex keeps (hops, seed index); its value is r * hops + leg[seed],
  // the same expression the per-pair estimator evaluates.
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> hops(n, kUnreachable), seed(n, kNone);
  auto value_of = [&](std::uint32_t h, std::uint32_t s) { return r * static_cast<double>(h) + seeds.leg[s]; };
  auto better = [&](double a, std::uint32_t sa, double b, std::uint32_t sb) {
    return a < b || (a == b && seeds.ids[sa] < seeds.ids[sb]);
  };

  struct Item {
    double value;
    VertexId witness;
    VertexId vertex;
    bool operator>(const Item& o) const {
      if (value != o.value) return value > o.value;
      if (witness != o.witness) return witness > o.witness;
      return vertex > o.vertex;
    }
  };
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::uint32_t s = 0; s < seeds.ids.size(); ++s) {
    const VertexId w = seeds.ids[s];
    hops[w] = 0;
    seed[w] = s;
    heap.push({seeds.leg[s], w, w});
  }
  std::vector<std::uint8_t> done(n, 0);
  while (!heap.empty()) {
    const Item top = heap.top();
    heap.pop();
    const VertexId x = top.vertex;
    if (done[x]) continue;
    done[x] = 1;
    const std::uint32_t hx = hops[x] + 1, sx = seed[x];
    const double cand = value_of(hx, sx);
    g.for_each_neighbor(x, [&](VertexId y) {
      if (done[y]) return;
      if (seed[y] == kNone || better(cand, sx, value_of(hops[y], seed[y]), seed[y])) {
        hops[y] = hx;
        seed[y] = sx;
        heap.push({cand, seeds.ids[sx], y});
      }
    });
  }

  HybridField f;
  f.target = v;
  f.value.assign(n, kInfinity);
  f.witness.assign(n, 0);
  for (std::size_t u = 0; u < n; ++u) {
    if (seed[u] == kNone) continue;
    f.value[u] = value_of(hops[u], seed[u]);
    f.witness[u] = seeds.ids[seed[u]];
  }
  f.kappa_c3 = kappa.c3;
  f.r = r;
  f.logn = log_n(g);
  f.c4_term = ledger.shortRangeC4 * std::sqrt(f.logn);
  return f;
}

DistanceEstimate min_estimate(const DistanceEstimate& a, const DistanceEstimate& b) {
  DistanceEstimate out = a.value <= b.value ? a : b;
  out.envelope = std::min(a.envelope, b.envelope);
  out.vacuous = a.vacuous && b.vacuous;
  return out;
}

}  // namespace rgg
