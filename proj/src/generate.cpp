#include "rggrecon/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rggrecon/parallel.hpp"

namespace rgg {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kCountStream = ~std::uint64_t{0};

}  // namespace

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t k) {
  return SplitMix64(mix64(seed ^ mix64(k * kGolden + 0x632BE59BD9B4E019ull)));
}

SplitMix64::result_type SplitMix64::operator()() {
  state_ += kGolden;
  return mix64(state_);
}

double SplitMix64::uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

void PointSet::push_back(std::span<const double> p) {
  if (p.size() != static_cast<std::size_t>(dim)) throw Error(ErrorKind::Parameter, "point dimension mismatch");
  coords.insert(coords.end(), p.begin(), p.end());
}

void GroundTruth::validate() const {
  if (positions.dim != domain.ambient_dim())
    throw Error(ErrorKind::Domain, "position dimension does not match the domain");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto p = positions[i];
    if (domain.flat()) {
      const double side = domain.side();
      for (double c : p)
        if (!(c >= 0.0 && c <= side))
          throw Error(ErrorKind::Domain, "position " + std::to_string(i) + " lies outside the domain");
    } else {
      const double norm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      if (!(std::abs(norm - 1.0) <= 1e-12))
        throw Error(ErrorKind::Domain, "position " + std::to_string(i) + " is not a unit vector");
    }
  }
}

GroundTruth sample_positions(const DomainSpec& domain, const ModelParams& model, std::uint64_t seed) {
  domain.validate();
  std::int64_t count = domain.n;
  if (model.process == PointProcess::Poisson) {
    auto g = SplitMix64::stream(seed, kCountStream);
    std::poisson_distribution<std::int64_t> pois(static_cast<double>(domain.n));
    count = pois(g);
  }
  GroundTruth truth{domain, PointSet(domain.ambient_dim(), static_cast<std::size_t>(count))};
  const bool flat = domain.flat();
  const double side = flat ? domain.side() : 0.0;
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) {
      auto g = SplitMix64::stream(seed, i);
      auto p = truth.positions[i];
      if (flat) {
        for (double& c : p) c = g.uniform01() * side;
        continue;
      }
      std::normal_distribution<double> normal;
      double norm = 0.0;
      do {
        for (double& c : p) c = normal(g);
        norm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      } while (norm < 1e-150);
      for (double& c : p) c /= norm;
    }
  });
  return truth;
}

// ---------------------------------------------------------------------------

NeighborLists::NeighborLists(std::vector<std::uint64_t> offsets, std::vector<VertexId> targets)
    : offsets_(std::move(offsets)), targets_(std::move(targets)) {
  if (offsets_.empty()) offsets_.push_back(0);
  if (offsets_.back() != targets_.size()) throw Error(ErrorKind::Format, "CSR offsets do not match targets");
}

bool NeighborLists::adjacent(VertexId u, VertexId v) const {
  const auto nb = neighbors(degree(u) <= degree(v) ? u : v);
  return std::binary_search(nb.begin(), nb.end(), degree(u) <= degree(v) ? v : u);
}

AdjacencyMatrix::AdjacencyMatrix(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

GraphInstance::GraphInstance(DomainSpec domain, ModelParams params, Storage storage)
    : domain_(domain), params_(std::move(params)), storage_(std::move(storage)) {
  if (const auto* l = std::get_if<NeighborLists>(&storage_)) {
    degrees_.resize(l->size());
    for (std::size_t v = 0; v < l->size(); ++v) degrees_[v] = l->degree(static_cast<VertexId>(v));
  } else {
    const auto& m = std::get<AdjacencyMatrix>(storage_);
    degrees_.resize(m.size());
    for (std::size_t v = 0; v < m.size(); ++v) {
      std::uint32_t d = 0;
      for (auto w : m.row(static_cast<VertexId>(v))) d += static_cast<std::uint32_t>(std::popcount(w));
      degrees_[v] = d;
    }
  }
  std::uint64_t arcs = 0;
  for (auto d : degrees_) arcs += d;
  edges_ = arcs / 2;
}

std::size_t GraphInstance::memory_bytes() const {
  return std::visit([](const auto& s) { return s.memory_bytes(); }, storage_) + degrees_.size() * 4;
}

std::vector<VertexId> GraphInstance::neighbors(VertexId v) const {
  if (!is_matrix()) {
    auto nb = lists().neighbors(v);
    return {nb.begin(), nb.end()};
  }
  std::vector<VertexId> out;
  out.reserve(degrees_[v]);
  matrix().for_each_in_row(v, [&](VertexId w) { out.push_back(w); });
  return out;
}

std::vector<std::pair<VertexId, VertexId>> GraphInstance::edges() const {
  std::vector<std::pair<VertexId, VertexId>> out;
  out.reserve(edges_);
  for (VertexId v = 0; v < n(); ++v)
    for_each_neighbor(v, [&](VertexId w) {
      if (v < w) out.emplace_back(v, w);
    });
  return out;
}

namespace {

AdjacencyLayout choose_layout(AdjacencyLayout requested, std::size_t n, double expected_edges) {
  if (requested != AdjacencyLayout::Auto) return requested;
  const double csr = 8.0 * static_cast<double>(n) + 8.0 * expected_edges;
  const double dense = static_cast<double>(n) * 8.0 * static_cast<double>((n + 63) / 64);
  return dense < csr ? AdjacencyLayout::Matrix : AdjacencyLayout::Lists;
}

}  // namespace

GraphInstance GraphInstance::from_edges(const DomainSpec& domain, const ModelParams& params, std::size_t n,
                                        const std::vector<std::pair<VertexId, VertexId>>& edges,
                                        AdjacencyLayout layout) {
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n) throw Error(ErrorKind::Format, "edge endpoint out of range");
    if (a == b) throw Error(ErrorKind::Format, "self-loop in edge list");
  }
  if (choose_layout(layout, n, static_cast<double>(edges.size())) == AdjacencyLayout::Matrix) {
    AdjacencyMatrix m(n);
    for (const auto& [a, b] : edges) {
      if (m.adjacent(a, b)) throw Error(ErrorKind::Format, "duplicate edge in edge list");
      m.set(a, b);
      m.set(b, a);
    }
    return GraphInstance(domain, params, std::move(m));
  }
  std::vector<std::uint64_t> offsets(n + 1, 0);
  for (const auto& [a, b] : edges) {
    ++offsets[a + 1];
    ++offsets[b + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  std::vector<VertexId> targets(offsets[n]);
  std::vector<std::uint64_t> fill(offsets.begin(), offsets.end() - 1);
  for (const auto& [a, b] : edges) {
    targets[fill[a]++] = b;
    targets[fill[b]++] = a;
  }
  for (std::size_t v = 0; v < n; ++v) {
    auto first = targets.begin() + static_cast<std::ptrdiff_t>(offsets[v]);
    auto last = targets.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]);
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last) throw Error(ErrorKind::Format, "duplicate edge in edge list");
  }
  return GraphInstance(domain, params, NeighborLists(std::move(offsets), std::move(targets)));
}

double expected_edge_count(const DomainSpec& domain, double r) {
  const double n = static_cast<double>(domain.n);
  if (!domain.flat()) {
    const double R = domain.sphere_radius();
    return 0.5 * n * 2.0 * std::numbers::pi * R * R * (1.0 - std::cos(std::min(r / R, std::numbers::pi)));
  }
  const double m = domain.m;
  const double ball = std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0 + 1.0) * std::pow(r, m);
  return 0.5 * n * std::min(ball, n);
}

namespace {

/// Uniform grid over a box [lo, lo + extent]^dim with k cells per axis.
struct CellGrid {
  int dim = 2;
  std::int64_t k = 1;
  double lo = 0.0;
  double cell = 1.0;
  std::vector<std::uint64_t> start;  // size cells + 1
  std::vector<VertexId> order;
  std::vector<std::vector<int>> offsets;

  CellGrid(const PointSet& pts, double lower, double extent, double min_cell, std::size_t max_cells) {
    dim = pts.dim;
    lo = lower;
    k = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(extent / min_cell)));
    while (k > 1 && std::pow(static_cast<double>(k), dim) > static_cast<double>(max_cells)) --k;
    cell = extent / static_cast<double>(k);
    std::size_t cells = 1;
    for (int a = 0; a < dim; ++a) cells *= static_cast<std::size_t>(k);

    const std::size_t n = pts.size();
    std::vector<std::uint64_t> idx(n);
    start.assign(cells + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      idx[i] = index_of(pts[i]);
      ++start[idx[i] + 1];
    }
    for (std::size_t c = 0; c < cells; ++c) start[c + 1] += start[c];
    order.resize(n);
    std::vector<std::uint64_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) order[fill[idx[i]]++] = static_cast<VertexId>(i);

    std::vector<int> off(static_cast<std::size_t>(dim), -1);
    for (;;) {
      offsets.push_back(off);
      int a = 0;
      while (a < dim && off[static_cast<std::size_t>(a)] == 1) off[static_cast<std::size_t>(a++)] = -1;
      if (a == dim) break;
      ++off[static_cast<std::size_t>(a)];
    }
  }

  // Points on a cell boundary go to the lower-index cell.
  std::int64_t axis_cell(double x) const {
    const auto c = static_cast<std::int64_t>(std::ceil((x - lo) / cell)) - 1;
    return std::clamp<std::int64_t>(c, 0, k - 1);
  }

  std::uint64_t index_of(std::span<const double> p) const {
    std::uint64_t id = 0;
    for (int a = dim - 1; a >= 0; --a)
      id = id * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(axis_cell(p[static_cast<std::size_t>(a)]));
    return id;
  }

  template <class F>
  void for_each_candidate(std::span<const double> p, F&& f) const {
    std::int64_t base[8];
    for (int a = 0; a < dim; ++a) base[a] = axis_cell(p[static_cast<std::size_t>(a)]);
    // With fewer than three cells per axis, distinct offsets can name the same cell.
    const bool dedupe = k < 3;
    std::vector<std::uint64_t> seen;
    for (const auto& off : offsets) {
      std::uint64_t id = 0;
      bool ok = true;
      for (int a = dim - 1; a >= 0; --a) {
        const std::int64_t c = base[a] + off[static_cast<std::size_t>(a)];
        if (c < 0 || c >= k) {
          ok = false;
          break;
        }
        id = id * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(c);
      }
      if (!ok) continue;
      if (dedupe) {
        if (std::find(seen.begin(), seen.end(), id) != seen.end()) continue;
        seen.push_back(id);
      }
      for (std::uint64_t t = start[id]; t < start[id + 1]; ++t) f(order[t]);
    }
  }
};

}  // namespace

GraphInstance build_adjacency(const GroundTruth& truth, const ModelParams& params, AdjacencyLayout layout) {
  const DomainSpec& domain = truth.domain;
  params.validate(domain);
  const PointSet& pts = truth.positions;
  const std::size_t n = pts.size();
  const double r = params.r;
  if (n > std::numeric_limits<VertexId>::max()) throw Error(ErrorKind::Parameter, "too many vertices");
  if (domain.m > 8) throw Error(ErrorKind::Parameter, "dimension above 8 is unsupported");

  const std::size_t max_cells = 4 * n + 16;
  const CellGrid grid = domain.flat()
                            ? CellGrid(pts, 0.0, domain.side(), r, max_cells)
                            : CellGrid(pts, -1.0, 2.0, 2.0 * std::sin(r / (2.0 * domain.sphere_radius())), max_cells);

  auto for_each_neighbor = [&](std::size_t i, auto&& f) {
    const auto p = pts[i];
    grid.for_each_candidate(p, [&](VertexId j) {
      if (j != i && geodesic_distance(p, pts[j], domain) < r) f(j);
    });
  };

  const double expected = std::min(expected_edge_count(domain, r), 0.5 * static_cast<double>(n) * static_cast<double>(n));
  if (choose_layout(layout, n, expected) == AdjacencyLayout::Matrix) {
    AdjacencyMatrix m(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end, unsigned) {
      for (std::size_t i = begin; i < end; ++i)
        for_each_neighbor(i, [&](VertexId j) { m.set(static_cast<VertexId>(i), j); });
    }, 256);
    return GraphInstance(domain, params, std::move(m));
  }

  std::vector<std::uint64_t> offsets(n + 1, 0);
  parallel_for(n, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) {
      std::uint64_t d = 0;
      for_each_neighbor(i, [&](VertexId) { ++d; });
      offsets[i + 1] = d;
    }
  }, 256);
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  std::vector<VertexId> targets(offsets[n]);
  parallel_for(n, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) {
      std::uint64_t pos = offsets[i];
      for_each_neighbor(i, [&](VertexId j) { targets[pos++] = j; });
      std::sort(targets.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                targets.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
    }
  }, 256);
  return GraphInstance(domain, params, NeighborLists(std::move(offsets), std::move(targets)));
}

}  // namespace rgg
