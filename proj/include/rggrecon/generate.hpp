#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "rggrecon/core.hpp"
#include "rggrecon/geometry.hpp"

namespace rgg {

/// SplitMix64 generator. `stream(seed, k)` derives independent streams so that
/// vertex k's coordinates do not depend on how many other vertices were drawn
/// or on which thread drew them.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t k);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

 private:
  std::uint64_t state_;
};

/// Flat coordinate storage: point i occupies coords[i*dim, (i+1)*dim).
struct PointSet {
  int dim = 2;
  std::vector<double> coords;

  PointSet() = default;
  PointSet(int d, std::size_t count) : dim(d), coords(count * static_cast<std::size_t>(d)) {}

  std::size_t size() const { return dim ? coords.size() / static_cast<std::size_t>(dim) : 0; }
  std::span<const double> operator[](std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  std::span<double> operator[](std::size_t i) {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  Point point(std::size_t i) const {
    auto s = (*this)[i];
    return {s.begin(), s.end()};
  }
  void push_back(std::span<const double> p);
};

struct GroundTruth {
  DomainSpec domain;
  PointSet positions;

  std::size_t size() const { return positions.size(); }
  /// Throws Domain if a position violates the domain invariant.
  void validate() const;
};

GroundTruth sample_positions(const DomainSpec& domain, const ModelParams& model, std::uint64_t seed);

/// Compressed sparse rows; every list sorted ascending and duplicate-free.
class NeighborLists {
 public:
  NeighborLists() = default;
  NeighborLists(std::vector<std::uint64_t> offsets, std::vector<VertexId> targets);

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const VertexId> neighbors(VertexId v) const {
    return {targets_.data() + offsets_[v], static_cast<std::size_t>(offsets_[v + 1] - offsets_[v])};
  }
  std::uint32_t degree(VertexId v) const { return static_cast<std::uint32_t>(offsets_[v + 1] - offsets_[v]); }
  bool adjacent(VertexId u, VertexId v) const;
  std::uint64_t arc_count() const { return targets_.size(); }
  std::size_t memory_bytes() const { return offsets_.size() * 8 + targets_.size() * 4; }

 private:
  std::vector<std::uint64_t> offsets_;
  std::vector<VertexId> targets_;
};

/// Dense bit matrix, one row of 64-bit words per vertex. Preferred when the
/// average degree is large compared to n/128.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(std::size_t n);

  std::size_t size() const { return n_; }
  std::size_t words_per_row() const { return words_; }
  std::span<const std::uint64_t> row(VertexId v) const { return {bits_.data() + v * words_, words_}; }
  bool adjacent(VertexId u, VertexId v) const { return (bits_[u * words_ + (v >> 6)] >> (v & 63)) & 1u; }
  void set(VertexId u, VertexId v) { bits_[u * words_ + (v >> 6)] |= std::uint64_t{1} << (v & 63); }
  std::size_t memory_bytes() const { return bits_.size() * 8; }

  template <class F>
  void for_each_in_row(VertexId v, F&& f) const {
    const std::uint64_t* r = bits_.data() + v * words_;
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t x = r[w];
      while (x) {
        f(static_cast<VertexId>(w * 64 + static_cast<std::size_t>(std::countr_zero(x))));
        x &= x - 1;
      }
    }
  }

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

enum class AdjacencyLayout { Auto, Lists, Matrix };

/// Topology of a geometric graph. Holds no positions.
class GraphInstance {
 public:
  using Storage = std::variant<NeighborLists, AdjacencyMatrix>;

  GraphInstance() = default;
  GraphInstance(DomainSpec domain, ModelParams params, Storage storage);

  /// Builds from an undirected edge list (any order, no self-loops or duplicates).
  static GraphInstance from_edges(const DomainSpec& domain, const ModelParams& params, std::size_t n,
                                  const std::vector<std::pair<VertexId, VertexId>>& edges,
                                  AdjacencyLayout layout = AdjacencyLayout::Auto);

  std::size_t n() const { return degrees_.size(); }
  double r() const { return params_.r; }
  const DomainSpec& domain() const { return domain_; }
  const ModelParams& params() const { return params_; }
  std::uint32_t degree(VertexId v) const { return degrees_[v]; }
  const std::vector<std::uint32_t>& degrees() const { return degrees_; }
  std::uint64_t edge_count() const { return edges_; }
  bool is_matrix() const { return std::holds_alternative<AdjacencyMatrix>(storage_); }
  const NeighborLists& lists() const { return std::get<NeighborLists>(storage_); }
  const AdjacencyMatrix& matrix() const { return std::get<AdjacencyMatrix>(storage_); }
  std::size_t memory_bytes() const;

  bool adjacent(VertexId u, VertexId v) const {
    if (u == v) return false;
    return std::visit([&](const auto& s) { return s.adjacent(u, v); }, storage_);
  }

  template <class F>
  void for_each_neighbor(VertexId v, F&& f) const {
    if (const auto* l = std::get_if<NeighborLists>(&storage_)) {
      for (VertexId w : l->neighbors(v)) f(w);
    } else {
      std::get<AdjacencyMatrix>(storage_).for_each_in_row(v, f);
    }
  }

  /// Sorted neighbor list (copied for the matrix layout).
  std::vector<VertexId> neighbors(VertexId v) const;
  /// All edges (i, j) with i < j in lexicographic order.
  std::vector<std::pair<VertexId, VertexId>> edges() const;

 private:
  DomainSpec domain_;
  ModelParams params_;
  Storage storage_;
  std::vector<std::uint32_t> degrees_;
  std::uint64_t edges_ = 0;
};

/// Expected number of edges for n points with connection radius r, ignoring
/// boundary losses.
double expected_edge_count(const DomainSpec& domain, double r);

/// Exact adjacency by spatial cells of side at least r (flat) or a 3D grid over
/// the unit-vector cube with cell side at least the chord of a cap of radius r (sphere).
GraphInstance build_adjacency(const GroundTruth& truth, const ModelParams& params,
                              AdjacencyLayout layout = AdjacencyLayout::Auto);

}  // namespace rgg
