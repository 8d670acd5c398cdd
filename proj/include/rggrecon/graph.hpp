#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "rggrecon/generate.hpp"

namespace rgg {

inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

struct BfsDistances {
  VertexId source = 0;
  std::vector<std::uint32_t> dist;

  bool reachable(VertexId v) const { return dist[v] != kUnreachable; }
  /// Largest finite distance.
  std::uint32_t eccentricity() const;
};

/// Hop distances from `source`. Vertices farther than max_depth stay kUnreachable.
BfsDistances bfs(const GraphInstance& g, VertexId source, std::uint32_t max_depth = kUnreachable);

/// Hop distance to the nearest of several sources.
std::vector<std::uint32_t> bfs_multi(const GraphInstance& g, std::span<const VertexId> sources);

/// |N(v) ∩ N(w)|. v and w themselves are never counted.
std::uint32_t common_neighbors(const GraphInstance& g, VertexId v, VertexId w);
/// |N(v) \ N(w)|, which includes w itself when v and w are adjacent.
std::uint32_t exclusive_neighbors(const GraphInstance& g, VertexId v, VertexId w);

/// Number of vertices other than v within two hops of v. When `stop_at` is
/// given, counting may stop early once the count reaches it, in which case
/// some value >= stop_at is returned.
std::uint32_t two_hop_count(const GraphInstance& g, VertexId v,
                            std::uint32_t stop_at = std::numeric_limits<std::uint32_t>::max());

/// Vertices w with d_G(v, w) <= 2, v first, then neighbors, then the second
/// shell; each group sorted by id. `hops` receives 0, 1 or 2 per entry.
std::vector<VertexId> two_hop_ball(const GraphInstance& g, VertexId v, std::vector<std::uint8_t>* hops = nullptr);

/// Vertices whose two-hop count reaches deepFactor * r^2.
struct DeepLabels {
  std::vector<std::uint8_t> isDeep;
  std::vector<std::uint32_t> twoHopCount;
  double threshold = 0.0;

  std::size_t deep_count() const;
};

/// Smallest integer count that qualifies a vertex as deep: deep_factor * r^2 in
/// the plane. In m dimensions the same fraction deep_factor / (4 pi) of the
/// volume of a ball of radius 2r is used.
std::uint32_t deep_threshold_count(double deep_factor, double r, int m = 2);
double deep_threshold(double deep_factor, double r, int m = 2);

DeepLabels classify_deep(const GraphInstance& g, double deep_factor = 11.0);

/// Answers "is v deep?" either from precomputed labels, lazily with
/// memoisation, or unconditionally (the sphere, where every vertex is deep).
/// Lazy answers are exact; they may stop counting once the threshold is met.
/// Safe for concurrent queries.
class DeepOracle {
 public:
  static DeepOracle lazy(const GraphInstance& g, double deep_factor);
  /// Lazy oracle with an explicit two-hop count threshold.
  static DeepOracle lazy_count(const GraphInstance& g, std::uint32_t threshold);
  static DeepOracle from_labels(DeepLabels labels);
  static DeepOracle all(std::size_t n);

  bool is_deep(VertexId v) const;
  std::size_t size() const { return n_; }

 private:
  enum class Mode { Lazy, Labels, All };
  Mode mode_ = Mode::All;
  const GraphInstance* graph_ = nullptr;
  std::uint32_t threshold_ = 0;
  std::size_t n_ = 0;
  std::shared_ptr<const DeepLabels> labels_;
  std::shared_ptr<std::atomic<std::uint8_t>[]> memo_;
};

/// Greedy geographic routing: repeatedly step to the neighbor closest to v.
/// Diagnostic only; needs ground truth.
struct GreedyPath {
  std::vector<VertexId> path;
  bool reached = false;  // false: stuck at path.back()
};
GreedyPath greedy_path(const GraphInstance& g, const GroundTruth& truth, VertexId u, VertexId v);

}  // namespace rgg
