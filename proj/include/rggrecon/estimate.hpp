#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "rggrecon/core.hpp"
#include "rggrecon/graph.hpp"

namespace rgg {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct DistanceEstimate {
  enum class Kind { ShortLune, ShortLens, LongGraph, Hybrid };
  double value = 0.0;
  Kind kind = Kind::Hybrid;
  double envelope = kInfinity;
  /// Set when r <= 100 sqrt(log n): the printed envelopes exceed the quantities
  /// they bound and carry no information.
  bool vacuous = false;
  /// For hybrid estimates, the intermediate vertex achieving the minimum.
  VertexId witness = 0;
};

std::string_view to_string(DistanceEstimate::Kind kind);

/// Natural log of the nominal point count, the scale used by every envelope.
double log_n(const GraphInstance& g);

/// kappa(d) = c3 * r * (d / r^(7/3) + log n / r^(4/3)).
struct KappaParams {
  double c3 = 10.0;
  double r = 1.0;
  double logn = 1.0;

  static KappaParams for_graph(const GraphInstance& g, double c3);
  double operator()(double d) const;
};

bool envelopes_vacuous(double r, double logn);

/// The four-branch profile G(x) on [0, 2r] bounding the short-range error as
/// 100 * G(x) * sqrt(log n).
double short_range_profile(double x, double r, double logn);

/// Estimate for an edge (v, w) with v deep, from |N(v) \ N(w)|.
DistanceEstimate short_range_adjacent(const GraphInstance& g, const DeepOracle& deep, VertexId v, VertexId w);
/// Estimate for a pair at graph distance two with v deep, from |N(v) ∩ N(w)|.
DistanceEstimate short_range_two_apart(const GraphInstance& g, const DeepOracle& deep, VertexId v, VertexId w);
/// Dispatches on d_G(v, w) in {1, 2}; envelope is 100 G(value) sqrt(log n).
DistanceEstimate short_range(const GraphInstance& g, const DeepOracle& deep, VertexId v, VertexId w);

/// Same estimators from raw counts, shared by the per-pair and batched paths.
/// For m > 2 the lune and ball volumes of dimension m replace the planar areas.
double lune_estimate(std::uint32_t exclusive, double r, int m = 2);
double lens_estimate(std::uint32_t common, double r, int m = 2);

struct LongRangeBounds {
  double lower = 0.0;
  double upper = 0.0;
};
LongRangeBounds long_range_from_hops(std::uint32_t hops, const KappaParams& kappa);
LongRangeBounds long_range(const GraphInstance& g, VertexId u, VertexId v, const KappaParams& kappa);

struct HybridOptions {
  /// Admit w = v with a zero-length short-range leg.
  bool include_self = true;
};

/// d-hat(u, v) = min over w with d_G(w, v) <= 2 of r d_G(u, w) + d-tilde(w, v) + C2 sqrt(log n).
DistanceEstimate hybrid(const GraphInstance& g, const DeepOracle& deep, VertexId u, VertexId v,
                        const KappaParams& kappa, const ConstantsLedger& ledger, HybridOptions options = {});

/// Hybrid estimates from every vertex u to one deep vertex v.
struct HybridField {
  VertexId target = 0;
  std::vector<double> value;       // +inf where no admissible w is reachable
  std::vector<VertexId> witness;
  double kappa_c3 = 0.0;
  double c4_term = 0.0;  // shortRangeC4 * sqrt(log n)
  double r = 0.0;
  double logn = 0.0;

  double envelope(VertexId u) const;
  DistanceEstimate at(VertexId u) const;
};

/// One multi-source shortest-path pass seeded with the short-range legs of all
/// w within two hops of v. Entry v itself holds the plain hybrid value; callers
/// that want d(v, v) = 0 must special-case it.
HybridField hybrid_field(const GraphInstance& g, const DeepOracle& deep, VertexId v, const KappaParams& kappa,
                         const ConstantsLedger& ledger, HybridOptions options = {});

/// Lower of two upper-bound estimates, with envelope min(e1, e2).
DistanceEstimate min_estimate(const DistanceEstimate& a, const DistanceEstimate& b);

}  // namespace rgg
