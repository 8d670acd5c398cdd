#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "rggrecon/estimate.hpp"
#include "rggrecon/geometry.hpp"

namespace rgg {

struct LandmarkSet {
  std::vector<VertexId> ids;
  /// Landmark coordinates in the working frame: dimension m for flat domains; the
  /// standard basis of R^3 for the sphere.
  PointSet embedded;
  /// Symmetric matrix of landmark-to-landmark estimates.
  std::vector<std::vector<double>> pairwise;
  /// 0: found under the plain conditions; 1: after relaxing the windows;
  /// 2: without the deep ball around the first landmark.
  int searchStage = 0;
};

enum class Frame { Working, DomainAligned };
std::string_view to_string(Frame f);

struct Reconstruction {
  DomainSpec domain;
  Frame frame = Frame::Working;
  PointSet positions;
  LandmarkSet landmarks;
  /// Distance each coordinate vector moved when clamped into the domain.
  std::vector<double> clamp;
  /// Vertices with no finite estimate to some landmark; placed at the domain center.
  std::vector<VertexId> unplaced;
  /// Corner candidates used for alignment, in corner order.
  std::vector<VertexId> corners;
  /// Set when no vertex met the absolute depth threshold and the upper half of
  /// two-hop counts stood in for the deep set.
  bool relativeDepth = false;
};

/// Estimated distance from every vertex to one landmark; entry [landmark] must be 0.
using DistanceProvider = std::function<std::vector<double>(VertexId landmark)>;

/// Hybrid estimates, with d(v, v) = 0.
DistanceProvider hybrid_provider(const GraphInstance& g, const DeepOracle& deep, const ConstantsLedger& ledger);

// ----- pure geometry -------------------------------------------------------

/// x at the origin, y on the positive first axis, z in the upper half-plane.
std::array<Point, 3> embed_landmark_triangle(double dxy, double dxz, double dyz);

/// Embeds k + 1 points in R^k from their pairwise distances (point 0 at the
/// origin, point i in the span of the first i axes with positive last coordinate).
PointSet embed_simplex(const std::vector<std::vector<double>>& dist);

/// Solves the differenced squared-distance system for a point whose distances to
/// landmarks[0..k] are `est`. With more equations than unknowns the normal equations
/// are used.
Point trilaterate_simplex(std::span<const double> est, const PointSet& landmarks);
/// Planar case with three landmarks.
Point trilaterate(std::span<const double> est, const PointSet& landmarks);

/// u = normalize(sum_v e_v cos(d(u, v) / R)) with the landmarks taken as the
/// standard basis.
Point reconstruct_sphere(std::span<const double> est, double R);

/// Cayley-Menger volume of the simplex spanned by the given points, divided by the
/// volume of the regular simplex whose edge is their mean pairwise distance.
double simplex_regularity(const std::vector<std::vector<double>>& dist);

// ----- pipeline ------------------------------------------------------------

/// Picks landmarks by graph distance windows and embeds them. Returns the set and
/// fills `fields` with the provider's output for each landmark.
LandmarkSet select_landmarks(const GraphInstance& g, const DeepOracle& deep, const ConstantsLedger& ledger,
                             const DistanceProvider& provider, std::vector<std::vector<double>>& fields);

/// Places every vertex from its distances to the landmarks.
Reconstruction trilaterate_all(const GraphInstance& g, const LandmarkSet& landmarks,
                               const std::vector<std::vector<double>>& fields);

/// Lowest-degree vertices pairwise at graph distance >= max(2, cornerSeparationFrac * side / r),
/// all in the component of the highest-degree vertex.
std::vector<VertexId> corner_candidates(const GraphInstance& g, const ConstantsLedger& ledger, std::size_t count);

/// Moves a working-frame reconstruction of a flat domain onto the domain using the
/// corner candidates, then clamps into the domain. Sphere: returned unchanged but
/// marked aligned. Hypercube with m >= 5: returned unchanged.
Reconstruction align_to_domain(Reconstruction recon, const GraphInstance& g, const ConstantsLedger& ledger);

struct PipelineOptions {
  bool align = true;
  /// On a flat domain where the landmark search fails, retry once with the
  /// vertices of at least median two-hop count treated as deep.
  bool depthFallback = true;
};

/// Landmarks, trilateration and alignment. Reads only the graph.
Reconstruction reconstruct(const GraphInstance& g, const DeepOracle& deep, const ConstantsLedger& ledger,
                           const DistanceProvider& provider, PipelineOptions options = {});
/// Same with hybrid estimates and the default deep oracle for the domain. The
/// depth fallback applies only here.
Reconstruction reconstruct(const GraphInstance& g, const ConstantsLedger& ledger, PipelineOptions options = {});

/// Deep oracle appropriate for the domain: every vertex on the sphere, lazy otherwise.
DeepOracle default_deep_oracle(const GraphInstance& g, const ConstantsLedger& ledger);
/// Vertices whose two-hop count is at least the median count.
DeepOracle median_depth_oracle(const GraphInstance& g);

// ----- scoring -------------------------------------------------------------

struct Percentiles {
  double p50 = 0.0, p90 = 0.0, p99 = 0.0, max = 0.0;
};
Percentiles percentiles(std::vector<double> values);

struct DistortionReport {
  double dStar = 0.0;
  SymmetryElement argminSymmetry;
  std::vector<double> perVertexError;
  Percentiles percentiles;
  /// The sphere and unaligned flat frames use a least-squares orthogonal fit
  /// rather than exact max-error minimization.
  bool surrogate = false;
};

DistortionReport distortion(const PointSet& recon, Frame frame, const GroundTruth& truth);
DistortionReport distortion(const Reconstruction& recon, const GroundTruth& truth);

/// Orthogonal transform Q (reflections allowed) and translation t minimizing
/// sum |Q a_i + t - b_i|^2. With `translate` false, t = 0.
struct RigidFit {
  Eigen::MatrixXd Q;
  Eigen::VectorXd t;
};
RigidFit fit_orthogonal(const PointSet& a, const PointSet& b, bool translate);

/// Euclidean (or geodesic) distance between two reconstructed vertices.
double pairwise_distance_from_reconstruction(const Reconstruction& recon, VertexId u, VertexId v);

}  // namespace rgg
