#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace rgg {

/// Error families. The CLI maps each family onto a distinct exit code.
enum class ErrorKind {
  Parameter,
  Domain,
  DeepRequired,
  WrongRange,
  NoPath,
  LandmarkSearchFailed,
  TriangleInequalityViolated,
  SingularGeometry,
  DegenerateProjection,
  CornerSearchFailed,
  LengthMismatch,
  Io,
  Format,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

using VertexId = std::uint32_t;

enum class DomainKind { Square2D, Hypercube, Sphere2 };

/// The manifold vertices live on, scaled so its total measure equals n.
struct DomainSpec {
  DomainKind kind = DomainKind::Square2D;
  int m = 2;  // manifold dimension; 2 for Square2D and Sphere2
  std::int64_t n = 0;

  static DomainSpec square(std::int64_t n);
  static DomainSpec hypercube(std::int64_t n, int m);
  static DomainSpec sphere(std::int64_t n);

  bool flat() const { return kind != DomainKind::Sphere2; }
  /// Coordinates stored per point: m for flat domains, 3 for the sphere.
  int ambient_dim() const { return flat() ? m : 3; }
  /// Side length n^(1/m) of a flat domain.
  double side() const;
  /// R = sqrt(n / 4pi), sphere only.
  double sphere_radius() const;
  /// Exclusive upper bound on the connection radius.
  double max_radius() const;
  void validate() const;

  bool operator==(const DomainSpec&) const = default;
};

std::string_view to_string(DomainKind kind);
DomainKind domain_kind_from_string(std::string_view s);

enum class PointProcess { UniformN, Poisson };

struct ModelParams {
  double r = 0.0;
  std::optional<double> alpha;
  PointProcess process = PointProcess::UniformN;

  /// r = n^alpha for the given domain.
  static ModelParams from_alpha(const DomainSpec& domain, double alpha,
                                PointProcess process = PointProcess::UniformN);
  void validate(const DomainSpec& domain) const;

  bool operator==(const ModelParams&) const = default;
};

/// Constants the analysis leaves symbolic. Echoed into every report.
struct ConstantsLedger {
  double deepFactor = 11.0;
  double kappaC3 = 10.0;
  double shortRangeC2 = 1.0;
  double shortRangeC4 = 2.0;
  double landmarkWindowLo = 0.2;
  double landmarkWindowHi = 0.3;
  double landmarkBallFrac = 0.4;
  double cornerSeparationFrac = 0.2;
  double minTriangleSideFrac = 0.1;
  double lensEmptinessLogFactor = 3.0;

  void validate() const;
  bool operator==(const ConstantsLedger&) const = default;
};

nlohmann::json to_json(const ConstantsLedger& c);
/// Strict: unknown keys are a Format error; missing keys keep defaults.
ConstantsLedger constants_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DomainSpec& d);
DomainSpec domain_from_json(const nlohmann::json& j, std::int64_t n);

/// r = n^alpha; alpha must lie in (0, 1/m).
double resolve_radius(std::int64_t n, double alpha, int m);

/// Distortion exponent 1/m - (2m/(m+1)) alpha, clamped below at 0.
double expected_beta(double alpha, int m);

struct RunConfig {
  DomainSpec domain;
  ModelParams model;
  std::uint64_t seed = 0;
  ConstantsLedger constants;
};

/// Parses {"n", "alpha" | "r", "domain": {"kind", "m"}, "model", "seed",
/// "constants"}. Unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);

}  // namespace rgg
