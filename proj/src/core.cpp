#include "rggrecon/core.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace rgg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter: return "ParameterError";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::DeepRequired: return "DeepRequired";
    case ErrorKind::WrongRange: return "WrongRange";
    case ErrorKind::NoPath: return "NoPath";
    case ErrorKind::LandmarkSearchFailed: return "LandmarkSearchFailed";
    case ErrorKind::TriangleInequalityViolated: return "TriangleInequalityViolated";
    case ErrorKind::SingularGeometry: return "SingularGeometry";
    case ErrorKind::DegenerateProjection: return "DegenerateProjection";
    case ErrorKind::CornerSearchFailed: return "CornerSearchFailed";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Format: return "FormatError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

DomainSpec DomainSpec::square(std::int64_t n) { return {DomainKind::Square2D, 2, n}; }
DomainSpec DomainSpec::hypercube(std::int64_t n, int m) { return {DomainKind::Hypercube, m, n}; }
DomainSpec DomainSpec::sphere(std::int64_t n) { return {DomainKind::Sphere2, 2, n}; }

double DomainSpec::side() const {
  if (!flat()) throw Error(ErrorKind::Parameter, "side() is undefined for the sphere");
  if (m == 2) return std::sqrt(static_cast<double>(n));
  return std::pow(static_cast<double>(n), 1.0 / m);
}

double DomainSpec::sphere_radius() const {
  if (flat()) throw Error(ErrorKind::Parameter, "sphere_radius() is undefined for flat domains");
  return std::sqrt(static_cast<double>(n) / (4.0 * std::numbers::pi));
}

double DomainSpec::max_radius() const {
  return flat() ? side() / 2.0 : std::numbers::pi * sphere_radius();
}

void DomainSpec::validate() const {
  if (n <= 0) throw Error(ErrorKind::Parameter, "n must be positive");
  switch (kind) {
    case DomainKind::Square2D:
    case DomainKind::Sphere2:
      if (m != 2) throw Error(ErrorKind::Parameter, "square and sphere domains have m = 2");
      break;
    case DomainKind::Hypercube:
      if (m < 2) throw Error(ErrorKind::Parameter, "hypercube dimension must be >= 2");
      if (m > 8) throw Error(ErrorKind::Parameter, "hypercube dimension above 8 is unsupported");
      break;
  }
}

std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::Square2D: return "square";
    case DomainKind::Hypercube: return "hypercube";
    case DomainKind::Sphere2: return "sphere";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(std::string_view s) {
  if (s == "square") return DomainKind::Square2D;
  if (s == "hypercube") return DomainKind::Hypercube;
  if (s == "sphere") return DomainKind::Sphere2;
  throw Error(ErrorKind::Parameter, "unknown domain kind '" + std::string(s) + "'");
}

double resolve_radius(std::int64_t n, double alpha, int m) {
  if (n <= 0) throw Error(ErrorKind::Parameter, "n must be positive");
  if (m < 1) throw Error(ErrorKind::Parameter, "m must be positive");
  if (!(alpha > 0.0) || !(alpha < 1.0 / m))
    throw Error(ErrorKind::Parameter, "alpha must lie in (0, 1/m)");
  return std::pow(static_cast<double>(n), alpha);
}

double expected_beta(double alpha, int m) {
  if (m < 1 || !(alpha > 0.0) || !(alpha < 1.0 / m))
    throw Error(ErrorKind::Parameter, "alpha must lie in (0, 1/m)");
  const double md = m;
  return std::max(0.0, 1.0 / md - (2.0 * md / (md + 1.0)) * alpha);
}

ModelParams ModelParams::from_alpha(const DomainSpec& domain, double alpha, PointProcess process) {
  ModelParams p;
  p.r = resolve_radius(domain.n, alpha, domain.m);
  p.alpha = alpha;
  p.process = process;
  return p;
}

void ModelParams::validate(const DomainSpec& domain) const {
  domain.validate();
  if (!(r > 0.0)) throw Error(ErrorKind::Parameter, "r must be positive");
  if (!(r < domain.max_radius()))
    throw Error(ErrorKind::Parameter, "r must be below " + std::to_string(domain.max_radius()));
  if (alpha) {
    const double expect = resolve_radius(domain.n, *alpha, domain.m);
    if (expect != r) throw Error(ErrorKind::Parameter, "r does not equal n^alpha");
  }
}

namespace {

template <class F>
void for_each_constant(ConstantsLedger& c, F&& f) {
  f("deepFactor", c.deepFactor);
  f("kappaC3", c.kappaC3);
  f("shortRangeC2", c.shortRangeC2);
  f("shortRangeC4", c.shortRangeC4);
  f("landmarkWindowLo", c.landmarkWindowLo);
  f("landmarkWindowHi", c.landmarkWindowHi);
  f("landmarkBallFrac", c.landmarkBallFrac);
  f("cornerSeparationFrac", c.cornerSeparationFrac);
  f("minTriangleSideFrac", c.minTriangleSideFrac);
  f("lensEmptinessLogFactor", c.lensEmptinessLogFactor);
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         std::string_view where) {
  if (!j.is_object()) throw Error(ErrorKind::Format, std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw Error(ErrorKind::Format, "unknown key '" + key + "' in " + std::string(where));
}

}  // namespace

void ConstantsLedger::validate() const {
  ConstantsLedger copy = *this;
  for_each_constant(copy, [](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorKind::Parameter, std::string("constant ") + name + " must be positive");
  });
  if (!(landmarkWindowLo < landmarkWindowHi))
    throw Error(ErrorKind::Parameter, "landmarkWindowLo must be below landmarkWindowHi");
}

nlohmann::json to_json(const ConstantsLedger& c) {
  nlohmann::json j = nlohmann::json::object();
  ConstantsLedger copy = c;
  for_each_constant(copy, [&](const char* name, double v) { j[name] = v; });
  return j;
}

ConstantsLedger constants_from_json(const nlohmann::json& j) {
  ConstantsLedger c;
  std::set<std::string> allowed;
  for_each_constant(c, [&](const char* name, double&) { allowed.insert(name); });
  reject_unknown_keys(j, allowed, "constants");
  for_each_constant(c, [&](const char* name, double& v) {
    if (j.contains(name)) {
      if (!j[name].is_number()) throw Error(ErrorKind::Format, std::string(name) + " must be a number");
      v = j[name].get<double>();
    }
  });
  c.validate();
  return c;
}

nlohmann::json to_json(const DomainSpec& d) {
  nlohmann::json j = {{"kind", to_string(d.kind)}};
  if (d.kind == DomainKind::Hypercube) j["m"] = d.m;
  return j;
}

DomainSpec domain_from_json(const nlohmann::json& j, std::int64_t n) {
  reject_unknown_keys(j, {"kind", "m"}, "domain");
  if (!j.contains("kind") || !j["kind"].is_string())
    throw Error(ErrorKind::Format, "domain.kind is required");
  DomainSpec d;
  d.kind = domain_kind_from_string(j["kind"].get<std::string>());
  d.n = n;
  d.m = 2;
  if (j.contains("m")) {
    if (!j["m"].is_number_integer()) throw Error(ErrorKind::Format, "domain.m must be an integer");
    d.m = j["m"].get<int>();
  } else if (d.kind == DomainKind::Hypercube) {
    throw Error(ErrorKind::Format, "hypercube domain requires m");
  }
  d.validate();
  return d;
}

RunConfig config_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"n", "alpha", "r", "domain", "model", "seed", "constants"}, "config");
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw Error(ErrorKind::Format, "config.n must be an integer");
  RunConfig c;
  const auto n = j["n"].get<std::int64_t>();
  c.domain = j.contains("domain") ? domain_from_json(j["domain"], n) : DomainSpec::square(n);
  c.domain.validate();

  PointProcess process = PointProcess::UniformN;
  if (j.contains("model")) {
    const auto model = j["model"].get<std::string>();
    if (model == "uniform") process = PointProcess::UniformN;
    else if (model == "poisson") process = PointProcess::Poisson;
    else throw Error(ErrorKind::Format, "model must be 'uniform' or 'poisson'");
  }
  const bool has_alpha = j.contains("alpha"), has_r = j.contains("r");
  if (has_alpha == has_r) throw Error(ErrorKind::Format, "exactly one of alpha or r is required");
  if (has_alpha) {
    c.model = ModelParams::from_alpha(c.domain, j["alpha"].get<double>(), process);
  } else {
    c.model.r = j["r"].get<double>();
    c.model.process = process;
  }
  c.model.validate(c.domain);
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("constants")) c.constants = constants_from_json(j["constants"]);
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j = {{"n", c.domain.n},
                      {"domain", to_json(c.domain)},
                      {"model", c.model.process == PointProcess::Poisson ? "poisson" : "uniform"},
                      {"seed", c.seed},
                      {"constants", to_json(c.constants)}};
  if (c.model.alpha) j["alpha"] = *c.model.alpha;
  else j["r"] = c.model.r;
  return j;
}

}  // namespace rgg
