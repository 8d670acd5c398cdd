#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <numbers>

#include "rggrecon/core.hpp"

using namespace rgg;

TEST_CASE("radius from exponent") {
  CHECK(resolve_radius(65536, 0.25, 2) == 16.0);
  CHECK(resolve_radius(10000, 0.375, 2) == doctest::Approx(31.6228).epsilon(1e-5));
  CHECK(resolve_radius(10000, 0.375, 2) == std::pow(10000.0, 0.375));
  CHECK_THROWS_AS(resolve_radius(100, 0.6, 2), Error);
  CHECK_THROWS_AS(resolve_radius(100, 0.0, 2), Error);
  CHECK_THROWS_AS(resolve_radius(100, 0.34, 3), Error);
  try {
    resolve_radius(100, 0.6, 2);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parameter);
  }
}

TEST_CASE("predicted exponent") {
  CHECK(expected_beta(0.25, 2) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(expected_beta(0.375, 2) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(expected_beta(0.1, 3) == doctest::Approx(1.0 / 3.0 - 1.5 * 0.1).epsilon(1e-12));
  CHECK(expected_beta(0.45, 2) == 0.0);

  // Strictly decreasing up to the zero, then flat.
  double prev = expected_beta(0.001, 2);
  for (double a = 0.002; a < 0.375; a += 0.001) {
    const double b = expected_beta(a, 2);
    CHECK(b < prev);
    prev = b;
  }
  for (double a = 0.376; a < 0.5; a += 0.01) CHECK(expected_beta(a, 2) == 0.0);
  // The zero for m = 2 sits exactly at 3/8: just below is positive.
  CHECK(expected_beta(0.375 - 1e-9, 2) > 0.0);
}

TEST_CASE("domain measurements") {
  const auto sq = DomainSpec::square(10000);
  CHECK(sq.side() == 100.0);
  CHECK(sq.ambient_dim() == 2);
  const auto cube = DomainSpec::hypercube(1000, 3);
  CHECK(cube.side() == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(cube.ambient_dim() == 3);
  const auto sph = DomainSpec::sphere(1000);
  const double R = sph.sphere_radius();
  CHECK(4 * std::numbers::pi * R * R == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(sph.ambient_dim() == 3);
  CHECK_THROWS_AS(DomainSpec::hypercube(100, 1).validate(), Error);
  CHECK_THROWS_AS(DomainSpec::square(0).validate(), Error);
}

TEST_CASE("model parameters") {
  const auto d = DomainSpec::square(4096);
  const auto p = ModelParams::from_alpha(d, 0.25);
  CHECK(p.r == 8.0);
  CHECK_NOTHROW(p.validate(d));
  ModelParams bad = p;
  bad.r = 8.0000001;
  CHECK_THROWS_AS(bad.validate(d), Error);  // alpha set but r != n^alpha
  ModelParams wide;
  wide.r = 32.0;  // side / 2
  CHECK_THROWS_AS(wide.validate(d), Error);
  wide.r = 31.9;
  CHECK_NOTHROW(wide.validate(d));
}

TEST_CASE("constants ledger round trip is bit exact") {
  ConstantsLedger c;
  c.kappaC3 = 0.1 + 0.2;  // not representable exactly in decimal
  c.shortRangeC2 = 1.0 / 3.0;
  c.deepFactor = 10.999999999999998;
  const auto j = to_json(c);
  const auto back = constants_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back == c);
  CHECK(std::memcmp(&back.kappaC3, &c.kappaC3, sizeof(double)) == 0);
}

TEST_CASE("constants ledger defaults and strictness") {
  const ConstantsLedger c;
  CHECK(c.deepFactor == 11.0);
  CHECK(c.landmarkWindowLo == 0.2);
  CHECK(c.landmarkWindowHi == 0.3);
  CHECK(c.minTriangleSideFrac == 0.1);
  CHECK(c.lensEmptinessLogFactor == 3.0);
  CHECK_NOTHROW(c.validate());
  auto j = to_json(c);
  j["mystery"] = 1.0;
  try {
    constants_from_json(j);
    FAIL("unknown key accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
  }
  ConstantsLedger neg;
  neg.kappaC3 = -1.0;
  CHECK_THROWS_AS(neg.validate(), Error);
  // Missing keys keep their defaults.
  CHECK(constants_from_json(nlohmann::json::object()) == ConstantsLedger{});
}

TEST_CASE("run configuration parsing") {
  const auto j = nlohmann::json::parse(R"({"n": 4096, "alpha": 0.25, "domain": {"kind": "square"},
                                           "model": "poisson", "seed": 7, "constants": {"kappaC3": 4.0}})");
  const RunConfig c = config_from_json(j);
  CHECK(c.domain.kind == DomainKind::Square2D);
  CHECK(c.domain.n == 4096);
  CHECK(c.model.r == 8.0);
  CHECK(c.model.process == PointProcess::Poisson);
  CHECK(c.seed == 7);
  CHECK(c.constants.kappaC3 == 4.0);
  CHECK(config_from_json(to_json(c)).model == c.model);

  auto both = j;
  both["r"] = 8.0;
  CHECK_THROWS_AS(config_from_json(both), Error);
  auto extra = j;
  extra["colour"] = "blue";
  CHECK_THROWS_AS(config_from_json(extra), Error);
  const auto cube = nlohmann::json::parse(R"({"n": 1000, "r": 2.0, "domain": {"kind": "hypercube", "m": 3}})");
  const RunConfig cc = config_from_json(cube);
  CHECK(cc.domain.m == 3);
  CHECK(cc.model.r == 2.0);
  CHECK_FALSE(cc.model.alpha.has_value());
  const auto nom = nlohmann::json::parse(R"({"n": 1000, "r": 2.0, "domain": {"kind": "hypercube"}})");
  CHECK_THROWS_AS(config_from_json(nom), Error);
}

TEST_CASE("error messages carry their family") {
  const Error e(ErrorKind::NoPath, "u and v disconnected");
  CHECK(std::string(e.what()).find("NoPath") != std::string::npos);
  CHECK(e.kind() == ErrorKind::NoPath);
}
