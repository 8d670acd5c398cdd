#include "rggrecon/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rggrecon/generate.hpp"
#include "rggrecon/geometry.hpp"
#include "rggrecon/parallel.hpp"
#include "rggrecon/reconstruct.hpp"

namespace rgg {

namespace {

constexpr double kPi = std::numbers::pi;

std::string describe(const char* what, double worst, double limit) {
  std::ostringstream s;
  s << what << " worst " << worst << " (limit " << limit << ")";
  return s.str();
}

SelftestCheck endpoints() {
  bool ok = true;
  std::ostringstream s;
  for (double r : {0.5, 1.0, 7.0, 31.6}) {
    const double f0 = lune_area(0.0, r), f2 = lune_area(2.0 * r, r);
    ok = ok && f0 == 0.0 && f2 == kPi * r * r;
    s << "r=" << r << ": F(0)=" << f0 << " F(2r)-pi r^2=" << f2 - kPi * r * r << "; ";
  }
  return {"lune endpoints exact", ok, s.str()};
}

SelftestCheck round_trip(const SelftestOptions& o) {
  SplitMix64 rng = SplitMix64::stream(o.seed, 1);
  double worst = 0.0;
  for (int i = 0; i < o.roundTripPoints; ++i) {
    const double r = 1.0 + 99.0 * rng.uniform01();
    const double x = 2.0 * r * rng.uniform01();
    worst = std::max(worst, std::abs(lune_area_inverse(lune_area(x, r), r) - x) / r);
  }
  return {"lune inverse round trip", worst <= 1e-7, describe("|F^-1(F(x)) - x| / r", worst, 1e-7)};
}

/// Hit-or-miss estimate over the bounding square of the smaller disk.
SelftestCheck lens_monte_carlo(const SelftestOptions& o) {
  const int k = o.lensConfigurations;
  std::vector<double> z(static_cast<std::size_t>(k), 0.0);
  parallel_for(static_cast<std::size_t>(k), [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t c = begin; c < end; ++c) {
      SplitMix64 cfg = SplitMix64::stream(o.seed + 2, c);
      const double r1 = 0.5 + 9.5 * cfg.uniform01();
      const double r2 = 0.5 + 9.5 * cfg.uniform01();
      const double d = (r1 + r2) * cfg.uniform01();
      const double rs = std::min(r1, r2);
      const double cx = r1 <= r2 ? 0.0 : d;
      SplitMix64 rng = SplitMix64::stream(o.seed + 3, c);
      std::uint64_t hits = 0;
      for (std::uint64_t i = 0; i < o.monteCarloSamples; ++i) {
        const double x = cx + rs * (2.0 * rng.uniform01() - 1.0);
        const double y = rs * (2.0 * rng.uniform01() - 1.0);
        const double dx = x - d;
        hits += (x * x + y * y < r1 * r1 && dx * dx + y * y < r2 * r2) ? 1 : 0;
      }
      const double box = 4.0 * rs * rs;
      const double p = static_cast<double>(hits) / static_cast<double>(o.monteCarloSamples);
      const double se = box * std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(o.monteCarloSamples)) /
                                        static_cast<double>(o.monteCarloSamples));
      z[c] = std::abs(lens_area(d, r1, r2) - box * p) / se;
    }
  }, 1);
  const double worst = *std::max_element(z.begin(), z.end());
  return {"lens area vs Monte Carlo", worst <= 4.0, describe("standard errors", worst, 4.0)};
}

/// F(x2) >= F(x1) + (x2 - x1)(F'(x1) + F'(x2)) / 2 for 0 <= x1 <= x2 <= 2r.
SelftestCheck concavity_inequality(const SelftestOptions& o) {
  SplitMix64 rng = SplitMix64::stream(o.seed, 4);
  double worst = -1e300;
  for (int i = 0; i < o.inequalityPairs; ++i) {
    const double r = 1.0 + 49.0 * rng.uniform01();
    double a = 2.0 * r * rng.uniform01(), b = 2.0 * r * rng.uniform01();
    if (a > b) std::swap(a, b);
    const double slack =
        lune_area(a, r) + (b - a) * (lune_area_deriv(a, r) + lune_area_deriv(b, r)) / 2.0 - lune_area(b, r);
    worst = std::max(worst, slack);
  }
  return {"trapezoid inequality for the lune", worst <= 1e-9, describe("violation", worst, 1e-9)};
}

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Landmarks embedded from exact distances and points trilaterated from exact
/// distances must reproduce every pairwise distance.
SelftestCheck trilateration_exact(const SelftestOptions& o) {
  SplitMix64 rng = SplitMix64::stream(o.seed, 5);
  const double side = 100.0;
  double worst = 0.0;
  int cases = 0;
  for (int m = 2; m <= 4; ++m) {
    for (int t = 0; t < o.trilaterationCases; ++t) {
      PointSet land(m, 0);
      for (int i = 0; i <= m; ++i) {
        Point p(static_cast<std::size_t>(m));
        for (auto& c : p) c = side * rng.uniform01();
        land.push_back(p);
      }
      std::vector<std::vector<double>> dl(m + 1, std::vector<double>(m + 1, 0.0));
      for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j) dl[i][j] = dist(land[i], land[j]);
      if (simplex_regularity(dl) < 0.05) continue;
      const PointSet emb = embed_simplex(dl);
      Point q(static_cast<std::size_t>(m)), w(static_cast<std::size_t>(m));
      for (auto& c : q) c = side * rng.uniform01();
      for (auto& c : w) c = side * rng.uniform01();
      std::vector<double> eq(m + 1), ew(m + 1);
      for (int i = 0; i <= m; ++i) {
        eq[i] = dist(q, land[i]);
        ew[i] = dist(w, land[i]);
      }
      const Point rq = m == 2 ? trilaterate(eq, emb) : trilaterate_simplex(eq, emb);
      const Point rw = m == 2 ? trilaterate(ew, emb) : trilaterate_simplex(ew, emb);
      worst = std::max(worst, std::abs(dist(rq, rw) - dist(q, w)) / side);
      for (int i = 0; i <= m; ++i) worst = std::max(worst, std::abs(dist(rq, emb[i]) - eq[i]) / side);
      ++cases;
    }
  }
  std::ostringstream s;
  s << cases << " cases, relative error worst " << worst << " (limit 1e-9)";
  return {"trilateration from exact distances", cases > 0 && worst <= 1e-9, s.str()};
}

}  // namespace

std::vector<SelftestCheck> run_selftest(const SelftestOptions& options) {
  return {endpoints(), round_trip(options), lens_monte_carlo(options), concavity_inequality(options),
          trilateration_exact(options)};
}

}  // namespace rgg
