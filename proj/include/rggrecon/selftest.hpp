#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rgg {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestOptions {
  std::uint64_t seed = 20240601;
  int lensConfigurations = 50;
  std::uint64_t monteCarloSamples = 10'000'000;
  int roundTripPoints = 1000;
  int inequalityPairs = 10'000;
  int trilaterationCases = 200;
};

/// Geometry checks against independent numerical oracles: exact lune endpoints,
/// inverse round trip, lens area against Monte Carlo counts, the concavity
/// inequality of the lune derivative, and exact recovery under trilateration.
std::vector<SelftestCheck> run_selftest(const SelftestOptions& options = {});

}  // namespace rgg
