#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rggrecon/core.hpp"
#include "rggrecon/estimate.hpp"
#include "rggrecon/generate.hpp"
#include "rggrecon/reconstruct.hpp"

namespace rgg {

inline constexpr int kFormatVersion = 1;

nlohmann::json read_json(const std::filesystem::path& path);
/// Writes atomically: a sibling temporary file is renamed over the target.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// {"format_version", "n", "r", "alpha"?, "model", "domain", "edges": [[i, j], ...]}, i < j, sorted.
void write_graph(const std::filesystem::path& path, const GraphInstance& g);
GraphInstance read_graph(const std::filesystem::path& path, AdjacencyLayout layout = AdjacencyLayout::Auto);

/// {"format_version", "positions": [[x, y, ...], ...]}.
void write_positions(const std::filesystem::path& path, const GroundTruth& truth);
GroundTruth read_positions(const std::filesystem::path& path, const DomainSpec& domain);

nlohmann::json to_json(const Reconstruction& recon);
Reconstruction reconstruction_from_json(const nlohmann::json& j);
void write_reconstruction(const std::filesystem::path& path, const Reconstruction& recon, double r,
                          const ConstantsLedger& ledger, const nlohmann::json& timings_ms);
Reconstruction read_reconstruction(const std::filesystem::path& path);

nlohmann::json report_json(const DistortionReport& report, const ConstantsLedger& ledger,
                            const nlohmann::json& timings_ms);

struct EstimateRow {
  VertexId u = 0, v = 0;
  DistanceEstimate::Kind kind = DistanceEstimate::Kind::Hybrid;
  double value = 0.0;
  double envelope = 0.0;
  std::optional<double> true_distance;
};

/// Columns pair_u, pair_v, kind, value, envelope, true_distance (empty when unknown).
void write_estimates_csv(const std::filesystem::path& path, const std::vector<EstimateRow>& rows);
std::vector<EstimateRow> read_estimates_csv(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace rgg
