#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rggrecon/core.hpp"
#include "rggrecon/generate.hpp"

namespace rgg {

struct SweepSpec {
  std::vector<double> alphas;
  std::vector<std::int64_t> ns;
  std::vector<std::uint64_t> seeds;
  DomainKind domain = DomainKind::Square2D;
  int m = 2;
  PointProcess process = PointProcess::UniformN;
  ConstantsLedger constants;
  /// Cells whose expected edge count exceeds this are rejected up front.
  double budgetEdges = 2.0e8;
  /// Cells run concurrently; 0 picks the hardware concurrency.
  unsigned jobs = 1;

  DomainSpec domain_for(std::int64_t n) const;
  /// Checks every (alpha, n) pair, including the edge budget.
  void validate() const;
};

struct SweepRow {
  std::string cell;    // content hash of the cell configuration
  std::string status;  // "ok" or the error family name
  std::string message;
  DomainKind domain = DomainKind::Square2D;
  int m = 2;
  std::int64_t n = 0;
  double alpha = 0.0;
  double r = 0.0;
  std::uint64_t seed = 0;
  double d_star = 0.0;
  bool surrogate = false;
  double beta_expected = 0.0;
  double beta_fitted = 0.0;  // NaN until fitted, or when fewer than two sizes succeeded
  double runtime_ms = 0.0;
  double reconstruct_ms = 0.0;
  std::size_t edges = 0;
  double deep_fraction = 0.0;

  bool ok() const { return status == "ok"; }
};

/// Stable hex digest of everything that determines a cell's output.
std::string cell_hash(const DomainSpec& domain, const ModelParams& params, std::uint64_t seed,
                      const ConstantsLedger& ledger);

/// Sample, build, reconstruct and score one cell. Library errors are caught and
/// reported through the row's status.
SweepRow run_cell(const DomainSpec& domain, const ModelParams& params, std::uint64_t seed,
                  const ConstantsLedger& ledger);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};
/// Least squares line through (log x, log y).
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// For each (domain, m, alpha) group, fits log median d_star against log n over
/// the successful rows and stores the slope in beta_fitted.
void fit_betas(std::vector<SweepRow>& rows);

/// Runs every cell not already present with status ok in `csv`, appending rows
/// as they finish, then rewrites the file with fitted exponents. Returns all rows.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::filesystem::path& csv,
                                const std::function<void(const SweepRow&)>& progress = {});

std::string sweep_csv_header();
std::string to_csv_line(const SweepRow& row);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
/// Format errors name the offending line and column.
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

}  // namespace rgg
