#pragma once

#include "dirkde/kde.hpp"
#include "dirkde/models.hpp"
#include "dirkde/quadrature.hpp"
#include "dirkde/risk.hpp"
#include "dirkde/selectors.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dirkde {

struct BenchConfig
{
  std::vector<int> dims{1};
  std::vector<std::size_t> sample_sizes{500};
  std::vector<int> models;
  std::vector<SelectorId> selectors;
  int replicates = 1000;
  std::uint64_t seed = 0;
  //! Seed of the Monte Carlo ISE rule (q >= 3), shared by every integration.
  std::uint64_t mc_seed = 0;
  bool empirical_h_mise = false;
  std::string out_dir;

  //! Throws DomainError on empty lists, unknown ids or replicates < 1.
  void validate() const;
};

//! Seed of replicate r in cell (model, q, n).
std::uint64_t replicate_seed(std::uint64_t master, int model, int q, std::size_t n, int r);

//! FNV-1a over the coordinate bytes.
std::uint64_t sample_hash(const PointSet& sample);

//! Integral of (f_h - f)^2 by the rule.
double ise(const KdeModel& estimate, const DensityModel& truth, const QuadratureRule& rule);
//! The same with the truth already evaluated at the rule nodes.
double ise(const KdeModel& estimate, std::span<const double> truth_at_nodes, const QuadratureRule& rule);

//! Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

struct MeanSd
{
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(std::span<const double> values);

struct CellResult
{
  int model = 0;
  int q = 0;
  std::size_t n = 0;
  SelectorId selector = SelectorId::rot;
  bool applicable = true;
  int replicates = 0;
  int failures = 0;
  std::vector<std::string> failure_messages; // first few, with replicate index
  double mean_ise = 0.0;
  double sd_ise = 0.0;
  double mean_h = 0.0;
  int boundary_hits = 0;
  double seconds = 0.0;
  std::vector<double> ise_values; // per successful replicate, in replicate order
  std::vector<std::uint64_t> sample_hashes;

  //! More than 1% of the replicates failed.
  bool flagged() const { return failures * 100 > replicates; }
  double standard_error() const;
};

struct HMiseResult
{
  double h = 0.0;
  double value = 0.0;
  double sd = 0.0; // sd of the replicate ISEs at h
  bool boundary = false;
};

//! All selectors on one (model, q, n) with shared replicate samples.
struct ModelBlock
{
  int model = 0;
  int q = 0;
  std::size_t n = 0;
  std::vector<CellResult> cells;
  std::vector<std::uint64_t> sample_hashes;
  std::optional<HMiseResult> exact_h_mise;     // vM-mixture truths only
  std::optional<HMiseResult> empirical_h_mise; // on request
};

ModelBlock run_block(int model,
                     int q,
                     std::size_t n,
                     const std::vector<SelectorId>& selectors,
                     int replicates,
                     std::uint64_t seed,
                     std::uint64_t mc_seed = 0,
                     bool empirical_h_mise = false);

CellResult run_cell(int model,
                    int q,
                    std::size_t n,
                    SelectorId selector,
                    int replicates,
                    std::uint64_t seed,
                    std::uint64_t mc_seed = 0);

//! Bandwidth minimizing the replicate-mean ISE.
HMiseResult empirical_h_mise(int model,
                             int q,
                             std::size_t n,
                             int replicates,
                             std::uint64_t seed,
                             std::uint64_t mc_seed = 0);

//! Replicate-mean ISE on a log grid (no refinement of the minimizer beyond the grid).
MiseCurve empirical_mise_curve(int model,
                               int q,
                               std::size_t n,
                               int replicates,
                               std::uint64_t seed,
                               std::uint64_t mc_seed = 0,
                               double lo = 1e-2,
                               double hi = 10.0,
                               int points = 60);

struct Ranking
{
  std::vector<double> scores; // per selector
  std::vector<std::string> ties;
};

//! mise[model][selector]; NaN marks a missing cell. Per model the selectors
//! with values are ranked by increasing MISE (ties by column order), the best
//! of m gets r = m, and selector k earns (r_k / m) MISE_best / MISE_k.
Ranking rank_selectors(const std::vector<std::vector<double>>& mise,
                       const std::vector<std::string>& names = {});

struct BenchResult
{
  BenchConfig config;
  std::vector<ModelBlock> blocks;
  double seconds = 0.0;

  //! No flagged cell.
  bool ok() const;
  //! Ranking over the blocks with the given (q, n).
  Ranking ranking(int q, std::size_t n) const;
};

BenchResult run_bench(const BenchConfig& config);

//! Tables-style CSV for one (q, n): one row per model, MISE x 100 and sd x 100 per selector.
void write_table_csv(const BenchResult& result, int q, std::size_t n, std::ostream& out);
//! One row per cell.
void write_cells_csv(const BenchResult& result, std::ostream& out);
//! Config, cells and ranking scores.
void write_summary_json(const BenchResult& result, std::ostream& out);
//! Per-(q, n) table CSVs, cells.csv and summary.json under config.out_dir.
void write_bench_outputs(const BenchResult& result);
//! Human-readable table with 4 significant digits.
void print_table(const BenchResult& result, int q, std::size_t n, std::ostream& out);

enum class CsvFormat
{
  unit_vectors,
  angles_1d,
  angles_2d
};

CsvFormat parse_csv_format(const std::string& name);

//! Reads points from a CSV file. Blank lines, '#' comments and a non-numeric
//! header row are skipped. Throws ParseError naming the row.
PointSet ingest_csv(const std::string& path, CsvFormat format = CsvFormat::unit_vectors);
PointSet ingest_csv(std::istream& in, CsvFormat format = CsvFormat::unit_vectors);

//! Unit vectors, 17 significant digits.
void write_points_csv(const PointSet& points, std::ostream& out);

} // namespace dirkde
