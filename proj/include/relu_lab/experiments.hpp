#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relu_lab/bounds.hpp"
#include "relu_lab/config.hpp"
#include "relu_lab/model.hpp"
#include "relu_lab/optimizers.hpp"
#include "relu_lab/risk.hpp"

namespace relulab {

struct ExperimentContext {
  Config cfg;
  std::string out_dir = "out";
  std::uint64_t base_seed = 0;  // cfg experiment.seed unless overridden
  int threads = 1;
};

ExperimentContext make_context(const Config& cfg, std::optional<std::string> out_dir,
                               std::optional<std::uint64_t> seed_override, int threads);

// One training run inside a grid. wall_time_sec is excluded from
// reproducibility comparisons and is always the last CSV column.
struct ResultRow {
  std::string experiment;
  Algorithm algorithm = Algorithm::GlmTron;
  std::int64_t n = 0;
  double gamma0 = 0.0;
  std::int64_t replicate = 0;
  std::uint64_t seed = 0;
  double excess_risk = 0.0;
  double risk = 0.0;
  bool diverged = false;
  double wall_time_sec = 0.0;
};

struct Figure1Point {
  Algorithm algorithm = Algorithm::GlmTron;
  std::int64_t n = 0;
  double best_gamma0 = 0.0;
  double mean_excess_risk = 0.0;
  std::int64_t diverged_count = 0;
};

struct Figure1Result {
  std::vector<ResultRow> rows;
  std::vector<Figure1Point> summary;

  // Best mean excess risk per N for one algorithm, ascending N.
  std::vector<Figure1Point> curve(Algorithm a) const;
  // Adjacent pairs where the curve increases.
  static int inversions(const std::vector<Figure1Point>& curve);
};

Figure1Result run_figure1_grid(const ExperimentContext& ctx);

struct Traj2dResult {
  struct Path {
    Algorithm algorithm = Algorithm::GlmTron;
    std::vector<TrajectoryPoint> points;
    double final_excess_risk = 0.0;
    double final_risk = 0.0;
  };
  ParameterVector w0;
  std::vector<Path> paths;  // one per algorithm

  const Path& path(Algorithm a) const;
};

Traj2dResult run_trajectory_2d(const ExperimentContext& ctx);

struct CovSandwichCell {
  std::int64_t checkpoint = 0;
  int coord = 0;
  double lambda = 0.0;
  double empirical = 0.0;
  double stderr_mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool inside = false;  // within [lower - 3 se, upper + 3 se]
};

struct CovSandwichResult {
  std::vector<CovSandwichCell> cells;
  double fraction_inside = 0.0;
};

CovSandwichResult run_cov_sandwich(const ExperimentContext& ctx);

struct SgdFailureResult {
  double sgd_mean_risk = 0.0;
  double tron_mean_risk = 0.0;
  double bias_bound = 0.0;   // halving 0.5 decay of ||w0 - w*||
  double risk_floor = 0.0;   // 0.5 * ||w*||_H^2
  std::int64_t trials = 0;
};

SgdFailureResult run_sgd_failure(const ExperimentContext& ctx);

struct TronVsSgdInstance {
  std::string name;
  double sigma_sq = 0.0;
  double initial_dist_sq = 0.0;  // ||w0 - w*||_2^2
  double tron_best = 0.0;
  double sgd_best = 0.0;
  double ratio = 0.0;  // tron_best / sgd_best
};

struct TronVsSgdResult {
  std::vector<TronVsSgdInstance> instances;
};

TronVsSgdResult run_tron_vs_sgd(const ExperimentContext& ctx);

struct RateSlopePoint {
  std::int64_t n = 0;
  double best_mean_excess = 0.0;
};

struct RateSlopeResult {
  std::vector<RateSlopePoint> points;
  double slope = 0.0;  // least squares on (log2 N, log2 best excess)
};

RateSlopeResult run_rate_slope(const ExperimentContext& ctx);

struct MisspecPlateauPoint {
  std::int64_t n = 0;
  double mean_risk = 0.0;
  double ratio_to_opt = 0.0;
};

struct MisspecPlateauResult {
  double opt_proxy_mc = 0.0;
  double opt_proxy_se = 0.0;
  double opt_semi_analytic = 0.0;  // eta * ||w*||_H^2 / 2 for corruption-to-zero
  std::vector<MisspecPlateauPoint> points;
  double final_ratio = 0.0;
};

MisspecPlateauResult run_misspecified_plateau(const ExperimentContext& ctx);

struct SandwichScanResult {
  std::int64_t total = 0;
  std::int64_t holds = 0;
  bool all_hold = false;
};

SandwichScanResult run_sandwich_scan(const ExperimentContext& ctx);

// [experiment] keys: theorem, k (optional), alpha, beta, opt_proxy, w0,
// w0.scale. Uses the problem and schedule sections for everything else.
BoundReport run_bounds(const ExperimentContext& ctx);

std::string bound_report_to_json(const BoundReport& report);

// Shared cell-seed derivation: mix(base, algo tag, N, gamma index, replicate).
std::uint64_t cell_seed(std::uint64_t base, Algorithm algorithm, std::int64_t n,
                        std::int64_t gamma_index, std::int64_t replicate);

void write_rows_csv(const std::string& path, const std::vector<ResultRow>& rows);

}  // namespace relulab
