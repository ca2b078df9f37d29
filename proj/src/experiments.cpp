#include "relu_lab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "relu_lab/io.hpp"

namespace relulab {

namespace {

double sq(double v) { return v * v; }

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

// Runs fn(i) for i in [0, total); results must be written to caller-owned
// slots indexed by i so the output is independent of scheduling.
template <typename Fn>
void parallel_for(std::int64_t total, int threads, Fn&& fn) {
  if (threads <= 1 || total <= 1) {
    for (std::int64_t i = 0; i < total; ++i) fn(i);
    return;
  }
  int workers = static_cast<int>(std::min<std::int64_t>(threads, total));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::int64_t i = w; i < total; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

double elapsed_sec(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

StepsizeSchedule make_schedule(const Config& cfg, double gamma0, std::int64_t horizon) {
  std::string kind = cfg.get_string("schedule.schedule.kind", "geometric_decay");
  if (kind == "constant") return StepsizeSchedule::constant(gamma0, horizon);
  if (kind != "geometric_decay") throw ConfigError("config: unknown schedule kind '" + kind + "'");
  return StepsizeSchedule::geometric_decay(gamma0, horizon);
}

std::vector<double> gammas_for(Algorithm a, const std::vector<double>& grid, bool filter) {
  if (!filter) return grid;
  double limit = a == Algorithm::GlmTron ? 0.5 : 1.0;
  std::vector<double> out;
  for (double g : grid)
    if (g < limit) out.push_back(g);
  if (out.empty())
    throw ConfigError("config: gamma grid has no admissible entries for " + to_string(a));
  return out;
}

struct BestOverGamma {
  double gamma0 = 0.0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  std::int64_t diverged = 0;
  bool valid = false;
};

}  // namespace

std::uint64_t cell_seed(std::uint64_t base, Algorithm algorithm, std::int64_t n,
                        std::int64_t gamma_index, std::int64_t replicate) {
  return derive_seed(base, {static_cast<std::uint64_t>(algorithm) + 1,
                            static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(gamma_index),
                            static_cast<std::uint64_t>(replicate)});
}

ExperimentContext make_context(const Config& cfg, std::optional<std::string> out_dir,
                               std::optional<std::uint64_t> seed_override, int threads) {
  ExperimentContext ctx;
  ctx.cfg = cfg;
  ctx.out_dir = out_dir.value_or(cfg.get_string("output.dir", "out"));
  ctx.base_seed = seed_override.value_or(cfg.get_u64("experiment.seed", 12345));
  ctx.threads = threads < 1 ? 1 : threads;
  return ctx;
}

void write_rows_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  CsvWriter csv(path, {"experiment", "algorithm", "N", "gamma0", "replicate", "seed",
                       "excess_risk", "risk", "diverged", "wall_time_sec"});
  for (const ResultRow& r : rows) {
    csv.row({r.experiment, to_string(r.algorithm), std::to_string(r.n), fmt_double(r.gamma0),
             std::to_string(r.replicate), std::to_string(r.seed), fmt_double(r.excess_risk),
             fmt_double(r.risk), r.diverged ? "1" : "0", fmt_double(r.wall_time_sec)});
  }
}

// ---------------------------------------------------------------------------
// figure1
// ---------------------------------------------------------------------------

std::vector<Figure1Point> Figure1Result::curve(Algorithm a) const {
  std::vector<Figure1Point> out;
  for (const Figure1Point& p : summary)
    if (p.algorithm == a) out.push_back(p);
  std::sort(out.begin(), out.end(),
            [](const Figure1Point& x, const Figure1Point& y) { return x.n < y.n; });
  return out;
}

int Figure1Result::inversions(const std::vector<Figure1Point>& curve) {
  int count = 0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].mean_excess_risk > curve[i - 1].mean_excess_risk) ++count;
  return count;
}

Figure1Result run_figure1_grid(const ExperimentContext& ctx) {
  const Config& cfg = ctx.cfg;
  ProblemInstance problem = problem_from_config(cfg);
  ParameterVector w0 = vector_from_config(cfg, "experiment.w0", problem.dim(), "zeros", 0.5);
  std::vector<std::int64_t> sizes = cfg.get_int_list("experiment.sample_sizes");
  std::vector<double> gammas = cfg.get_double_list("experiment.gamma_grid");
  std::int64_t replicates = cfg.get_int("experiment.replicates", 20);
  if (replicates < 1) throw ConfigError("config: replicates must be >= 1");

  const Algorithm algos[2] = {Algorithm::GlmTron, Algorithm::Sgd};
  const std::int64_t cells =
      2 * static_cast<std::int64_t>(sizes.size()) * static_cast<std::int64_t>(gammas.size()) *
      replicates;
  std::vector<ResultRow> rows(cells);

  parallel_for(cells, ctx.threads, [&](std::int64_t idx) {
    std::int64_t rem = idx;
    const std::int64_t rep = rem % replicates;
    rem /= replicates;
    const std::int64_t gi = rem % static_cast<std::int64_t>(gammas.size());
    rem /= static_cast<std::int64_t>(gammas.size());
    const std::int64_t ni = rem % static_cast<std::int64_t>(sizes.size());
    const Algorithm algo = algos[rem / static_cast<std::int64_t>(sizes.size())];

    ResultRow row;
    row.experiment = "figure1";
    row.algorithm = algo;
    row.n = sizes[ni];
    row.gamma0 = gammas[gi];
    row.replicate = rep;
    row.seed = cell_seed(ctx.base_seed, algo, row.n, gi, rep);
    auto start = std::chrono::steady_clock::now();
    try {
      StepsizeSchedule schedule = make_schedule(cfg, row.gamma0, row.n);
      RunResult res = run_training(algo, problem, schedule, w0, SeededRng(row.seed));
      row.excess_risk = excess_risk_exact(problem, res.final_iterate);
      row.risk = row.excess_risk + problem.noise.sigma_sq;
    } catch (const DivergedRunError&) {
      row.diverged = true;
      row.excess_risk = std::numeric_limits<double>::quiet_NaN();
      row.risk = std::numeric_limits<double>::quiet_NaN();
    }
    row.wall_time_sec = elapsed_sec(start);
    rows[idx] = std::move(row);
  });

  Figure1Result result;
  result.rows = std::move(rows);

  for (Algorithm algo : algos) {
    for (std::size_t ni = 0; ni < sizes.size(); ++ni) {
      BestOverGamma best;
      for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        std::vector<double> vals;
        std::int64_t diverged = 0;
        for (const ResultRow& r : result.rows) {
          if (r.algorithm != algo || r.n != sizes[ni] || r.gamma0 != gammas[gi]) continue;
          if (r.diverged)
            ++diverged;
          else
            vals.push_back(r.excess_risk);
        }
        if (vals.empty()) continue;
        double m = mean_of(vals);
        if (!best.valid || m < best.mean) {
          best = {gammas[gi], m, diverged, true};
        }
      }
      Figure1Point p;
      p.algorithm = algo;
      p.n = sizes[ni];
      p.best_gamma0 = best.gamma0;
      p.mean_excess_risk = best.mean;
      p.diverged_count = best.diverged;
      result.summary.push_back(p);
    }
  }

  ensure_dir(ctx.out_dir);
  write_rows_csv(ctx.out_dir + "/figure1_rows.csv", result.rows);
  CsvWriter csv(ctx.out_dir + "/figure1_summary.csv",
                {"algorithm", "N", "best_gamma0", "mean_excess_risk", "diverged_count"});
  for (const Figure1Point& p : result.summary)
    csv.row({to_string(p.algorithm), std::to_string(p.n), fmt_double(p.best_gamma0),
             fmt_double(p.mean_excess_risk), std::to_string(p.diverged_count)});
  return result;
}

// ---------------------------------------------------------------------------
// traj2d
// ---------------------------------------------------------------------------

const Traj2dResult::Path& Traj2dResult::path(Algorithm a) const {
  for (const Path& p : paths)
    if (p.algorithm == a) return p;
  throw std::logic_error("trajectory for algorithm not recorded");
}

Traj2dResult run_trajectory_2d(const ExperimentContext& ctx) {
  const Config& cfg = ctx.cfg;
  ProblemInstance problem = problem_from_config(cfg);
  if (problem.dim() != 2)
    throw ConfigError("traj2d: the problem must be 2-dimensional");
  StepsizeSchedule schedule = schedule_from_config(cfg);
  Traj2dResult result;
  result.w0 = vector_from_config(cfg, "experiment.w0", 2, "zeros", 0.5);

  RunOptions options;
  options.record_trajectory = true;
  options.trajectory_stride = cfg.get_int("experiment.run.trajectory_stride", 1);

  ensure_dir(ctx.out_dir);
  for (Algorithm algo : {Algorithm::GlmTron, Algorithm::Sgd}) {
    std::uint64_t seed =
        derive_seed(ctx.base_seed, {static_cast<std::uint64_t>(algo) + 1});
    RunResult run = run_training(algo, problem, schedule, result.w0, SeededRng(seed), options);

    Traj2dResult::Path path;
    path.algorithm = algo;
    path.final_excess_risk = excess_risk_exact(problem, run.final_iterate);
    path.final_risk = path.final_excess_risk + problem.noise.sigma_sq;

    CsvWriter csv(ctx.out_dir + "/traj2d_" + to_string(algo) + ".csv",
                  {"t", "w_1", "w_2", "excess_risk"});
    for (const TrajectoryPoint& p : run.trajectory) {
      double excess = excess_risk_exact(problem, p.w);
      csv.row({std::to_string(p.t), fmt_double(p.w[0]), fmt_double(p.w[1]), fmt_double(excess)});
    }
    path.points = std::move(run.trajectory);
    result.paths.push_back(std::move(path));
  }
  return result;
}

// ---------------------------------------------------------------------------
// covcheck
// ---------------------------------------------------------------------------

CovSandwichResult run_cov_sandwich(const ExperimentContext& ctx) {
  const Config& cfg = ctx.cfg;
  ProblemInstance problem = problem_from_config(cfg);
  if (problem.distribution != Distribution::SymmetricBernoulli ||
      problem.noise.kind != NoiseKind::WellSpecified)
    throw ConfigError("covcheck: needs well-specified symmetric Bernoulli labels");
  StepsizeSchedule schedule = schedule_from_config(cfg);
  const std::int64_t n = schedule.horizon;
  std::vector<std::int64_t> checkpoints = cfg.get_int_list("experiment.checkpoints");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > n)
      throw ConfigError("covcheck: checkpoints must lie in [1, N]");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw ConfigError("covcheck: checkpoints must be strictly increasing");
  }
  const std::int64_t replicates = cfg.get_int("experiment.replicates", 2000);
  if (replicates < 2) throw ConfigError("covcheck: needs at least 2 replicates");
  ParameterVector w0 = vector_from_config(cfg, "experiment.w0", problem.dim(), "zeros", 0.5);

  const int d = problem.dim();
  const std::size_t c_count = checkpoints.size();
  // sq_err[rep][c][i] = (w_t[i] - w*_i)^2 at checkpoint c.
  std::vector<double> sq_err(static_cast<std::size_t>(replicates) * c_count * d);

  parallel_for(replicates, ctx.threads, [&](std::int64_t rep) {
    std::uint64_t seed = derive_seed(ctx.base_seed, {0xC0C0, static_cast<std::uint64_t>(rep)});
    std::size_t cursor = 0;
    double* slot = sq_err.data() + static_cast<std::size_t>(rep) * c_count * d;
    RunOptions options;
    options.observer = [&](std::int64_t t, const ParameterVector& w) {
      if (cursor < c_count && t == checkpoints[cursor]) {
        for (int i = 0; i < d; ++i) slot[cursor * d + i] = sq(w[i] - problem.w_star[i]);
        ++cursor;
      }
    };
    run_training(Algorithm::GlmTron, problem, schedule, w0, SeededRng(seed), options);
  });

  // Deterministic one-sided recursions for diag E (w_t - w*)^2:
  //   upper_t = (1 - gamma_t lambda_i / 2) upper_{t-1} + gamma_t^2 sigma^2 lambda_i
  //   lower_t = (1 - gamma_t lambda_i)     lower_{t-1} + gamma_t^2 sigma^2 lambda_i
  const double sigma_sq = problem.noise.sigma_sq;
  std::vector<double> upper(d), lower(d);
  for (int i = 0; i < d; ++i) upper[i] = lower[i] = sq(w0[i] - problem.w_star[i]);
  std::vector<double> upper_at(c_count * d), lower_at(c_count * d);
  std::size_t cursor = 0;
  for (std::int64_t t = 1; t <= n; ++t) {
    double gamma = stepsize_at(schedule, t);
    for (int i = 0; i < d; ++i) {
      double lam = problem.spectrum.eigenvalues[i];
      double noise = gamma * gamma * sigma_sq * lam;
      upper[i] = (1.0 - 0.5 * gamma * lam) * upper[i] + noise;
      lower[i] = (1.0 - gamma * lam) * lower[i] + noise;
    }
    if (cursor < c_count && t == checkpoints[cursor]) {
      std::copy(upper.begin(), upper.end(), upper_at.begin() + cursor * d);
      std::copy(lower.begin(), lower.end(), lower_at.begin() + cursor * d);
      ++cursor;
    }
  }

  CovSandwichResult result;
  ensure_dir(ctx.out_dir);
  CsvWriter csv(ctx.out_dir + "/covcheck.csv",
                {"checkpoint", "coord", "lambda", "empirical", "stderr", "lower", "upper",
                 "inside"});
  std::int64_t inside_count = 0;
  for (std::size_t c = 0; c < c_count; ++c) {
    for (int i = 0; i < d; ++i) {
      double mean = 0.0;
      for (std::int64_t rep = 0; rep < replicates; ++rep)
        mean += sq_err[static_cast<std::size_t>(rep) * c_count * d + c * d + i];
      mean /= static_cast<double>(replicates);
      double var = 0.0;
      for (std::int64_t rep = 0; rep < replicates; ++rep)
        var += sq(sq_err[static_cast<std::size_t>(rep) * c_count * d + c * d + i] - mean);
      var /= static_cast<double>(replicates - 1);
      double se = std::sqrt(var / static_cast<double>(replicates));

      CovSandwichCell cell;
      cell.checkpoint = checkpoints[c];
      cell.coord = i + 1;
      cell.lambda = problem.spectrum.eigenvalues[i];
      cell.empirical = mean;
      cell.stderr_mean = se;
      cell.lower = lower_at[c * d + i];
      cell.upper = upper_at[c * d + i];
      cell.inside = mean >= cell.lower - 3.0 * se && mean <= cell.upper + 3.0 * se;
      if (cell.inside) ++inside_count;
      csv.row({std::to_string(cell.checkpoint), std::to_string(cell.coord),
               fmt_double(cell.lambda), fmt_double(cell.empirical), fmt_double(cell.stderr_mean),
               fmt_double(cell.lower), fmt_double(cell.upper), cell.inside ? "1" : "0"});
      result.cells.push_back(cell);
    }
  }
  result.fraction_inside =
      static_cast<double>(inside_count) / static_cast<double>(result.cells.size());
  return result;
}

// ---------------------------------------------------------------------------
// sgdfail
// ---------------------------------------------------------------------------

SgdFailureResult run_sgd_failure(const ExperimentContext& ctx) {
  const Config& cfg = ctx.cfg;
  ProblemInstance base = problem_from_config(cfg);
  if (base.noise.kind != NoiseKind::Noiseless)
    throw ConfigError("sgdfail: the failure construction uses noiseless labels");
  StepsizeSchedule schedule = schedule_from_config(cfg);
  if (!(schedule.gamma0 < 1.0))
    throw ConfigError("sgdfail: gamma0 must satisfy gamma0 < 1");
  const std::int64_t trials = cfg.get_int("experiment.trials", 400);
  if (trials < 1) throw ConfigError("sgdfail: trials must be >= 1");
  ParameterVector w0 = vector_from_config(cfg, "experiment.w0", base.dim(), "zeros", 0.5);

  ParameterVector magnitudes = base.w_star;
  for (double& v : magnitudes) v = std::abs(v);

  std::vector<double> sgd_risks(trials), tron_risks(trials);
  parallel_for(trials, ctx.threads, [&](std::int64_t trial) {
    SeededRng sign_rng(derive_seed(ctx.base_seed, {0x5D5D, static_cast<std::uint64_t>(trial)}));
    ProblemInstance problem = base;
    for (std::size_t i = 0; i < problem.w_star.size(); ++i)
      problem.w_star[i] = sign_rng.uniform() < 0.5 ? magnitudes[i] : -magnitudes[i];
    for (Algorithm algo : {Algorithm::GlmTron, Algorithm::Sgd}) {
      std::uint64_t seed = derive_seed(
          ctx.base_seed,
          {0x5D5E, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(algo) + 1});
      RunResult run = run_training(algo, problem, schedule, w0, SeededRng(seed));
      double risk = risk_exact(problem, run.final_iterate);
      (algo == Algorithm::Sgd ? sgd_risks : tron_risks)[trial] = risk;
    }
  });

  SgdFailureResult result;
  result.trials = trials;
  result.sgd_mean_risk = mean_of(sgd_risks);
  result.tron_mean_risk = mean_of(tron_risks);
  result.bias_bound = bias_decay_norm(w0, magnitudes, base.spectrum, schedule, 0.5);
  result.risk_floor = 0.5 * h_quadratic_form(magnitudes, base.spectrum);

  ensure_dir(ctx.out_dir);
  CsvWriter csv(ctx.out_dir + "/sgdfail_rows.csv", {"trial", "algorithm", "risk"});
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    csv.row({std::to_string(trial), "glmtron", fmt_double(tron_risks[trial])});
    csv.row({std::to_string(trial), "sgd", fmt_double(sgd_risks[trial])});
  }
  nlohmann::ordered_json j;
  j["trials"] = trials;
  j["sgd_mean_risk"] = result.sgd_mean_risk;
  j["glmtron_mean_risk"] = result.tron_mean_risk;
  j["glmtron_bias_bound"] = result.bias_bound;
  j["risk_floor"] = result.risk_floor;
  write_text_file(ctx.out_dir + "/sgdfail_summary.json", j.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

namespace {
struct CompareInstance {
  std::string name;
  ProblemInstance problem;
  ParameterVector w0;
};

ParameterVector scaled_inverse_index(int d, double target_norm_sq) {
  ParameterVector v(d);
  double norm_sq = 0.0;
  for (int i = 0; i < d; ++i) {
    v[i] = 1.0 / static_cast<double>(i + 1);
    norm_sq += sq(v[i]);
  }
  double scale = std::sqrt(target_norm_sq / norm_sq);
  for (double& x : v) x *= scale;
  return v;
}

std::vector<CompareInstance> build_compare_suite(double sigma_sq) {
  if (!(sigma_sq > 0.0))
    throw ConfigError("compare: the instance class requires sigma_sq > 0");
  const double sigma = std::sqrt(sigma_sq);
  std::vector<CompareInstance> suite;

  {
    CompareInstance inst;
    inst.name = "explicit2d";
    std::vector<double> values = {0.8, 0.2};
    inst.problem.distribution = Distribution::SymmetricBernoulli;
    inst.problem.spectrum = build_spectrum(SpectrumKind::Explicit, 0.0, 2, false, &values);
    inst.problem.w_star = {0.7 * sigma, -0.7 * sigma};
    inst.problem.noise = NoiseModel::well_specified(sigma_sq);
    inst.w0 = inst.problem.w_star;
    suite.push_back(std::move(inst));
  }
  {
    CompareInstance inst;
    inst.name = "power1";
    inst.problem.distribution = Distribution::SymmetricBernoulli;
    inst.problem.spectrum = build_spectrum(SpectrumKind::PowerLaw, 1.0, 64, true);
    inst.problem.w_star = scaled_inverse_index(64, 2.0 * sigma_sq);
    inst.problem.noise = NoiseModel::well_specified(sigma_sq);
    inst.w0 = inst.problem.w_star;
    for (double& v : inst.w0) v *= 0.5;  // ||w0 - w*||^2 = sigma^2 / 2
    suite.push_back(std::move(inst));
  }
  {
    CompareInstance inst;
    inst.name = "power2";
    inst.problem.distribution = Distribution::SymmetricBernoulli;
    inst.problem.spectrum = build_spectrum(SpectrumKind::PowerLaw, 2.0, 64, true);
    inst.problem.w_star = scaled_inverse_index(64, 0.8 * sigma_sq);
    inst.problem.noise = NoiseModel::well_specified(sigma_sq);
    inst.w0.assign(64, 0.0);
    suite.push_back(std::move(inst));
  }
  {
    CompareInstance inst;
    inst.name = "geometric";
    inst.problem.distribution = Distribution::SymmetricBernoulli;
    inst.problem.spectrum = build_spectrum(SpectrumKind::Geometric, 0.0, 30, true);
    inst.problem.w_star = scaled_inverse_index(30, 4.0 * sigma_sq);
    inst.problem.noise = NoiseModel::well_specified(sigma_sq);
    inst.w0 = inst.problem.w_star;
    inst.w0[0] += 0.5 * sigma;
    inst.w0[1] -= 0.4 * sigma;  // ||w0 - w*||^2 = 0.41 sigma^2
    suite.push_back(std::move(inst));
  }
  {
    CompareInstance inst;
    inst.name = "logpoly";
    inst.problem.distribution = Distribution::SymmetricBernoulli;
    inst.problem.spectrum = build_spectrum(SpectrumKind::LogPoly, 2.0, 64, true);
    inst.problem.w_star = scaled_inverse_index(64, 0.9 * sigma_sq);
    inst.problem.noise = NoiseModel::well_specified(sigma_sq);
    inst.w0.assign(64, 0.0);
    suite.push_back(std::move(inst));
  }

  for (const CompareInstance& inst : suite) {
    inst.problem.validate();
    double dist_sq = 0.0;
    for (std::size_t i = 0; i < inst.w0.size(); ++i)
      dist_sq += sq(inst.w0[i] - inst.problem.w_star[i]);
    if (dist_sq > sigma_sq)
      throw std::logic_error("compare: instance " + inst.name + " violates ||w0-w*||^2 <= sigma^2");
  }
  return suite;
}
}  // namespace

TronVsSgdResult run_tron_vs_sgd(const ExperimentContext& ctx) {
  const Config& cfg = ctx.cfg;
  const double sigma_sq = cfg.get_double("experiment.sigma_sq", 1.0);
  std::vector<CompareInstance> suite = build_compare_suite(sigma_sq);
  const std::int64_t n = cfg.get_int("schedule.schedule.N");
  std::vector<double> grid = cfg.get_double_list("experiment.gamma_grid");
  const std::int64_t replicates = cfg.get_int("experiment.replicates", 24);
  if (replicates < 1) throw ConfigError("compare: replicates must be >= 1");

  TronVsSgdResult result;
  std::vector<ResultRow> rows;
  for (std::size_t inst_idx = 0; inst_idx < suite.size(); ++inst_idx) {
    const CompareInstance& inst = suite[inst_idx];
    TronVsSgdInstance summary;
    summary.name = inst.name;
    summary.sigma_sq = sigma_sq;
    for (std::size_t i = 0; i < inst.w0.size(); ++i)
      summary.initial_dist_sq += sq(inst.w0[i] - inst.problem.w_star[i]);

    for (Algorithm algo : {Algorithm::GlmTron, Algorithm::Sgd}) {
      std::vector<double> gammas = gammas_for(algo, grid, true);
      const std::int64_t cells = static_cast<std::int64_t>(gammas.size()) * replicates;
      std::vector<double> excess(cells);
      parallel_for(cells, ctx.threads, [&](std::int64_t idx) {
        const std::int64_t gi = idx / replicates;
        const std::int64_t rep = idx % replicates;
        std::uint64_t seed = derive_seed(
            ctx.base_seed, {0xCE11, inst_idx, static_cast<std::uint64_t>(algo) + 1,
                            static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(rep)});
        StepsizeSchedule schedule = make_schedule(cfg, gammas[gi], n);
        RunResult run = run_training(algo, inst.problem, schedule, inst.w0, SeededRng(seed));
        excess[idx] = excess_risk_exact(inst.problem, run.final_iterate);
      });
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        double acc = 0.0;
        for (std::int64_t rep = 0; rep < replicates; ++rep)
          acc += excess[static_cast<std::int64_t>(gi) * replicates + rep];
        best = std::min(best, acc / static_cast<double>(replicates));
        for (std::int64_t rep = 0; rep < replicates; ++rep) {
          ResultRow row;
          row.experiment = "compare/" + inst.name;
          row.algorithm = algo;
          row.n = n;
          row.gamma0 = gammas[gi];
          row.replicate = rep;
          row.seed = derive_seed(
              ctx.base_seed, {0xCE11, inst_idx, static_cast<std::uint64_t>(algo) + 1,
                              static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(rep)});
          row.excess_risk = excess[static_cast<std::int64_t>(gi) * replicates + rep];
          row.risk = row.excess_risk + sigma_sq;
          rows.push_back(row);
        }
      }
      if (algo == Algorithm::GlmTron)
        summary.tron_best = best;
      else
        summary.sgd_best = best;
    }
    summary.ratio = summary.tron_best / summary.sgd_best;
    result.instances.push_back(summary);
  }

  ensure_dir(ctx.out_dir);
  write_rows_csv(ctx.out_dir + "/compare_rows.csv", rows);
  CsvWriter csv(ctx.out_dir + "/compare_summary.csv",
                {"instance", "sigma_sq", "initial_dist_sq", "glmtron_best", "sgd_best", "ratio"});
  for (const TronVsSgdInstance& inst : result.instances)
    csv.row({inst.name, fmt_double(inst.sigma_sq), fmt_double(inst.initial_dist_sq),
             fmt_double(inst.tron_best), fmt_double(inst.sgd_best), fmt_double(inst.ratio)});
  return result;
}

// ---------------------------------------------------------------------------
// rateslope
// ---------------------------------------------------------------------------

RateSlopeResult run_rate_slope(const ExperimentContext& ctx) {
  const Config& cfg = ctx.cfg;
  ProblemInstance problem = problem_from_config(cfg);
  ParameterVector w0 = vector_from_config(cfg, "experiment.w0", problem.dim(), "zeros", 0.5);
  std::vector<std::int64_t> sizes = cfg.get_int_list("experiment.sample_sizes");
  if (sizes.size() < 3) throw ConfigError("rateslope: need at least 3 sample sizes");
  Algorithm algo = algorithm_from_string(cfg.get_string("experiment.algo", "glmtron"));
  std::vector<double> gammas = gammas_for(algo, cfg.get_double_list("experiment.gamma_grid"), true);
  const std::int64_t replicates = cfg.get_int("experiment.replicates", 10);
  if (replicates < 1) throw ConfigError("rateslope: replicates must be >= 1");

  const std::int64_t cells = static_cast<std::int64_t>(sizes.size()) *
                             static_cast<std::int64_t>(gammas.size()) * replicates;
  std::vector<double> excess(cells);
  parallel_for(cells, ctx.threads, [&](std::int64_t idx) {
    std::int64_t rem = idx;
    const std::int64_t rep = rem % replicates;
    rem /= replicates;
    const std::int64_t gi = rem % static_cast<std::int64_t>(gammas.size());
    const std::int64_t ni = rem / static_cast<std::int64_t>(gammas.size());
    std::uint64_t seed = cell_seed(ctx.base_seed ^ 0xA7A7, algo, sizes[ni], gi, rep);
    StepsizeSchedule schedule = make_schedule(cfg, gammas[gi], sizes[ni]);
    RunResult run = run_training(algo, problem, schedule, w0, SeededRng(seed));
    excess[idx] = excess_risk_exact(problem, run.final_iterate);
  });

  RateSlopeResult result;
  for (std::size_t ni = 0; ni < sizes.size(); ++ni) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
      double acc = 0.0;
      for (std::int64_t rep = 0; rep < replicates; ++rep) {
        std::int64_t idx =
            (static_cast<std::int64_t>(ni) * static_cast<std::int64_t>(gammas.size()) +
             static_cast<std::int64_t>(gi)) *
                replicates +
            rep;
        acc += excess[idx];
      }
      best = std::min(best, acc / static_cast<double>(replicates));
    }
    result.points.push_back({sizes[ni], best});
  }

  double x_mean = 0.0, y_mean = 0.0;
  for (const RateSlopePoint& p : result.points) {
    x_mean += std::log2(static_cast<double>(p.n));
    y_mean += std::log2(p.best_mean_excess);
  }
  x_mean /= static_cast<double>(result.points.size());
  y_mean /= static_cast<double>(result.points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const RateSlopePoint& p : result.points) {
    double dx = std::log2(static_cast<double>(p.n)) - x_mean;
    double dy = std::log2(p.best_mean_excess) - y_mean;
    sxx += dx * dx;
    sxy += dx * dy;
  }
  result.slope = sxy / sxx;

  ensure_dir(ctx.out_dir);
  CsvWriter csv(ctx.out_dir + "/rateslope.csv", {"N", "best_mean_excess"});
  for (const RateSlopePoint& p : result.points)
    csv.row({std::to_string(p.n), fmt_double(p.best_mean_excess)});
  nlohmann::ordered_json j;
  j["slope"] = result.slope;
  write_text_file(ctx.out_dir + "/rateslope_summary.json", j.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// misspec
// ---------------------------------------------------------------------------

MisspecPlateauResult run_misspecified_plateau(const ExperimentContext& ctx) {
  const Config& cfg = ctx.cfg;
  ProblemInstance problem = problem_from_config(cfg);
  if (problem.noise.kind != NoiseKind::Misspecified)
    throw ConfigError("misspec: needs misspecified labels");
  const double alpha = cfg.get_double("experiment.alpha", 3.0);
  const double trace = problem.spectrum.trace();
  std::vector<std::int64_t> sizes = cfg.get_int_list("experiment.sample_sizes");
  std::vector<double> gammas = {cfg.get_double("schedule.schedule.gamma0")};
  if (!(gammas[0] < 1.0 / (8.0 * alpha * trace)))
    throw ConfigError("misspec: gamma0 must satisfy gamma0 < 1/(8 alpha tr(H))");
  const std::int64_t replicates = cfg.get_int("experiment.replicates", 4);
  const std::int64_t mc_samples = cfg.get_int("experiment.mc_samples", 200000);
  ParameterVector w0 = vector_from_config(cfg, "experiment.w0", problem.dim(), "zeros", 0.5);

  MisspecPlateauResult result;
  {
    RiskReport opt = risk_monte_carlo(problem, problem.w_star, mc_samples,
                                      SeededRng(derive_seed(ctx.base_seed, {0xA0A0})));
    result.opt_proxy_mc = opt.risk;
    result.opt_proxy_se = opt.stderr_risk.value_or(0.0);
  }
  {
    const double eta = problem.noise.corruption_prob;
    const double c = problem.noise.corruption_value;
    const double b_sq = h_quadratic_form(problem.w_star, problem.spectrum);
    double mean_relu;  // E relu(x . w*)
    if (problem.distribution == Distribution::Gaussian) {
      mean_relu = std::sqrt(b_sq) / std::sqrt(2.0 * 3.141592653589793238462643383279502884);
    } else {
      mean_relu = 0.0;
      for (std::size_t i = 0; i < problem.w_star.size(); ++i)
        mean_relu += 0.5 * problem.spectrum.eigenvalues[i] * std::abs(problem.w_star[i]);
    }
    result.opt_semi_analytic = eta * (0.5 * b_sq - 2.0 * c * mean_relu + c * c);
  }

  for (std::int64_t n : sizes) {
    std::vector<double> risks(replicates);
    parallel_for(replicates, ctx.threads, [&](std::int64_t rep) {
      std::uint64_t seed = derive_seed(ctx.base_seed, {0xA1A1, static_cast<std::uint64_t>(n),
                                                       static_cast<std::uint64_t>(rep)});
      StepsizeSchedule schedule = make_schedule(cfg, gammas[0], n);
      RunResult run =
          run_training(Algorithm::GlmTron, problem, schedule, w0, SeededRng(seed));
      std::uint64_t mc_seed = derive_seed(ctx.base_seed, {0xA2A2, static_cast<std::uint64_t>(n),
                                                          static_cast<std::uint64_t>(rep)});
      risks[rep] =
          risk_monte_carlo(problem, run.final_iterate, mc_samples, SeededRng(mc_seed)).risk;
    });
    MisspecPlateauPoint point;
    point.n = n;
    point.mean_risk = mean_of(risks);
    point.ratio_to_opt =
        result.opt_proxy_mc > 0.0 ? point.mean_risk / result.opt_proxy_mc
                                  : std::numeric_limits<double>::quiet_NaN();
    result.points.push_back(point);
  }
  result.final_ratio = result.points.back().ratio_to_opt;

  ensure_dir(ctx.out_dir);
  CsvWriter csv(ctx.out_dir + "/misspec.csv", {"N", "mean_risk", "ratio_to_opt"});
  for (const MisspecPlateauPoint& p : result.points)
    csv.row({std::to_string(p.n), fmt_double(p.mean_risk), fmt_double(p.ratio_to_opt)});
  nlohmann::ordered_json j;
  j["opt_proxy_mc"] = result.opt_proxy_mc;
  j["opt_proxy_se"] = result.opt_proxy_se;
  j["opt_semi_analytic"] = result.opt_semi_analytic;
  j["final_ratio"] = result.final_ratio;
  write_text_file(ctx.out_dir + "/misspec_summary.json", j.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// sandwich scan
// ---------------------------------------------------------------------------

SandwichScanResult run_sandwich_scan(const ExperimentContext& ctx) {
  const Config& cfg = ctx.cfg;
  const std::int64_t pairs = cfg.get_int("experiment.pairs", 10000);
  if (pairs < 1) throw ConfigError("sandwich: pairs must be >= 1");

  ensure_dir(ctx.out_dir);
  CsvWriter csv(ctx.out_dir + "/sandwich.csv",
                {"trial", "dist", "h_dist_sq", "lower", "excess_risk", "upper", "holds"});
  SandwichScanResult result;
  std::int64_t trial_counter = 0;

  auto scan_one = [&](const ProblemInstance& problem, const ParameterVector& w) {
    RiskReport rep = landscape_report(problem, w);
    ++result.total;
    if (rep.sandwich_holds) ++result.holds;
    csv.row({std::to_string(trial_counter++), to_string(problem.distribution),
             fmt_double(rep.h_dist_sq), fmt_double(rep.sandwich_lower),
             fmt_double(rep.excess_risk), fmt_double(rep.h_dist_sq),
             rep.sandwich_holds ? "1" : "0"});
  };

  for (Distribution dist : {Distribution::SymmetricBernoulli, Distribution::Gaussian}) {
    const int max_d = dist == Distribution::SymmetricBernoulli ? 16 : 8;
    for (std::int64_t trial = 0; trial < pairs; ++trial) {
      SeededRng rng(derive_seed(ctx.base_seed, {0xD0D0 + static_cast<std::uint64_t>(dist),
                                                static_cast<std::uint64_t>(trial)}));
      int d = 1 + static_cast<int>(rng.uniform() * max_d);
      if (d > max_d) d = max_d;
      std::vector<double> values(d);
      for (double& v : values) v = 0.05 + rng.uniform();
      std::sort(values.begin(), values.end(), std::greater<double>());
      ProblemInstance problem;
      problem.distribution = dist;
      problem.spectrum = build_spectrum(SpectrumKind::Explicit, 0.0, d,
                                        dist == Distribution::SymmetricBernoulli, &values);
      problem.w_star.resize(d);
      for (double& v : problem.w_star) v = 4.0 * rng.uniform() - 2.0;
      problem.noise = NoiseModel::noiseless();
      ParameterVector w(d);
      for (double& v : w) v = 4.0 * rng.uniform() - 2.0;
      scan_one(problem, w);

      // Saturating pair: w = -w* meets the lower edge exactly.
      if (trial == 0) {
        ParameterVector mirrored(d);
        for (int i = 0; i < d; ++i) mirrored[i] = -problem.w_star[i];
        scan_one(problem, mirrored);
      }
    }
  }
  result.all_hold = result.holds == result.total;
  return result;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

BoundReport run_bounds(const ExperimentContext& ctx) {
  const Config& cfg = ctx.cfg;
  ProblemInstance problem = problem_from_config(cfg);
  TheoremId id = theorem_id_from_string(cfg.get_string("experiment.theorem"));
  double gamma0 = cfg.get_double("schedule.schedule.gamma0");
  std::int64_t n = cfg.get_int("schedule.schedule.N");
  ParameterVector w0 = vector_from_config(cfg, "experiment.w0", problem.dim(), "zeros", 0.5);

  std::optional<int> k;
  if (cfg.has("experiment.k")) k = static_cast<int>(cfg.get_int("experiment.k"));
  std::optional<HypercontractivityParams> hyper;
  if (cfg.has("experiment.alpha") || cfg.has("experiment.beta")) {
    HypercontractivityParams h;
    h.alpha = cfg.get_double("experiment.alpha", 3.0);
    h.beta = cfg.get_double("experiment.beta", 1.0);
    hyper = h;
  }
  std::optional<double> opt_proxy;
  if (cfg.has("experiment.opt_proxy")) opt_proxy = cfg.get_double("experiment.opt_proxy");

  return theorem_bound(id, problem, w0, gamma0, n, k, hyper, opt_proxy);
}

std::string bound_report_to_json(const BoundReport& report) {
  nlohmann::ordered_json j;
  j["theorem"] = to_string(report.theorem_id);
  j["n_eff"] = report.n_eff;
  j["k_star"] = report.k;
  j["d_eff"] = report.d_eff;
  j["bias"] = report.bias_term;
  j["variance"] = report.variance_term;
  j["extras"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : report.extra_terms) j["extras"][name] = value;
  j["total"] = report.total;
  return j.dump(2) + "\n";
}

}  // namespace relulab
