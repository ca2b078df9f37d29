#include "relu_lab/optimizers.hpp"

#include <cmath>
#include <iostream>

namespace relulab {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::GlmTron: return "glmtron";
    case Algorithm::Sgd: return "sgd";
  }
  throw std::logic_error("unknown algorithm");
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "glmtron") return Algorithm::GlmTron;
  if (s == "sgd") return Algorithm::Sgd;
  throw std::invalid_argument("unknown algorithm: " + s);
}

DivergedRunError::DivergedRunError(std::int64_t step_index)
    : std::runtime_error("run diverged at step " + std::to_string(step_index)),
      step(step_index) {}

// Both algorithms share this arithmetic; SGD additionally gates the whole
// update on x.w > 0, so whenever the preactivation is positive the two
// updates are bitwise identical.
static void apply_update(ParameterVector& w, const FeatureSample& x, double y, double gamma,
                         bool gate_on_positive) {
  double pre = x.dot(w);
  if (gate_on_positive && !(pre > 0.0)) return;
  double scale = gamma * (relu(pre) - y);
  if (scale == 0.0) return;
  if (x.sparse) {
    w[x.index] -= scale * x.sign;
  } else {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= scale * x.coords[i];
  }
}

static void check_feature_dim(const FeatureSample& x, std::size_t d) {
  if (x.sparse) {
    if (x.index < 0 || static_cast<std::size_t>(x.index) >= d)
      throw std::invalid_argument("feature index out of range");
  } else if (x.coords.size() != d) {
    throw std::invalid_argument("feature dimension mismatch");
  }
}

ParameterVector glmtron_step(const ParameterVector& w, const FeatureSample& x, double y,
                             double gamma) {
  check_feature_dim(x, w.size());
  ParameterVector next = w;
  apply_update(next, x, y, gamma, false);
  return next;
}

ParameterVector sgd_step(const ParameterVector& w, const FeatureSample& x, double y,
                         double gamma) {
  check_feature_dim(x, w.size());
  ParameterVector next = w;
  apply_update(next, x, y, gamma, true);
  return next;
}

static void check_divergence(const ParameterVector& w, const FeatureSample& x, std::int64_t t) {
  auto bad = [](double v) { return !std::isfinite(v) || std::abs(v) > kDivergenceLimit; };
  if (x.sparse) {
    if (bad(w[x.index])) throw DivergedRunError(t);
    return;
  }
  for (double v : w)
    if (bad(v)) throw DivergedRunError(t);
}

template <typename NextExample>
static RunResult run_core(Algorithm algorithm, const ProblemInstance& problem,
                          const StepsizeSchedule& schedule, ParameterVector w0,
                          std::uint64_t seed_label, NextExample&& next_example,
                          const RunOptions& options) {
  problem.validate();
  const std::size_t d = w0.size();
  if (static_cast<int>(d) != problem.dim())
    throw std::invalid_argument("run_training: w0 dimension does not match problem");
  if (options.trajectory_stride < 1)
    throw std::invalid_argument("run_training: trajectory stride must be >= 1");
  if (options.average != AverageMode::None && schedule.kind == ScheduleKind::GeometricDecay)
    std::cerr << "warning: iterate averaging is calibrated for constant stepsizes\n";

  const std::int64_t n = schedule.horizon;
  const bool keep_vectors = d <= 8;
  const bool gate = algorithm == Algorithm::Sgd;

  RunResult result;
  result.seed = seed_label;
  ParameterVector w = std::move(w0);

  auto record = [&](std::int64_t t) {
    TrajectoryPoint p;
    p.t = t;
    ParameterVector diff(d);
    for (std::size_t i = 0; i < d; ++i) diff[i] = w[i] - problem.w_star[i];
    p.h_dist_sq = h_quadratic_form(diff, problem.spectrum);
    if (keep_vectors) p.w = w;
    result.trajectory.push_back(std::move(p));
  };

  ParameterVector average_acc;
  std::int64_t average_count = 0;
  // Iterates w_0 .. w_{n-1} enter the average; Tail keeps the last ceil(n/2).
  const std::int64_t tail_start = n / 2;
  if (options.average != AverageMode::None) average_acc.assign(d, 0.0);

  if (options.record_trajectory) record(0);

  for (std::int64_t t = 1; t <= n; ++t) {
    if (options.average == AverageMode::Full ||
        (options.average == AverageMode::Tail && t - 1 >= tail_start)) {
      for (std::size_t i = 0; i < d; ++i) average_acc[i] += w[i];
      ++average_count;
    }
    LabeledExample ex = next_example();
    check_feature_dim(ex.feature, d);
    apply_update(w, ex.feature, ex.label, stepsize_at(schedule, t), gate);
    check_divergence(w, ex.feature, t);
    if (options.observer) options.observer(t, w);
    if (options.record_trajectory && (t % options.trajectory_stride == 0 || t == n)) record(t);
  }

  if (options.average != AverageMode::None) {
    if (average_count > 0) {
      for (double& v : average_acc) v /= static_cast<double>(average_count);
      result.averaged_iterate = std::move(average_acc);
    } else {
      result.averaged_iterate = w;
    }
  }
  result.steps_taken = n;
  result.final_iterate = std::move(w);
  return result;
}

RunResult run_training(Algorithm algorithm, const ProblemInstance& problem,
                       const StepsizeSchedule& schedule, ParameterVector w0, SeededRng rng,
                       const RunOptions& options) {
  FeatureSampler sampler(problem);
  auto next = [&]() { return draw_example(problem, sampler, rng); };
  return run_core(algorithm, problem, schedule, std::move(w0), rng.seed(), next, options);
}

RunResult run_training_on(Algorithm algorithm, const ProblemInstance& problem,
                          const StepsizeSchedule& schedule, ParameterVector w0,
                          std::span<const LabeledExample> examples, const RunOptions& options) {
  if (static_cast<std::int64_t>(examples.size()) != schedule.horizon)
    throw std::invalid_argument("run_training_on: example count must equal the horizon");
  std::size_t pos = 0;
  auto next = [&]() { return examples[pos++]; };
  return run_core(algorithm, problem, schedule, std::move(w0), 0, next, options);
}

}  // namespace relulab
