#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "relu_lab/data_gen.hpp"
#include "relu_lab/model.hpp"
#include "relu_lab/rng.hpp"

namespace relulab {

enum class Algorithm { GlmTron, Sgd };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

enum class AverageMode { None, Full, Tail };

struct RunOptions {
  bool record_trajectory = false;
  std::int64_t trajectory_stride = 1;
  AverageMode average = AverageMode::None;
  // Called after every step with (t, current iterate). Used by experiments
  // that need per-step coordinate access without storing full trajectories.
  std::function<void(std::int64_t, const ParameterVector&)> observer;
};

// Trajectory rows store scalar summaries; the full iterate is kept only for
// d <= 8 to bound memory on long runs.
struct TrajectoryPoint {
  std::int64_t t = 0;
  double h_dist_sq = 0.0;  // ||w - w*||_H^2
  ParameterVector w;       // empty when d > 8
};

struct RunResult {
  ParameterVector final_iterate;
  std::optional<ParameterVector> averaged_iterate;
  std::vector<TrajectoryPoint> trajectory;
  std::uint64_t seed = 0;
  std::int64_t steps_taken = 0;
};

// Thrown when an iterate exceeds the divergence guard (sup-norm > 1e12) or
// turns non-finite. Carries the offending step index.
struct DivergedRunError : std::runtime_error {
  std::int64_t step;
  explicit DivergedRunError(std::int64_t step_index);
};

inline constexpr double kDivergenceLimit = 1e12;

// Single updates, pure form: return the next iterate, inputs untouched.
// GLM-tron:  w - gamma * (relu(x.w) - y) * x
// SGD:       same, multiplied by the indicator 1[x.w > 0] (relu'(0) = 0).
ParameterVector glmtron_step(const ParameterVector& w, const FeatureSample& x, double y,
                             double gamma);
ParameterVector sgd_step(const ParameterVector& w, const FeatureSample& x, double y,
                         double gamma);

// Runs `schedule.horizon` steps drawing i.i.d. examples from the problem.
// Output is the last iterate w_N; averaged_iterate (when requested) is
// (1/N) * sum of w_0 .. w_{N-1} for Full, or the mean of the last ceil(N/2)
// of those iterates for Tail. N = 0 returns w0 unchanged.
RunResult run_training(Algorithm algorithm, const ProblemInstance& problem,
                       const StepsizeSchedule& schedule, ParameterVector w0, SeededRng rng,
                       const RunOptions& options = {});

// Same loop over a caller-supplied example sequence; examples.size() must
// equal schedule.horizon. Used by tests that force specific sample paths.
RunResult run_training_on(Algorithm algorithm, const ProblemInstance& problem,
                          const StepsizeSchedule& schedule, ParameterVector w0,
                          std::span<const LabeledExample> examples,
                          const RunOptions& options = {});

}  // namespace relulab
