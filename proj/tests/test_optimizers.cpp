#include <doctest.h>

#include <cmath>
#include <vector>

#include "relu_lab/optimizers.hpp"
#include "relu_lab/risk.hpp"

using namespace relulab;

namespace {

FeatureSample basis(int index, double sign) {
  FeatureSample x;
  x.sparse = true;
  x.index = index;
  x.sign = sign;
  return x;
}

FeatureSample dense(std::vector<double> coords) {
  FeatureSample x;
  x.coords = std::move(coords);
  return x;
}

ProblemInstance bernoulli(std::vector<double> lambda, ParameterVector w_star,
                          NoiseModel noise = NoiseModel::noiseless()) {
  ProblemInstance p;
  p.distribution = Distribution::SymmetricBernoulli;
  p.spectrum = build_spectrum(SpectrumKind::Explicit, 0.0, static_cast<int>(lambda.size()),
                              false, &lambda);
  p.w_star = std::move(w_star);
  p.noise = noise;
  p.validate();
  return p;
}

}  // namespace

TEST_CASE("glmtron step hand traces") {
  ParameterVector w = {1.0, 0.0};
  ParameterVector next = glmtron_step(w, basis(0, 1.0), 2.0, 0.5);
  CHECK(next == ParameterVector{1.5, 0.0});

  next = glmtron_step(w, basis(0, -1.0), 1.0, 0.5);
  CHECK(next == ParameterVector{0.5, 0.0});

  next = glmtron_step(w, basis(0, 1.0), 1.0, 0.5);  // zero residual
  CHECK(next == w);
}

TEST_CASE("sgd step gating") {
  ParameterVector w = {1.0, 0.0};
  CHECK(sgd_step(w, basis(0, 1.0), 2.0, 0.5) == ParameterVector{1.5, 0.0});

  ParameterVector neg = {-1.0, 0.0};
  CHECK(sgd_step(neg, basis(0, 1.0), 1.0, 0.5) == neg);  // x.w = -1, gated

  ParameterVector zero = {0.0, 0.0};
  CHECK(sgd_step(zero, basis(0, 1.0), 3.0, 0.5) == zero);  // x.w = 0, gated
  CHECK(sgd_step(zero, basis(1, -1.0), 3.0, 0.5) == zero);
}

TEST_CASE("glmtron and sgd agree bitwise on active preactivations") {
  SeededRng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    ParameterVector w = {rng.uniform() + 0.1, rng.uniform() - 0.5};
    FeatureSample x = trial % 2 == 0 ? basis(trial % 4 / 2, 1.0)
                                     : dense({rng.uniform() + 0.1, rng.uniform()});
    if (x.dot(w) <= 0.0) continue;
    double y = rng.normal();
    double gamma = 0.25 * (rng.uniform() + 0.1);
    ParameterVector a = glmtron_step(w, x, y, gamma);
    ParameterVector b = sgd_step(w, x, y, gamma);
    CHECK(a == b);
  }
}

TEST_CASE("sparse steps touch one coordinate") {
  ParameterVector w = {0.3, -0.2, 0.7};
  ParameterVector next = glmtron_step(w, basis(1, -1.0), 0.4, 0.5);
  CHECK(next[0] == w[0]);
  CHECK(next[2] == w[2]);
  CHECK(next[1] != w[1]);
}

TEST_CASE("forced trace reproduces the two step hand computation") {
  ProblemInstance p = bernoulli({1.0}, {1.0});
  StepsizeSchedule sched = StepsizeSchedule::constant(0.5, 2);

  std::vector<LabeledExample> examples(2);
  for (auto& ex : examples) {
    ex.feature = basis(0, 1.0);
    ex.label = 1.0;
    ex.clean_mean = 1.0;
  }

  std::vector<ParameterVector> seen;
  RunOptions options;
  options.observer = [&](std::int64_t, const ParameterVector& w) { seen.push_back(w); };
  options.average = AverageMode::Full;
  RunResult res = run_training_on(Algorithm::GlmTron, p, sched, {0.0}, examples, options);

  REQUIRE(seen.size() == 2);
  CHECK(seen[0] == ParameterVector{0.5});
  CHECK(seen[1] == ParameterVector{0.75});
  CHECK(res.final_iterate == ParameterVector{0.75});
  CHECK(res.steps_taken == 2);
  REQUIRE(res.averaged_iterate.has_value());
  CHECK((*res.averaged_iterate)[0] == 0.25);  // (w_0 + w_1)/2 = (0 + 0.5)/2
}

TEST_CASE("tail average covers the last half of w_0..w_{N-1}") {
  ProblemInstance p = bernoulli({1.0}, {1.0});
  StepsizeSchedule sched = StepsizeSchedule::constant(0.5, 4);
  std::vector<LabeledExample> examples(4);
  for (auto& ex : examples) {
    ex.feature = basis(0, 1.0);
    ex.label = 1.0;
    ex.clean_mean = 1.0;
  }
  RunOptions options;
  options.average = AverageMode::Tail;
  RunResult res = run_training_on(Algorithm::GlmTron, p, sched, {0.0}, examples, options);
  // iterates w_0..w_3 = 0, 0.5, 0.75, 0.875; tail = mean(w_2, w_3)
  REQUIRE(res.averaged_iterate.has_value());
  CHECK((*res.averaged_iterate)[0] == doctest::Approx(0.8125).epsilon(1e-15));
}

TEST_CASE("zero horizon returns the start point") {
  ProblemInstance p = bernoulli({1.0}, {1.0});
  StepsizeSchedule sched = StepsizeSchedule::constant(0.5, 0);
  RunResult res = run_training(Algorithm::GlmTron, p, sched, {0.25}, SeededRng(1));
  CHECK(res.final_iterate == ParameterVector{0.25});
  CHECK(res.steps_taken == 0);
}

TEST_CASE("sgd from the origin never moves") {
  ProblemInstance p = bernoulli({0.8, 0.2}, {1.0, -1.0}, NoiseModel::noiseless());
  StepsizeSchedule sched = StepsizeSchedule::geometric_decay(0.25, 500);
  RunResult res = run_training(Algorithm::Sgd, p, sched, {0.0, 0.0}, SeededRng(15));
  CHECK(res.final_iterate == ParameterVector{0.0, 0.0});
}

TEST_CASE("sgd absorption keeps wrong-signed coordinates trapped") {
  // Noiseless Bernoulli, gamma < 1: if w*_i >= 0 and w_0[i] <= 0 then
  // w_t[i] <= 0 along the whole path, and symmetrically.
  ProblemInstance p = bernoulli({0.6, 0.4}, {1.0, -0.5});
  StepsizeSchedule sched = StepsizeSchedule::geometric_decay(0.9, 2000);
  RunOptions options;
  bool trapped = true;
  options.observer = [&](std::int64_t, const ParameterVector& w) {
    if (w[0] > 0.0 || w[1] < 0.0) trapped = false;
  };
  run_training(Algorithm::Sgd, p, sched, {-0.5, 0.5}, SeededRng(77), options);
  CHECK(trapped);
}

TEST_CASE("glmtron converges on the noiseless 2d instance") {
  ProblemInstance p = bernoulli({0.8, 0.2}, {1.0, -1.0});
  StepsizeSchedule sched = StepsizeSchedule::geometric_decay(0.25, 5000);
  RunResult res = run_training(Algorithm::GlmTron, p, sched, {0.5, 0.5}, SeededRng(5));
  CHECK(excess_risk_exact(p, res.final_iterate) <= 1e-12);
}

TEST_CASE("trajectory recording honors stride and endpoints") {
  ProblemInstance p = bernoulli({1.0}, {1.0});
  StepsizeSchedule sched = StepsizeSchedule::constant(0.25, 10);
  RunOptions options;
  options.record_trajectory = true;
  options.trajectory_stride = 4;
  RunResult res = run_training(Algorithm::GlmTron, p, sched, {0.0}, SeededRng(2), options);
  REQUIRE(res.trajectory.size() == 4);
  CHECK(res.trajectory[0].t == 0);
  CHECK(res.trajectory[1].t == 4);
  CHECK(res.trajectory[2].t == 8);
  CHECK(res.trajectory[3].t == 10);
  for (std::size_t i = 1; i < res.trajectory.size(); ++i)
    CHECK(res.trajectory[i].t > res.trajectory[i - 1].t);
  // d = 1 <= 8, so iterates are stored
  CHECK(res.trajectory[0].w == ParameterVector{0.0});
  CHECK(res.trajectory[0].h_dist_sq == 1.0);
}

TEST_CASE("trajectory drops vectors above dimension eight") {
  ProblemInstance p;
  p.distribution = Distribution::SymmetricBernoulli;
  p.spectrum = build_spectrum(SpectrumKind::PowerLaw, 1.0, 9, true);
  p.w_star.assign(9, 0.5);
  p.noise = NoiseModel::noiseless();
  StepsizeSchedule sched = StepsizeSchedule::constant(0.25, 3);
  RunOptions options;
  options.record_trajectory = true;
  RunResult res = run_training(Algorithm::GlmTron, p, sched, ParameterVector(9, 0.0),
                               SeededRng(3), options);
  for (const TrajectoryPoint& pt : res.trajectory) CHECK(pt.w.empty());
}

TEST_CASE("divergence raises with the step index") {
  ProblemInstance p;
  p.distribution = Distribution::Gaussian;
  std::vector<double> values = {1.0};
  p.spectrum = build_spectrum(SpectrumKind::Explicit, 0.0, 1, false, &values);
  p.w_star = {1.0};
  p.noise = NoiseModel::noiseless();
  StepsizeSchedule sched = StepsizeSchedule::constant(50.0, 5000);
  bool threw = false;
  try {
    run_training(Algorithm::GlmTron, p, sched, {2.0}, SeededRng(9));
  } catch (const DivergedRunError& e) {
    threw = true;
    CHECK(e.step >= 1);
    CHECK(e.step <= 5000);
  }
  CHECK(threw);
}

TEST_CASE("identical seed and config reproduce the run exactly") {
  ProblemInstance p = bernoulli({0.8, 0.2}, {1.0, -1.0}, NoiseModel::well_specified(0.04));
  StepsizeSchedule sched = StepsizeSchedule::geometric_decay(0.25, 300);
  RunResult a = run_training(Algorithm::Sgd, p, sched, {0.5, 0.5}, SeededRng(42));
  RunResult b = run_training(Algorithm::Sgd, p, sched, {0.5, 0.5}, SeededRng(42));
  CHECK(a.final_iterate == b.final_iterate);
  RunResult c = run_training(Algorithm::Sgd, p, sched, {0.5, 0.5}, SeededRng(43));
  CHECK(a.final_iterate != c.final_iterate);
}

TEST_CASE("run_training_on requires a full sample sequence") {
  ProblemInstance p = bernoulli({1.0}, {1.0});
  StepsizeSchedule sched = StepsizeSchedule::constant(0.5, 3);
  std::vector<LabeledExample> examples(2);
  for (auto& ex : examples) ex.feature = basis(0, 1.0);
  CHECK_THROWS_AS(run_training_on(Algorithm::GlmTron, p, sched, {0.0}, examples),
                  std::invalid_argument);
}
