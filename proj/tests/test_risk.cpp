#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "relu_lab/risk.hpp"

using namespace relulab;

namespace {

ProblemInstance make_problem(Distribution dist, std::vector<double> lambda,
                             ParameterVector w_star,
                             NoiseModel noise = NoiseModel::noiseless()) {
  ProblemInstance p;
  p.distribution = dist;
  p.spectrum = build_spectrum(SpectrumKind::Explicit, 0.0, static_cast<int>(lambda.size()),
                              dist == Distribution::SymmetricBernoulli, &lambda);
  p.w_star = std::move(w_star);
  p.noise = noise;
  p.validate();
  return p;
}

// Independent oracle: enumerate the 2d-atom Bernoulli support directly.
double bernoulli_excess_by_enumeration(const ProblemInstance& p, const ParameterVector& w) {
  double acc = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    double half = p.spectrum.eigenvalues[i] / 2.0;
    double plus = relu(w[i]) - relu(p.w_star[i]);
    double minus = relu(-w[i]) - relu(-p.w_star[i]);
    acc += half * (plus * plus + minus * minus);
  }
  return acc;
}

ParameterVector random_vector(SeededRng& rng, int d, double span) {
  ParameterVector v(d);
  for (double& x : v) x = span * (2.0 * rng.uniform() - 1.0);
  return v;
}

std::vector<double> random_simplex_spectrum(SeededRng& rng, int d) {
  std::vector<double> v(d);
  double total = 0.0;
  for (double& x : v) {
    x = 0.05 + rng.uniform();
    total += x;
  }
  for (double& x : v) x /= total;
  std::sort(v.begin(), v.end(), std::greater<double>());
  return v;
}

}  // namespace

TEST_CASE("excess risk vanishes at the target") {
  ProblemInstance b = make_problem(Distribution::SymmetricBernoulli, {0.8, 0.2}, {1.0, -1.0});
  CHECK(excess_risk_exact(b, b.w_star) == 0.0);
  ProblemInstance g = make_problem(Distribution::Gaussian, {2.0, 0.5}, {1.0, -1.0});
  CHECK(excess_risk_exact(g, g.w_star) <= 1e-15);
}

TEST_CASE("bernoulli frozen value at the origin") {
  ProblemInstance p = make_problem(Distribution::SymmetricBernoulli, {0.8, 0.2}, {1.0, -1.0});
  CHECK(excess_risk_exact(p, {0.0, 0.0}) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("bernoulli closed form matches enumeration on random instances") {
  SeededRng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    int d = 1 + static_cast<int>(rng.uniform() * 16);
    if (d > 16) d = 16;
    ProblemInstance p = make_problem(Distribution::SymmetricBernoulli,
                                     random_simplex_spectrum(rng, d), random_vector(rng, d, 2.0));
    ParameterVector w = random_vector(rng, d, 2.0);
    double closed = excess_risk_exact(p, w);
    double oracle = bernoulli_excess_by_enumeration(p, w);
    CHECK(std::abs(closed - oracle) <= 1e-12 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("gaussian collinear and mirrored cases") {
  ProblemInstance p = make_problem(Distribution::Gaussian, {2.0, 0.5}, {1.0, -1.0});
  double b_sq = h_quadratic_form(p.w_star, p.spectrum);

  // w = c w* for c >= 0 has rho = 1 and excess ((c-1)^2/2)||w*||_H^2.
  for (double c : {0.0, 0.5, 2.0}) {
    ParameterVector w = p.w_star;
    for (double& x : w) x *= c;
    double expected = 0.5 * (c - 1.0) * (c - 1.0) * b_sq;
    CHECK(excess_risk_exact(p, w) == doctest::Approx(expected).epsilon(1e-12));
  }

  // w = -w* has rho = -1; the cross term vanishes and excess = ||w*||_H^2.
  ParameterVector mirrored = p.w_star;
  for (double& x : mirrored) x = -x;
  CHECK(excess_risk_exact(p, mirrored) == doctest::Approx(b_sq).epsilon(1e-12));
}

TEST_CASE("gaussian orthogonal case") {
  // w and w* orthogonal in H: rho = 0, excess = a^2/2 + b^2/2 - ab/pi.
  ProblemInstance p = make_problem(Distribution::Gaussian, {1.0, 1.0}, {1.0, 0.0});
  ParameterVector w = {0.0, 2.0};
  double a = 2.0, b = 1.0;
  double expected = a * a / 2.0 + b * b / 2.0 - a * b / 3.141592653589793238462643383279502884;
  CHECK(excess_risk_exact(p, w) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("gaussian closed form matches monte carlo") {
  SeededRng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    int d = 1 + static_cast<int>(rng.uniform() * 4);
    std::vector<double> lambda(d);
    for (double& x : lambda) x = 0.2 + rng.uniform();
    std::sort(lambda.begin(), lambda.end(), std::greater<double>());
    ProblemInstance p = make_problem(Distribution::Gaussian, lambda, random_vector(rng, d, 1.5));
    ParameterVector w = random_vector(rng, d, 1.5);
    double closed = excess_risk_exact(p, w);
    RiskReport mc = risk_monte_carlo(p, w, 200000, SeededRng(derive_seed(99, {7, (std::uint64_t)trial})));
    REQUIRE(mc.stderr_excess.has_value());
    CHECK(std::abs(mc.excess_risk - closed) <= 4.0 * std::max(*mc.stderr_excess, 1e-9));
  }
}

TEST_CASE("scale identity holds for both distributions") {
  SeededRng rng(314);
  for (Distribution dist : {Distribution::SymmetricBernoulli, Distribution::Gaussian}) {
    for (int trial = 0; trial < 20; ++trial) {
      int d = 1 + static_cast<int>(rng.uniform() * 6);
      std::vector<double> lambda = random_simplex_spectrum(rng, d);
      ProblemInstance p = make_problem(dist, lambda, random_vector(rng, d, 2.0));
      double c = 3.0 * rng.uniform();
      ParameterVector w = p.w_star;
      for (double& x : w) x *= c;
      double expected = 0.5 * (c - 1.0) * (c - 1.0) * h_quadratic_form(p.w_star, p.spectrum);
      CHECK(excess_risk_exact(p, w) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("rho clamp tolerance") {
  ProblemInstance p = make_problem(Distribution::Gaussian, {1.0}, {1.0});
  // d = 1 keeps |rho| = 1 exactly up to rounding; the clamp must absorb it.
  CHECK_NOTHROW(excess_risk_exact(p, {0.3}));
  CHECK_NOTHROW(excess_risk_exact(p, {-0.3}));
}

TEST_CASE("risk exact adds sigma_sq only for well specified labels") {
  ProblemInstance p = make_problem(Distribution::SymmetricBernoulli, {0.8, 0.2}, {1.0, -1.0},
                                   NoiseModel::well_specified(0.04));
  ParameterVector w = {0.5, 0.5};
  CHECK(risk_exact(p, w) == doctest::Approx(excess_risk_exact(p, w) + 0.04).epsilon(1e-15));

  ProblemInstance m = make_problem(Distribution::SymmetricBernoulli, {0.8, 0.2}, {1.0, -1.0},
                                   NoiseModel::misspecified(0.1));
  CHECK_THROWS_AS(risk_exact(m, w), UnsupportedSettingError);
  CHECK_THROWS_AS(landscape_report(m, w), UnsupportedSettingError);
}

TEST_CASE("monte carlo estimates the well specified risk") {
  ProblemInstance p = make_problem(Distribution::SymmetricBernoulli, {0.8, 0.2}, {1.0, -1.0},
                                   NoiseModel::well_specified(0.01));
  ParameterVector w = {0.8, -0.6};
  RiskReport mc = risk_monte_carlo(p, w, 200000, SeededRng(404));
  REQUIRE(mc.stderr_risk.has_value());
  CHECK(std::abs(mc.risk - risk_exact(p, w)) <= 4.0 * *mc.stderr_risk);
  CHECK(std::abs(mc.excess_risk - excess_risk_exact(p, w)) <= 4.0 * *mc.stderr_excess);
  CHECK(mc.method == RiskMethod::MonteCarlo);
}

TEST_CASE("landscape sandwich on random pairs") {
  SeededRng rng(606);
  for (Distribution dist : {Distribution::SymmetricBernoulli, Distribution::Gaussian}) {
    for (int trial = 0; trial < 200; ++trial) {
      int d = 1 + static_cast<int>(rng.uniform() * 8);
      std::vector<double> lambda = random_simplex_spectrum(rng, d);
      ProblemInstance p = make_problem(dist, lambda, random_vector(rng, d, 2.0));
      RiskReport rep = landscape_report(p, random_vector(rng, d, 2.0));
      CHECK(rep.sandwich_holds);
      CHECK(rep.sandwich_lower == doctest::Approx(0.25 * rep.h_dist_sq).epsilon(1e-15));
    }
  }
}

TEST_CASE("gaussian mirror pair saturates the sandwich lower edge") {
  ProblemInstance p = make_problem(Distribution::Gaussian, {1.0, 0.5}, {1.0, -1.0});
  ParameterVector mirrored = {-1.0, 1.0};
  RiskReport rep = landscape_report(p, mirrored);
  CHECK(rep.sandwich_holds);
  // Delta(-w*) = ||w*||_H^2 and h_dist_sq = 4 ||w*||_H^2: exactly the 1/4 edge.
  CHECK(rep.excess_risk == doctest::Approx(rep.sandwich_lower).epsilon(1e-12));
}

TEST_CASE("fourth moment diagonal action") {
  ProblemInstance b = make_problem(Distribution::SymmetricBernoulli, {0.8, 0.2}, {1.0, 1.0});
  std::vector<double> a = {2.0, 3.0};
  std::vector<double> out = fourth_moment_diag_apply(b, a);
  CHECK(out[0] == doctest::Approx(0.8 * 2.0).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(0.2 * 3.0).epsilon(1e-15));

  ProblemInstance g = make_problem(Distribution::Gaussian, {2.0, 1.0}, {1.0, 1.0});
  out = fourth_moment_diag_apply(g, a);
  double mix = 2.0 * 2.0 + 1.0 * 3.0;  // sum lambda_j a_j
  CHECK(out[0] == doctest::Approx(2.0 * 4.0 * 2.0 + mix * 2.0).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(2.0 * 1.0 * 3.0 + mix * 1.0).epsilon(1e-15));

  std::vector<double> bad = {-1.0, 0.0};
  CHECK_THROWS_AS(fourth_moment_diag_apply(b, bad), std::invalid_argument);
}

TEST_CASE("monte carlo requires at least two samples") {
  ProblemInstance p = make_problem(Distribution::SymmetricBernoulli, {1.0}, {1.0});
  CHECK_THROWS_AS(risk_monte_carlo(p, {0.5}, 1, SeededRng(1)), std::invalid_argument);
}
