#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relu_lab/data_gen.hpp"
#include "relu_lab/model.hpp"
#include "relu_lab/rng.hpp"

namespace relulab {

// Raised when an evaluation is asked for a setting it does not cover, e.g.
// exact risk under the misspecified label model.
struct UnsupportedSettingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class RiskMethod { ExactBernoulli, ExactGaussian, MonteCarlo };

std::string to_string(RiskMethod m);

struct RiskReport {
  double risk = 0.0;
  double excess_risk = 0.0;
  double h_dist_sq = 0.0;       // ||w - w*||_H^2
  double sandwich_lower = 0.0;  // 0.25 * h_dist_sq
  bool sandwich_holds = false;
  RiskMethod method = RiskMethod::MonteCarlo;
  std::optional<double> stderr_risk;    // Monte Carlo only
  std::optional<double> stderr_excess;  // Monte Carlo only
};

// Population excess risk Delta(w) = E(relu(x.w) - relu(x.w*))^2 in closed
// form. Bernoulli: per-coordinate two-atom sum. Gaussian: arc-cosine formula
// with a^2 = ||w||_H^2, b^2 = ||w*||_H^2, rho = <w, w*>_H / (ab), rho := 0
// when ab = 0, clamped to [-1, 1] with tolerance 1e-12.
double excess_risk_exact(const ProblemInstance& problem, const ParameterVector& w);

// Exact population risk; defined for noiseless (= excess) and well-specified
// (= excess + sigma^2) labels. Misspecified labels have no exact evaluator
// here, use risk_monte_carlo.
double risk_exact(const ProblemInstance& problem, const ParameterVector& w);

// Sample-mean estimate of R(w) over n fresh examples, plus an excess-risk
// estimate using common random numbers: each drawn example is scored at both
// w and w* and the per-example difference is averaged.
RiskReport risk_monte_carlo(const ProblemInstance& problem, const ParameterVector& w,
                            std::int64_t n, SeededRng rng);

// Exact excess risk plus the landscape sandwich
// 0.25 * ||w - w*||_H^2 <= Delta(w) <= ||w - w*||_H^2,
// checked with tolerance 1e-10 * max(1, h_dist_sq).
RiskReport landscape_report(const ProblemInstance& problem, const ParameterVector& w);

// Diagonal of M applied to diag(a), where M is the fourth-moment operator
// E[(x' A x) x x']. Bernoulli: lambda_i * a_i. Gaussian:
// 2 * lambda_i^2 * a_i + (sum_j lambda_j a_j) * lambda_i.
std::vector<double> fourth_moment_diag_apply(const ProblemInstance& problem,
                                             const std::vector<double>& diag_a);

}  // namespace relulab
