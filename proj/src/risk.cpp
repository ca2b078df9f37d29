#include "relu_lab/risk.hpp"

#include <cmath>

namespace relulab {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

double sq(double v) { return v * v; }

double bernoulli_excess(const Spectrum& s, const ParameterVector& w, const ParameterVector& ws) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double plus = relu(w[i]) - relu(ws[i]);
    double minus = relu(-w[i]) - relu(-ws[i]);
    acc += 0.5 * s.eigenvalues[i] * (sq(plus) + sq(minus));
  }
  return acc;
}

double gaussian_excess(const Spectrum& s, const ParameterVector& w, const ParameterVector& ws) {
  double a_sq = h_quadratic_form(w, s);
  double b_sq = h_quadratic_form(ws, s);
  double c = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) c += s.eigenvalues[i] * w[i] * ws[i];
  double ab = std::sqrt(a_sq) * std::sqrt(b_sq);
  double rho = 0.0;
  if (ab > 0.0) {
    rho = c / ab;
    if (std::abs(rho) > 1.0 + 1e-12)
      throw std::logic_error("gaussian excess risk: correlation outside [-1, 1]");
    rho = std::min(1.0, std::max(-1.0, rho));
  }
  double cross = ab * std::sqrt(1.0 - rho * rho) + (kPi - std::acos(rho)) * ab * rho;
  return 0.5 * a_sq + 0.5 * b_sq - cross / kPi;
}
}  // namespace

std::string to_string(RiskMethod m) {
  switch (m) {
    case RiskMethod::ExactBernoulli: return "exact_bernoulli";
    case RiskMethod::ExactGaussian: return "exact_gaussian";
    case RiskMethod::MonteCarlo: return "monte_carlo";
  }
  throw std::logic_error("unknown risk method");
}

double excess_risk_exact(const ProblemInstance& problem, const ParameterVector& w) {
  problem.validate();
  if (w.size() != problem.w_star.size())
    throw std::invalid_argument("excess_risk_exact: dimension mismatch");
  return problem.distribution == Distribution::SymmetricBernoulli
             ? bernoulli_excess(problem.spectrum, w, problem.w_star)
             : gaussian_excess(problem.spectrum, w, problem.w_star);
}

double risk_exact(const ProblemInstance& problem, const ParameterVector& w) {
  if (problem.noise.kind == NoiseKind::Misspecified)
    throw UnsupportedSettingError("risk_exact: misspecified labels need Monte Carlo");
  return excess_risk_exact(problem, w) + problem.noise.sigma_sq;
}

RiskReport risk_monte_carlo(const ProblemInstance& problem, const ParameterVector& w,
                            std::int64_t n, SeededRng rng) {
  problem.validate();
  if (w.size() != problem.w_star.size())
    throw std::invalid_argument("risk_monte_carlo: dimension mismatch");
  if (n < 2) throw std::invalid_argument("risk_monte_carlo: need at least 2 samples");

  FeatureSampler sampler(problem);
  double mean_risk = 0.0, m2_risk = 0.0;
  double mean_diff = 0.0, m2_diff = 0.0;
  for (std::int64_t i = 1; i <= n; ++i) {
    LabeledExample ex = draw_example(problem, sampler, rng);
    double at_w = sq(relu(ex.feature.dot(w)) - ex.label);
    double at_star = sq(relu(ex.feature.dot(problem.w_star)) - ex.label);
    double diff = at_w - at_star;
    double dn = static_cast<double>(i);
    double d1 = at_w - mean_risk;
    mean_risk += d1 / dn;
    m2_risk += d1 * (at_w - mean_risk);
    double d2 = diff - mean_diff;
    mean_diff += d2 / dn;
    m2_diff += d2 * (diff - mean_diff);
  }

  RiskReport report;
  report.method = RiskMethod::MonteCarlo;
  report.risk = mean_risk;
  report.excess_risk = mean_diff;
  report.stderr_risk = std::sqrt(m2_risk / static_cast<double>(n - 1) / static_cast<double>(n));
  report.stderr_excess = std::sqrt(m2_diff / static_cast<double>(n - 1) / static_cast<double>(n));
  ParameterVector diff_vec(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) diff_vec[i] = w[i] - problem.w_star[i];
  report.h_dist_sq = h_quadratic_form(diff_vec, problem.spectrum);
  report.sandwich_lower = 0.25 * report.h_dist_sq;
  return report;
}

RiskReport landscape_report(const ProblemInstance& problem, const ParameterVector& w) {
  if (problem.noise.kind == NoiseKind::Misspecified)
    throw UnsupportedSettingError("landscape_report: undefined for misspecified labels");
  RiskReport report;
  report.method = problem.distribution == Distribution::SymmetricBernoulli
                      ? RiskMethod::ExactBernoulli
                      : RiskMethod::ExactGaussian;
  report.excess_risk = excess_risk_exact(problem, w);
  report.risk = report.excess_risk + problem.noise.sigma_sq;
  ParameterVector diff(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) diff[i] = w[i] - problem.w_star[i];
  report.h_dist_sq = h_quadratic_form(diff, problem.spectrum);
  report.sandwich_lower = 0.25 * report.h_dist_sq;
  double tol = 1e-10 * std::max(1.0, report.h_dist_sq);
  report.sandwich_holds = report.excess_risk >= report.sandwich_lower - tol &&
                          report.excess_risk <= report.h_dist_sq + tol;
  return report;
}

std::vector<double> fourth_moment_diag_apply(const ProblemInstance& problem,
                                             const std::vector<double>& diag_a) {
  problem.validate();
  const auto& lambda = problem.spectrum.eigenvalues;
  if (diag_a.size() != lambda.size())
    throw std::invalid_argument("fourth_moment_diag_apply: dimension mismatch");
  for (double a : diag_a)
    if (!std::isfinite(a) || a < 0.0)
      throw std::invalid_argument("fourth_moment_diag_apply: diagonal must be PSD");

  std::vector<double> out(diag_a.size());
  if (problem.distribution == Distribution::SymmetricBernoulli) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lambda[i] * diag_a[i];
    return out;
  }
  double weighted_trace = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) weighted_trace += lambda[i] * diag_a[i];
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = 2.0 * lambda[i] * lambda[i] * diag_a[i] + weighted_trace * lambda[i];
  return out;
}

}  // namespace relulab
