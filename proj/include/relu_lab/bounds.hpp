#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relu_lab/model.hpp"

namespace relulab {

// Fourth-moment hypercontractivity constants: M . A <= alpha tr(HA) H and
// M . A >= beta H A H on diagonals. Gaussian features satisfy alpha = 3,
// beta = 1.
struct HypercontractivityParams {
  double alpha = 3.0;
  double beta = 1.0;

  void validate() const;  // alpha >= 1, beta > 0
};

enum class TheoremId {
  BernoulliUpper,
  BernoulliLower,
  GaussianUpper,
  GaussianLower,
  MisspecifiedUpper,
  SgdLowerStructural,
};

std::string to_string(TheoremId id);
TheoremId theorem_id_from_string(const std::string& s);

// Effective sample size N / log2(N). Requires N > 1; N <= 100 is outside the
// standing assumption and only warns.
double n_eff(std::int64_t n);

// Largest k with lambda_k >= 1 / (gamma0 * n_eff); 0 when none qualify.
// The comparison is exact, no tolerance.
int k_star(const Spectrum& spectrum, double gamma0, double n_eff_value);

// D_eff = k + n_eff^2 * gamma0^2 * sum_{i > k} lambda_i^2.
double effective_dim(const Spectrum& spectrum, double gamma0, double n_eff_value, int k);

// sum_i lambda_i (w0_i - w*_i)^2 prod_{t=1..N} (1 - halving gamma_t lambda_i)^2.
// The product factors are squared: the decay matrix multiplies the vector
// before the H-norm. halving must be 0.5 or 1.0. Factors that go negative
// are clamped to 0 for that coordinate and *saturated is set when provided.
double bias_decay_norm(const ParameterVector& w0, const ParameterVector& w_star,
                       const Spectrum& spectrum, const StepsizeSchedule& schedule,
                       double halving, bool* saturated = nullptr);

// The k in [0, d] minimizing effective_dim, by direct scan.
int min_deff_k(const Spectrum& spectrum, double gamma0, double n_eff_value);

struct BoundReport {
  TheoremId theorem_id = TheoremId::BernoulliUpper;
  double n_eff = 0.0;
  int k = 0;
  double d_eff = 0.0;
  double bias_term = 0.0;
  double variance_term = 0.0;
  // Named additions and diagnostics. "opt" adds to the total; "snr" is the
  // dimensionless ratio already folded into the variance term.
  std::map<std::string, double> extra_terms;
  double total = 0.0;
};

// Assembles the structural bound value for one theorem with every suppressed
// universal constant set to 1. These are shape and rate predictors, not
// absolute guarantees. Stepsize admissibility is validated per theorem:
//   BernoulliUpper / BernoulliLower: gamma0 < 1/2 (Bernoulli problems only)
//   GaussianUpper:                   gamma0 < 1 / (4 alpha tr H)
//   GaussianLower:                   gamma0 < 1 / lambda_1
//   MisspecifiedUpper:               gamma0 < 1 / (8 alpha tr H)
//   SgdLowerStructural:              gamma0 < 1 (Bernoulli problems only)
// k defaults to k_star for the lower bounds and to the D_eff-minimizing k for
// the upper bounds. The geometric-halving schedule is implied by (gamma0, N).
BoundReport theorem_bound(TheoremId id, const ProblemInstance& problem,
                          const ParameterVector& w0, double gamma0, std::int64_t n,
                          std::optional<int> k = {},
                          std::optional<HypercontractivityParams> hyper = {},
                          std::optional<double> opt_proxy = {});

// Asymptotic excess-risk rate at sample size N (log base 2):
//   power_law(r): N^(-r/(1+r)) * log2(N)^(r/(1+r))
//   log_poly(r):  log2(N)^-r
//   geometric:    N^-1 * log2(N)^2
double predicted_rate(SpectrumKind kind, double r, std::int64_t n);

}  // namespace relulab
