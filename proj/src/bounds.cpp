#include "relu_lab/bounds.hpp"

#include <cmath>
#include <iostream>

namespace relulab {

namespace {
double sq(double v) { return v * v; }

// Exact binary exponentiation; std::pow is not guaranteed correctly rounded
// for integer exponents.
double ipow(double base, std::int64_t e) {
  double acc = 1.0;
  double b = base;
  while (e > 0) {
    if (e & 1) acc *= b;
    b *= b;
    e >>= 1;
  }
  return acc;
}

void warn_small_n(std::int64_t n, const char* where) {
  if (n <= 100)
    std::cerr << "warning: " << where << " called with N = " << n
              << ", below the N > 100 regime these quantities are tuned for\n";
}
}  // namespace

void HypercontractivityParams::validate() const {
  if (!(alpha >= 1.0) || !std::isfinite(alpha))
    throw std::invalid_argument("hypercontractivity: alpha must be >= 1");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("hypercontractivity: beta must be positive");
}

std::string to_string(TheoremId id) {
  switch (id) {
    case TheoremId::BernoulliUpper: return "bernoulli_upper";
    case TheoremId::BernoulliLower: return "bernoulli_lower";
    case TheoremId::GaussianUpper: return "gaussian_upper";
    case TheoremId::GaussianLower: return "gaussian_lower";
    case TheoremId::MisspecifiedUpper: return "misspecified_upper";
    case TheoremId::SgdLowerStructural: return "sgd_lower_structural";
  }
  throw std::logic_error("unknown theorem id");
}

TheoremId theorem_id_from_string(const std::string& s) {
  if (s == "bernoulli_upper") return TheoremId::BernoulliUpper;
  if (s == "bernoulli_lower") return TheoremId::BernoulliLower;
  if (s == "gaussian_upper") return TheoremId::GaussianUpper;
  if (s == "gaussian_lower") return TheoremId::GaussianLower;
  if (s == "misspecified_upper") return TheoremId::MisspecifiedUpper;
  if (s == "sgd_lower_structural") return TheoremId::SgdLowerStructural;
  throw std::invalid_argument("unknown theorem id: " + s);
}

double n_eff(std::int64_t n) {
  if (n <= 1) throw std::invalid_argument("n_eff: N must be > 1");
  warn_small_n(n, "n_eff");
  return static_cast<double>(n) / std::log2(static_cast<double>(n));
}

int k_star(const Spectrum& spectrum, double gamma0, double n_eff_value) {
  if (!(gamma0 > 0.0)) throw std::invalid_argument("k_star: gamma0 must be positive");
  if (!(n_eff_value > 0.0)) throw std::invalid_argument("k_star: n_eff must be positive");
  double threshold = 1.0 / (gamma0 * n_eff_value);
  int k = 0;
  for (double lam : spectrum.eigenvalues) {
    if (lam >= threshold)
      ++k;
    else
      break;  // eigenvalues are nonincreasing
  }
  return k;
}

double effective_dim(const Spectrum& spectrum, double gamma0, double n_eff_value, int k) {
  if (!(gamma0 > 0.0)) throw std::invalid_argument("effective_dim: gamma0 must be positive");
  if (!(n_eff_value > 0.0)) throw std::invalid_argument("effective_dim: n_eff must be positive");
  if (k < 0 || k > spectrum.dim())
    throw std::invalid_argument("effective_dim: k must lie in [0, d]");
  double tail = 0.0;
  for (int i = k; i < spectrum.dim(); ++i) tail += sq(spectrum.eigenvalues[i]);
  return static_cast<double>(k) + sq(n_eff_value) * sq(gamma0) * tail;
}

int min_deff_k(const Spectrum& spectrum, double gamma0, double n_eff_value) {
  int best_k = 0;
  double best = effective_dim(spectrum, gamma0, n_eff_value, 0);
  for (int k = 1; k <= spectrum.dim(); ++k) {
    double v = effective_dim(spectrum, gamma0, n_eff_value, k);
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  return best_k;
}

double bias_decay_norm(const ParameterVector& w0, const ParameterVector& w_star,
                       const Spectrum& spectrum, const StepsizeSchedule& schedule,
                       double halving, bool* saturated) {
  if (halving != 0.5 && halving != 1.0)
    throw std::invalid_argument("bias_decay_norm: halving must be 0.5 or 1.0");
  if (static_cast<int>(w0.size()) != spectrum.dim() ||
      static_cast<int>(w_star.size()) != spectrum.dim())
    throw std::invalid_argument("bias_decay_norm: dimension mismatch");
  if (saturated) *saturated = false;

  // Group steps t = 1..N by their stepsize value so each coordinate needs one
  // ipow per phase.
  struct Phase {
    double gamma;
    std::int64_t count;
  };
  std::vector<Phase> phases;
  const std::int64_t n = schedule.horizon;
  if (schedule.kind == ScheduleKind::Constant) {
    if (n > 0) phases.push_back({schedule.gamma0, n});
  } else {
    const std::int64_t k = schedule.phase_length;
    for (std::int64_t p = 0;; ++p) {
      std::int64_t lo = std::max<std::int64_t>(1, p * k);
      std::int64_t hi = std::min(n, (p + 1) * k - 1);
      if (lo > n) break;
      if (hi >= lo) phases.push_back({std::ldexp(schedule.gamma0, -static_cast<int>(p)), hi - lo + 1});
    }
  }

  double acc = 0.0;
  for (int i = 0; i < spectrum.dim(); ++i) {
    double lam = spectrum.eigenvalues[i];
    double diff_sq = sq(w0[i] - w_star[i]);
    double prod = 1.0;
    for (const Phase& ph : phases) {
      double factor = 1.0 - halving * ph.gamma * lam;
      if (factor <= 0.0) {
        prod = 0.0;
        if (saturated) *saturated = true;
        break;
      }
      prod *= ipow(sq(factor), ph.count);
    }
    acc += lam * diff_sq * prod;
  }
  return acc;
}

namespace {
struct NormPieces {
  double h_norm_diff_sq = 0.0;  // ||w0 - w*||_H^2
  double h_norm_star_sq = 0.0;  // ||w*||_H^2
  double head_sq = 0.0;         // sum_{i <= k} (w0_i - w*_i)^2
  double tail_h_sq = 0.0;       // sum_{i > k} lambda_i (w0_i - w*_i)^2
};

NormPieces norm_pieces(const ProblemInstance& problem, const ParameterVector& w0, int k) {
  NormPieces p;
  const auto& lam = problem.spectrum.eigenvalues;
  for (int i = 0; i < problem.dim(); ++i) {
    double diff = w0[i] - problem.w_star[i];
    p.h_norm_diff_sq += lam[i] * sq(diff);
    p.h_norm_star_sq += lam[i] * sq(problem.w_star[i]);
    if (i < k)
      p.head_sq += sq(diff);
    else
      p.tail_h_sq += lam[i] * sq(diff);
  }
  return p;
}

// Smallest sigma^2 with E[(y - relu(x.w*))^2 x x'] <= sigma^2 H for the
// constructive corruption model; conservative bound for Gaussian features.
double misspecified_noise_scale(const ProblemInstance& problem, double alpha) {
  double eta = problem.noise.corruption_prob;
  double c = problem.noise.corruption_value;
  if (problem.distribution == Distribution::SymmetricBernoulli) {
    double worst = 0.0;
    for (double wi : problem.w_star)
      worst = std::max(worst, sq(c - relu(wi)) + sq(c - relu(-wi)));
    return 0.5 * eta * worst;
  }
  double b_sq = h_quadratic_form(problem.w_star, problem.spectrum);
  return eta * (2.0 * sq(c) + 2.0 * alpha * b_sq);
}
}  // namespace

BoundReport theorem_bound(TheoremId id, const ProblemInstance& problem,
                          const ParameterVector& w0, double gamma0, std::int64_t n,
                          std::optional<int> k, std::optional<HypercontractivityParams> hyper,
                          std::optional<double> opt_proxy) {
  problem.validate();
  if (static_cast<int>(w0.size()) != problem.dim())
    throw std::invalid_argument("theorem_bound: w0 dimension does not match problem");
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0))
    throw std::invalid_argument("theorem_bound: gamma0 must be finite and positive");

  const bool bernoulli_only = id == TheoremId::BernoulliUpper || id == TheoremId::BernoulliLower ||
                              id == TheoremId::SgdLowerStructural;
  if (bernoulli_only && problem.distribution != Distribution::SymmetricBernoulli)
    throw std::invalid_argument("theorem_bound: " + to_string(id) +
                                " applies to symmetric Bernoulli features");
  const bool needs_hyper = id == TheoremId::GaussianUpper || id == TheoremId::GaussianLower ||
                           id == TheoremId::MisspecifiedUpper;
  if (needs_hyper) {
    if (!hyper) throw std::invalid_argument("theorem_bound: " + to_string(id) +
                                            " needs hypercontractivity constants");
    hyper->validate();
  }

  const double trace = problem.spectrum.trace();
  const double lambda1 = problem.spectrum.eigenvalues.front();
  switch (id) {
    case TheoremId::BernoulliUpper:
    case TheoremId::BernoulliLower:
      if (!(gamma0 < 0.5))
        throw std::invalid_argument("theorem_bound: gamma0 must satisfy gamma0 < 1/2");
      break;
    case TheoremId::GaussianUpper:
      if (!(gamma0 < 1.0 / (4.0 * hyper->alpha * trace)))
        throw std::invalid_argument(
            "theorem_bound: gamma0 must satisfy gamma0 < 1/(4 alpha tr(H))");
      break;
    case TheoremId::GaussianLower:
      if (!(gamma0 < 1.0 / lambda1))
        throw std::invalid_argument("theorem_bound: gamma0 must satisfy gamma0 < 1/lambda_1");
      break;
    case TheoremId::MisspecifiedUpper:
      if (!(gamma0 < 1.0 / (8.0 * hyper->alpha * trace)))
        throw std::invalid_argument(
            "theorem_bound: gamma0 must satisfy gamma0 < 1/(8 alpha tr(H))");
      if (!opt_proxy || !(*opt_proxy >= 0.0))
        throw std::invalid_argument("theorem_bound: misspecified_upper needs opt_proxy >= 0");
      break;
    case TheoremId::SgdLowerStructural:
      if (!(gamma0 < 1.0))
        throw std::invalid_argument("theorem_bound: gamma0 must satisfy gamma0 < 1");
      break;
  }

  BoundReport report;
  report.theorem_id = id;
  report.n_eff = n_eff(n);

  const bool lower_bound = id == TheoremId::BernoulliLower || id == TheoremId::GaussianLower ||
                           id == TheoremId::SgdLowerStructural;
  int k_used;
  if (k) {
    if (*k < 0 || *k > problem.dim())
      throw std::invalid_argument("theorem_bound: k must lie in [0, d]");
    k_used = *k;
  } else {
    k_used = lower_bound ? k_star(problem.spectrum, gamma0, report.n_eff)
                         : min_deff_k(problem.spectrum, gamma0, report.n_eff);
  }
  report.k = k_used;
  report.d_eff = effective_dim(problem.spectrum, gamma0, report.n_eff, k_used);

  double sigma_sq = 0.0;
  switch (problem.noise.kind) {
    case NoiseKind::Noiseless: sigma_sq = 0.0; break;
    case NoiseKind::WellSpecified: sigma_sq = problem.noise.sigma_sq; break;
    case NoiseKind::Misspecified:
      if (id != TheoremId::MisspecifiedUpper)
        throw std::invalid_argument("theorem_bound: " + to_string(id) +
                                    " does not cover misspecified labels");
      sigma_sq = misspecified_noise_scale(problem, hyper->alpha);
      break;
  }

  const double halving = lower_bound && id != TheoremId::GaussianLower ? 1.0 : 0.5;
  StepsizeSchedule schedule = StepsizeSchedule::geometric_decay(gamma0, n);
  report.bias_term = bias_decay_norm(w0, problem.w_star, problem.spectrum, schedule, halving);

  const NormPieces pieces = norm_pieces(problem, w0, k_used);
  const double mixed_norm = pieces.head_sq / (report.n_eff * gamma0) + pieces.tail_h_sq;
  const double per_dim = report.d_eff / report.n_eff;

  switch (id) {
    case TheoremId::BernoulliUpper:
    case TheoremId::BernoulliLower:
    case TheoremId::SgdLowerStructural:
      report.variance_term = sigma_sq * per_dim;
      report.total = report.bias_term + report.variance_term;
      break;
    case TheoremId::GaussianUpper:
      report.variance_term = (hyper->alpha * mixed_norm + sigma_sq) * per_dim;
      report.total = report.bias_term + report.variance_term;
      break;
    case TheoremId::GaussianLower:
      report.variance_term = (hyper->beta * pieces.tail_h_sq + sigma_sq) * per_dim;
      report.total = report.bias_term + report.variance_term;
      break;
    case TheoremId::MisspecifiedUpper: {
      if (!(sigma_sq > 0.0))
        throw std::invalid_argument("theorem_bound: misspecified noise scale is zero");
      double snr = hyper->alpha * (*opt_proxy + pieces.h_norm_star_sq + mixed_norm) / sigma_sq;
      report.variance_term = (1.0 + snr) * sigma_sq * per_dim;
      report.extra_terms["opt"] = *opt_proxy;
      report.extra_terms["snr"] = snr;
      report.total = *opt_proxy + report.bias_term + report.variance_term;
      break;
    }
  }
  return report;
}

double predicted_rate(SpectrumKind kind, double r, std::int64_t n) {
  if (n <= 1) throw std::invalid_argument("predicted_rate: N must be > 1");
  warn_small_n(n, "predicted_rate");
  double nd = static_cast<double>(n);
  double log_n = std::log2(nd);
  switch (kind) {
    case SpectrumKind::PowerLaw: {
      if (!(r > 0.0)) throw std::invalid_argument("predicted_rate: power_law requires r > 0");
      double exponent = r / (1.0 + r);
      return std::pow(nd, -exponent) * std::pow(log_n, exponent);
    }
    case SpectrumKind::LogPoly:
      if (!(r > 1.0)) throw std::invalid_argument("predicted_rate: log_poly requires r > 1");
      return std::pow(log_n, -r);
    case SpectrumKind::Geometric:
      return log_n * log_n / nd;
    case SpectrumKind::Explicit:
      throw std::invalid_argument("predicted_rate: explicit spectra have no closed-form rate");
  }
  throw std::logic_error("unknown spectrum kind");
}

}  // namespace relulab
