#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace relulab {

inline double relu(double v) { return v > 0.0 ? v : 0.0; }

using ParameterVector = std::vector<double>;

enum class Distribution { SymmetricBernoulli, Gaussian };

std::string to_string(Distribution d);

// Diagonal second-moment spectrum. Eigenvalues are kept sorted nonincreasing;
// the covariance itself is never materialized.
struct Spectrum {
  std::vector<double> eigenvalues;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  double trace() const;

  // Validates: nonempty, nonnegative, nonincreasing, leading eigenvalue > 0.
  static Spectrum from_values(std::vector<double> values);
};

enum class SpectrumKind { PowerLaw, LogPoly, Geometric, Explicit };

SpectrumKind spectrum_kind_from_string(const std::string& s);
std::string to_string(SpectrumKind k);

// power_law:  lambda_k = k^-(1+r), r > 0
// log_poly:   lambda_k = k^-1 * log2(k+1)^-r, r > 1
// geometric:  lambda_k = 2^-k
// explicit:   caller-provided values (r ignored)
// normalize_trace rescales so the eigenvalues sum to 1.
Spectrum build_spectrum(SpectrumKind kind, double r, int d, bool normalize_trace,
                        const std::vector<double>* explicit_values = nullptr);

// v' H v for the diagonal H given by the spectrum.
double h_quadratic_form(const ParameterVector& v, const Spectrum& spectrum);

enum class NoiseKind { Noiseless, WellSpecified, Misspecified };

std::string to_string(NoiseKind k);

struct NoiseModel {
  NoiseKind kind = NoiseKind::Noiseless;
  double sigma_sq = 0.0;         // additive noise variance, well-specified only
  double corruption_prob = 0.0;  // misspecified only
  double corruption_value = 0.0;

  static NoiseModel noiseless();
  static NoiseModel well_specified(double sigma_sq);
  static NoiseModel misspecified(double corruption_prob, double corruption_value = 0.0);
};

// A single regression problem: feature distribution + target neuron + labels.
struct ProblemInstance {
  Distribution distribution = Distribution::SymmetricBernoulli;
  Spectrum spectrum;
  ParameterVector w_star;
  NoiseModel noise;

  int dim() const { return spectrum.dim(); }

  // Checks dimension agreement and the Bernoulli trace-1 requirement
  // (tolerance 1e-12).
  void validate() const;
};

enum class ScheduleKind { GeometricDecay, Constant };

std::string to_string(ScheduleKind k);

// Default phase length K = max(1, floor(N / log2(N))); log base 2.
std::int64_t default_phase_length(std::int64_t horizon);

struct StepsizeSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double gamma0 = 0.0;
  std::int64_t horizon = 0;       // N >= 0
  std::int64_t phase_length = 1;  // K, used by GeometricDecay

  static StepsizeSchedule constant(double gamma0, std::int64_t horizon);
  static StepsizeSchedule geometric_decay(double gamma0, std::int64_t horizon,
                                          std::optional<std::int64_t> phase_length = {});
};

// gamma_t for t in [1, N]. GeometricDecay: gamma0 * 2^-floor(t / K), so the
// value halves exactly at multiples of K.
double stepsize_at(const StepsizeSchedule& schedule, std::int64_t t);

}  // namespace relulab
