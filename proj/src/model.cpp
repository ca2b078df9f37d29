#include "relu_lab/model.hpp"

#include <cmath>

namespace relulab {

std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::SymmetricBernoulli: return "symmetric_bernoulli";
    case Distribution::Gaussian: return "gaussian";
  }
  throw std::logic_error("unknown distribution");
}

double Spectrum::trace() const {
  double acc = 0.0;
  for (double v : eigenvalues) acc += v;
  return acc;
}

Spectrum Spectrum::from_values(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("spectrum: empty eigenvalue list");
  double prev = values.front();
  if (!(prev > 0.0)) throw std::invalid_argument("spectrum: leading eigenvalue must be positive");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("spectrum: eigenvalues must be finite and nonnegative");
    if (v > prev) throw std::invalid_argument("spectrum: eigenvalues must be nonincreasing");
    prev = v;
  }
  Spectrum s;
  s.eigenvalues = std::move(values);
  return s;
}

SpectrumKind spectrum_kind_from_string(const std::string& s) {
  if (s == "power_law") return SpectrumKind::PowerLaw;
  if (s == "log_poly") return SpectrumKind::LogPoly;
  if (s == "geometric") return SpectrumKind::Geometric;
  if (s == "explicit") return SpectrumKind::Explicit;
  throw std::invalid_argument("unknown spectrum kind: " + s);
}

std::string to_string(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::PowerLaw: return "power_law";
    case SpectrumKind::LogPoly: return "log_poly";
    case SpectrumKind::Geometric: return "geometric";
    case SpectrumKind::Explicit: return "explicit";
  }
  throw std::logic_error("unknown spectrum kind");
}

Spectrum build_spectrum(SpectrumKind kind, double r, int d, bool normalize_trace,
                        const std::vector<double>* explicit_values) {
  std::vector<double> values;
  switch (kind) {
    case SpectrumKind::PowerLaw: {
      if (d < 1) throw std::invalid_argument("build_spectrum: d must be >= 1");
      if (!(r > 0.0)) throw std::invalid_argument("build_spectrum: power_law requires r > 0");
      values.resize(d);
      for (int k2 = 1; k2 <= d; ++k2)
        values[k2 - 1] = std::pow(static_cast<double>(k2), -(1.0 + r));
      break;
    }
    case SpectrumKind::LogPoly: {
      if (d < 1) throw std::invalid_argument("build_spectrum: d must be >= 1");
      if (!(r > 1.0)) throw std::invalid_argument("build_spectrum: log_poly requires r > 1");
      values.resize(d);
      for (int k2 = 1; k2 <= d; ++k2)
        values[k2 - 1] =
            std::pow(std::log2(static_cast<double>(k2) + 1.0), -r) / static_cast<double>(k2);
      break;
    }
    case SpectrumKind::Geometric: {
      if (d < 1) throw std::invalid_argument("build_spectrum: d must be >= 1");
      values.resize(d);
      for (int k2 = 1; k2 <= d; ++k2) values[k2 - 1] = std::ldexp(1.0, -k2);
      break;
    }
    case SpectrumKind::Explicit: {
      if (explicit_values == nullptr)
        throw std::invalid_argument("build_spectrum: explicit kind needs values");
      values = *explicit_values;
      break;
    }
  }
  Spectrum s = Spectrum::from_values(std::move(values));
  if (normalize_trace) {
    double tr = s.trace();
    if (!(tr > 0.0)) throw std::invalid_argument("build_spectrum: trace must be positive");
    for (double& v : s.eigenvalues) v /= tr;
  }
  return s;
}

double h_quadratic_form(const ParameterVector& v, const Spectrum& spectrum) {
  if (static_cast<int>(v.size()) != spectrum.dim())
    throw std::invalid_argument("h_quadratic_form: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += spectrum.eigenvalues[i] * v[i] * v[i];
  return acc;
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::Noiseless: return "noiseless";
    case NoiseKind::WellSpecified: return "well_specified";
    case NoiseKind::Misspecified: return "misspecified";
  }
  throw std::logic_error("unknown noise kind");
}

NoiseModel NoiseModel::noiseless() { return NoiseModel{}; }

NoiseModel NoiseModel::well_specified(double sigma_sq) {
  if (!(sigma_sq >= 0.0) || !std::isfinite(sigma_sq))
    throw std::invalid_argument("noise: sigma_sq must be finite and nonnegative");
  NoiseModel m;
  m.kind = NoiseKind::WellSpecified;
  m.sigma_sq = sigma_sq;
  return m;
}

NoiseModel NoiseModel::misspecified(double corruption_prob, double corruption_value) {
  if (!(corruption_prob >= 0.0 && corruption_prob <= 1.0))
    throw std::invalid_argument("noise: corruption_prob must lie in [0, 1]");
  if (!std::isfinite(corruption_value))
    throw std::invalid_argument("noise: corruption_value must be finite");
  NoiseModel m;
  m.kind = NoiseKind::Misspecified;
  m.corruption_prob = corruption_prob;
  m.corruption_value = corruption_value;
  return m;
}

void ProblemInstance::validate() const {
  Spectrum::from_values(spectrum.eigenvalues);
  if (static_cast<int>(w_star.size()) != spectrum.dim())
    throw std::invalid_argument("problem: w_star dimension does not match spectrum");
  for (double v : w_star)
    if (!std::isfinite(v)) throw std::invalid_argument("problem: w_star must be finite");
  if (distribution == Distribution::SymmetricBernoulli) {
    double tr = spectrum.trace();
    if (std::abs(tr - 1.0) > 1e-12)
      throw std::invalid_argument("problem: Bernoulli spectrum must have trace 1 (within 1e-12)");
  }
  switch (noise.kind) {
    case NoiseKind::Noiseless:
      if (noise.sigma_sq != 0.0)
        throw std::invalid_argument("problem: noiseless labels cannot carry sigma_sq");
      break;
    case NoiseKind::WellSpecified:
      if (!(noise.sigma_sq >= 0.0))
        throw std::invalid_argument("problem: sigma_sq must be nonnegative");
      break;
    case NoiseKind::Misspecified:
      if (noise.sigma_sq != 0.0)
        throw std::invalid_argument("problem: misspecified labels carry no additive noise");
      if (!(noise.corruption_prob >= 0.0 && noise.corruption_prob <= 1.0))
        throw std::invalid_argument("problem: corruption_prob must lie in [0, 1]");
      break;
  }
}

std::string to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::GeometricDecay: return "geometric_decay";
    case ScheduleKind::Constant: return "constant";
  }
  throw std::logic_error("unknown schedule kind");
}

std::int64_t default_phase_length(std::int64_t horizon) {
  if (horizon < 2) return 1;
  double k = static_cast<double>(horizon) / std::log2(static_cast<double>(horizon));
  auto floored = static_cast<std::int64_t>(k);
  return floored < 1 ? 1 : floored;
}

static void check_schedule_args(double gamma0, std::int64_t horizon) {
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0))
    throw std::invalid_argument("schedule: gamma0 must be finite and positive");
  if (horizon < 0) throw std::invalid_argument("schedule: horizon must be nonnegative");
}

StepsizeSchedule StepsizeSchedule::constant(double gamma0, std::int64_t horizon) {
  check_schedule_args(gamma0, horizon);
  StepsizeSchedule s;
  s.kind = ScheduleKind::Constant;
  s.gamma0 = gamma0;
  s.horizon = horizon;
  s.phase_length = 1;
  return s;
}

StepsizeSchedule StepsizeSchedule::geometric_decay(double gamma0, std::int64_t horizon,
                                                   std::optional<std::int64_t> phase_length) {
  check_schedule_args(gamma0, horizon);
  StepsizeSchedule s;
  s.kind = ScheduleKind::GeometricDecay;
  s.gamma0 = gamma0;
  s.horizon = horizon;
  s.phase_length = phase_length.value_or(default_phase_length(horizon));
  if (s.phase_length < 1) throw std::invalid_argument("schedule: phase length must be >= 1");
  return s;
}

double stepsize_at(const StepsizeSchedule& schedule, std::int64_t t) {
  if (t < 1 || t > schedule.horizon)
    throw std::invalid_argument("stepsize_at: t = " + std::to_string(t) +
                                " outside [1, " + std::to_string(schedule.horizon) + "]");
  if (schedule.kind == ScheduleKind::Constant) return schedule.gamma0;
  return std::ldexp(schedule.gamma0, -static_cast<int>(t / schedule.phase_length));
}

}  // namespace relulab
