#include "relu_lab/data_gen.hpp"

#include <algorithm>
#include <cmath>

namespace relulab {

FeatureSampler::FeatureSampler(const ProblemInstance& problem)
    : distribution_(problem.distribution) {
  problem.validate();
  const auto& lambda = problem.spectrum.eigenvalues;
  if (distribution_ == Distribution::Gaussian) {
    sqrt_lambda_.resize(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) sqrt_lambda_[i] = std::sqrt(lambda[i]);
  } else {
    cdf_.resize(lambda.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      acc += lambda[i];
      cdf_[i] = acc;
    }
    cdf_.back() = 1.0;  // trace is 1 within 1e-12; pin the last edge
  }
}

FeatureSample FeatureSampler::operator()(SeededRng& rng) const {
  FeatureSample x;
  if (distribution_ == Distribution::Gaussian) {
    x.sparse = false;
    x.coords.resize(sqrt_lambda_.size());
    for (std::size_t i = 0; i < x.coords.size(); ++i) x.coords[i] = sqrt_lambda_[i] * rng.normal();
    return x;
  }
  double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  x.sparse = true;
  x.index = static_cast<int>(it - cdf_.begin());
  x.sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
  return x;
}

FeatureSample sample_feature(const ProblemInstance& problem, SeededRng& rng) {
  return FeatureSampler(problem)(rng);
}

LabeledExample label_for(const ProblemInstance& problem, FeatureSample x, SeededRng& rng) {
  LabeledExample ex;
  ex.clean_mean = relu(x.dot(problem.w_star));
  switch (problem.noise.kind) {
    case NoiseKind::Noiseless:
      ex.label = ex.clean_mean;
      break;
    case NoiseKind::WellSpecified:
      ex.label = ex.clean_mean + std::sqrt(problem.noise.sigma_sq) * rng.normal();
      break;
    case NoiseKind::Misspecified:
      if (rng.uniform() < problem.noise.corruption_prob) {
        ex.label = problem.noise.corruption_value;
        ex.corrupted = true;
      } else {
        ex.label = ex.clean_mean;
      }
      break;
  }
  ex.feature = std::move(x);
  return ex;
}

LabeledExample draw_example(const ProblemInstance& problem, const FeatureSampler& sampler,
                            SeededRng& rng) {
  return label_for(problem, sampler(rng), rng);
}

}  // namespace relulab
