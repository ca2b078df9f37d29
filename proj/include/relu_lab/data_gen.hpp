#pragma once

#include <vector>

#include "relu_lab/model.hpp"
#include "relu_lab/rng.hpp"

namespace relulab {

// One feature draw. Symmetric Bernoulli features are one-hot signed basis
// vectors and stay in sparse form so optimizer steps touch one coordinate.
struct FeatureSample {
  bool sparse = false;
  int index = -1;      // sparse only
  double sign = 0.0;   // sparse only, +1 or -1
  std::vector<double> coords;  // dense only

  double dot(const ParameterVector& w) const {
    if (sparse) return sign * w[index];
    double acc = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) acc += coords[i] * w[i];
    return acc;
  }
};

struct LabeledExample {
  FeatureSample feature;
  double label = 0.0;
  double clean_mean = 0.0;  // relu(x . w*)
  bool corrupted = false;
};

// Precomputes the Bernoulli coordinate CDF once; sampling is then one uniform
// plus a binary search. Gaussian sampling is d independent normals scaled by
// sqrt(lambda_i).
class FeatureSampler {
 public:
  explicit FeatureSampler(const ProblemInstance& problem);

  FeatureSample operator()(SeededRng& rng) const;

 private:
  Distribution distribution_;
  std::vector<double> sqrt_lambda_;  // Gaussian
  std::vector<double> cdf_;          // Bernoulli, inclusive prefix sums
};

// One-shot convenience; hot loops should hold a FeatureSampler.
FeatureSample sample_feature(const ProblemInstance& problem, SeededRng& rng);

// Applies the problem's noise model to a drawn feature. Draw order per
// example is fixed: feature first, then one noise draw if the model needs it.
LabeledExample label_for(const ProblemInstance& problem, FeatureSample x, SeededRng& rng);

LabeledExample draw_example(const ProblemInstance& problem, const FeatureSampler& sampler,
                            SeededRng& rng);

}  // namespace relulab
