#pragma once

#include "mlp.hpp"
#include "rng.hpp"

namespace hammer {

// Discrete distribution over action indices; probabilities sum to 1.
struct CategoricalDist {
  Vec probs;
};

int categorical_sample(const CategoricalDist& dist, Rng& rng);
// ln p[a]. Querying an action with zero probability is a hard error: it can
// only happen when an action was not drawn from this distribution.
double categorical_log_prob(const CategoricalDist& dist, int action);
double categorical_entropy(const CategoricalDist& dist);

// Diagonal Gaussian with state-independent learned log-std.
struct DiagGaussianDist {
  Vec mean;
  Vec log_std;
};

Vec gaussian_sample(const DiagGaussianDist& dist, Rng& rng);
double gaussian_log_prob(const DiagGaussianDist& dist, const Vec& x);
// sum_i (0.5 + 0.5 ln(2 pi) + log_std_i)
double gaussian_entropy(const DiagGaussianDist& dist);

}  // namespace hammer
