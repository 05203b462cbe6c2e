#include "distributions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hammer {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2 pi)
}

int categorical_sample(const CategoricalDist& dist, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  const int n = static_cast<int>(dist.probs.size());
  for (int i = 0; i < n; ++i) {
    cum += dist.probs[i];
    if (u < cum) return i;
  }
  // Rounding can leave cum marginally below 1; fall back to the last
  // positive-probability action.
  for (int i = n - 1; i >= 0; --i)
    if (dist.probs[i] > 0.0) return i;
  throw std::runtime_error("categorical_sample: all probabilities are zero");
}

double categorical_log_prob(const CategoricalDist& dist, int action) {
  if (action < 0 || action >= dist.probs.size())
    throw std::out_of_range("categorical_log_prob: action index out of range");
  const double p = dist.probs[action];
  if (p <= 0.0)
    throw std::runtime_error("categorical_log_prob: zero-probability action queried");
  return std::log(p);
}

double categorical_entropy(const CategoricalDist& dist) {
  double h = 0.0;
  for (int i = 0; i < dist.probs.size(); ++i) {
    const double p = dist.probs[i];
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

Vec gaussian_sample(const DiagGaussianDist& dist, Rng& rng) {
  Vec x(dist.mean.size());
  for (int i = 0; i < x.size(); ++i)
    x[i] = dist.mean[i] + std::exp(dist.log_std[i]) * rng.normal();
  return x;
}

double gaussian_log_prob(const DiagGaussianDist& dist, const Vec& x) {
  if (x.size() != dist.mean.size())
    throw std::invalid_argument("gaussian_log_prob: dimension mismatch");
  double lp = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double z = (x[i] - dist.mean[i]) / std::exp(dist.log_std[i]);
    lp += -0.5 * z * z - dist.log_std[i] - kHalfLog2Pi;
  }
  return lp;
}

double gaussian_entropy(const DiagGaussianDist& dist) {
  return dist.log_std.sum() + dist.log_std.size() * (0.5 + kHalfLog2Pi);
}

}  // namespace hammer
