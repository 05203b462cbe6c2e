#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distributions.hpp"
#include "mlp.hpp"
#include "rng.hpp"

namespace hammer {

enum class PolicyKind { kCategorical, kGaussian };

// Actor-critic pair with its optimizer state. Gaussian policies carry a
// state-independent learned log-std, initialized to ln(0.5) and clamped to
// [-5, 1] after every update. A block-factored policy emits several
// independent action blocks per forward pass (the message head); each
// transition then addresses block `stream` of the output.
struct Policy {
  PolicyKind kind = PolicyKind::kCategorical;
  Mlp actor;
  Mlp critic;
  Vec log_std;  // gaussian only, length = actor output dim
  int action_block = 0;        // gaussian action dimensionality per block
  bool block_factored = false;
  AdamState actor_opt;
  AdamState critic_opt;
  AdamVecState log_std_opt;
};

inline constexpr double kLogStdInit = -0.6931471805599453;  // ln(0.5)
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 1.0;

Policy make_categorical_policy(int obs_dim, int hidden, int n_actions, Rng& rng);
Policy make_gaussian_policy(int obs_dim, int hidden, int action_dim,
                            int action_block, bool block_factored, Rng& rng);

// One experience tuple. Exactly one of (action, action_vec) is meaningful
// depending on the policy kind; action_vec holds the raw pre-clip sample so
// importance ratios stay exact Gaussian densities. `stream` identifies the
// trajectory this transition belongs to when several are interleaved in one
// buffer (one stream per agent / per message recipient).
struct Transition {
  Vec observation;
  int action = -1;
  Vec action_vec;
  double log_prob_old = 0.0;
  double reward = 0.0;
  bool done = false;
  double value_estimate = 0.0;
  int stream = 0;
};

enum class BufferOwner { kCentral, kLocal };

struct RolloutBuffer {
  std::vector<Transition> transitions;
  int capacity = 0;
  BufferOwner owner = BufferOwner::kLocal;

  void add(Transition t) { transitions.push_back(std::move(t)); }
  size_t size() const { return transitions.size(); }
  bool at_capacity() const { return static_cast<int>(transitions.size()) >= capacity; }
  void clear() { transitions.clear(); }
};

struct PpoHyperparams {
  double gamma = 0.95;
  double clip_epsilon = 0.2;
  double lr = 3e-4;
  int update_epochs = 4;
  int minibatch_size = 256;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  int batch_size = 2000;
  double max_grad_norm = 0.5;
};

// Discounted returns-to-go, reset across done boundaries. A sequence that
// ends without a done flag is treated as ending there (no bootstrap).
std::vector<double> compute_returns(const std::vector<double>& rewards,
                                    const std::vector<char>& dones, double gamma);

// Per-stream returns for an interleaved buffer: transitions are grouped by
// stream id (order preserved), discounted within each group, and scattered
// back to their original positions.
std::vector<double> buffer_returns(const RolloutBuffer& buffer, double gamma);

// A = G - V, then batch-normalized to mean 0 / std 1 (population std, +1e-8).
// A single-element batch is returned unnormalized.
std::vector<double> compute_advantages(const std::vector<double>& returns,
                                       const std::vector<double>& values);

// min(r A, clip(r, 1-eps, 1+eps) A); the term PPO maximizes.
double clipped_surrogate(double ratio, double advantage, double eps);

struct ActionSample {
  int action = -1;
  Vec action_vec;      // raw gaussian sample
  Vec executed;        // clamped to [-1,1] componentwise (gaussian only)
  double log_prob = 0.0;
  double value = 0.0;
};

ActionSample sample_action(const Policy& policy, const Vec& obs, Rng& rng);
// Deterministic variant: argmax action / tanh mean.
ActionSample mean_action(const Policy& policy, const Vec& obs);

struct UpdateStats {
  double policy_loss = 0.0;  // -surrogate, minimized
  double value_loss = 0.0;   // mean (G - V)^2
  double entropy = 0.0;
  double mean_ratio = 0.0;
  int minibatches = 0;
  int samples = 0;

  double total_loss(const PpoHyperparams& hp) const {
    return policy_loss + hp.value_coef * value_loss - hp.entropy_coef * entropy;
  }
};

// Raised when an update hits a non-finite loss; carries a diagnostic dump.
struct PpoNumericError : std::runtime_error {
  explicit PpoNumericError(const std::string& what) : std::runtime_error(what) {}
};

// Clipped-surrogate update with value regression and entropy bonus over
// update_epochs passes of shuffled minibatches; the buffer is cleared
// afterwards (on-policy).
UpdateStats ppo_update(Policy& policy, RolloutBuffer& buffer,
                       const PpoHyperparams& hp, Rng& rng);

}  // namespace hammer
