#include "ppo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hammer {

Policy make_categorical_policy(int obs_dim, int hidden, int n_actions, Rng& rng) {
  Policy p;
  p.kind = PolicyKind::kCategorical;
  p.actor = make_mlp({obs_dim, hidden, hidden, n_actions}, OutputHead::kSoftmax, 0.01, rng);
  p.critic = make_mlp({obs_dim, hidden, hidden, 1}, OutputHead::kLinear, 1.0, rng);
  p.actor_opt = make_adam_state(p.actor);
  p.critic_opt = make_adam_state(p.critic);
  return p;
}

Policy make_gaussian_policy(int obs_dim, int hidden, int action_dim,
                            int action_block, bool block_factored, Rng& rng) {
  if (action_block <= 0 || action_dim % action_block != 0)
    throw std::invalid_argument("make_gaussian_policy: action_block must divide action_dim");
  Policy p;
  p.kind = PolicyKind::kGaussian;
  p.actor = make_mlp({obs_dim, hidden, hidden, action_dim}, OutputHead::kTanh, 0.01, rng);
  p.critic = make_mlp({obs_dim, hidden, hidden, 1}, OutputHead::kLinear, 1.0, rng);
  p.log_std = Vec::Constant(action_dim, kLogStdInit);
  p.action_block = action_block;
  p.block_factored = block_factored;
  p.actor_opt = make_adam_state(p.actor);
  p.critic_opt = make_adam_state(p.critic);
  p.log_std_opt = make_adam_vec_state(action_dim);
  return p;
}

std::vector<double> compute_returns(const std::vector<double>& rewards,
                                    const std::vector<char>& dones, double gamma) {
  if (rewards.size() != dones.size())
    throw std::invalid_argument("compute_returns: rewards/dones length mismatch");
  std::vector<double> returns(rewards.size());
  double running = 0.0;
  for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
    if (dones[t]) running = 0.0;
    running = rewards[t] + gamma * running;
    returns[t] = running;
  }
  return returns;
}

std::vector<double> buffer_returns(const RolloutBuffer& buffer, double gamma) {
  std::map<int, std::vector<size_t>> by_stream;
  for (size_t i = 0; i < buffer.transitions.size(); ++i)
    by_stream[buffer.transitions[i].stream].push_back(i);
  std::vector<double> out(buffer.transitions.size());
  for (const auto& [stream, idx] : by_stream) {
    std::vector<double> rewards(idx.size());
    std::vector<char> dones(idx.size());
    for (size_t k = 0; k < idx.size(); ++k) {
      rewards[k] = buffer.transitions[idx[k]].reward;
      dones[k] = buffer.transitions[idx[k]].done ? 1 : 0;
    }
    std::vector<double> g = compute_returns(rewards, dones, gamma);
    for (size_t k = 0; k < idx.size(); ++k) out[idx[k]] = g[k];
  }
  return out;
}

std::vector<double> compute_advantages(const std::vector<double>& returns,
                                       const std::vector<double>& values) {
  if (returns.size() != values.size())
    throw std::invalid_argument("compute_advantages: length mismatch");
  std::vector<double> adv(returns.size());
  for (size_t i = 0; i < adv.size(); ++i) adv[i] = returns[i] - values[i];
  if (adv.size() <= 1) return adv;
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double denom = std::sqrt(var) + 1e-8;
  for (double& a : adv) a = (a - mean) / denom;
  return adv;
}

double clipped_surrogate(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantage;
  return std::min(ratio * advantage, clipped);
}

namespace {

// Output slice this transition's action lives in.
std::pair<int, int> action_slice(const Policy& p, const Transition& t) {
  if (!p.block_factored) return {0, static_cast<int>(p.actor.output_dim())};
  const int offset = t.stream * p.action_block;
  if (offset < 0 || offset + p.action_block > p.actor.output_dim())
    throw std::out_of_range("ppo_update: transition stream outside actor output");
  return {offset, p.action_block};
}

}  // namespace

ActionSample sample_action(const Policy& policy, const Vec& obs, Rng& rng) {
  ActionSample s;
  if (policy.kind == PolicyKind::kCategorical) {
    CategoricalDist dist{forward(policy.actor, obs)};
    s.action = categorical_sample(dist, rng);
    s.log_prob = categorical_log_prob(dist, s.action);
  } else {
    DiagGaussianDist dist{forward(policy.actor, obs), policy.log_std};
    s.action_vec = gaussian_sample(dist, rng);
    s.executed = s.action_vec.cwiseMax(-1.0).cwiseMin(1.0);
    s.log_prob = gaussian_log_prob(dist, s.action_vec);
  }
  s.value = forward(policy.critic, obs)[0];
  return s;
}

ActionSample mean_action(const Policy& policy, const Vec& obs) {
  ActionSample s;
  if (policy.kind == PolicyKind::kCategorical) {
    Vec p = forward(policy.actor, obs);
    p.maxCoeff(&s.action);
    s.log_prob = std::log(p[s.action]);
  } else {
    s.action_vec = forward(policy.actor, obs);
    s.executed = s.action_vec.cwiseMax(-1.0).cwiseMin(1.0);
    s.log_prob = gaussian_log_prob({s.action_vec, policy.log_std}, s.action_vec);
  }
  s.value = forward(policy.critic, obs)[0];
  return s;
}

UpdateStats ppo_update(Policy& policy, RolloutBuffer& buffer,
                       const PpoHyperparams& hp, Rng& rng) {
  const int n = static_cast<int>(buffer.size());
  if (n == 0) throw std::invalid_argument("ppo_update: empty buffer");

  const std::vector<double> returns = buffer_returns(buffer, hp.gamma);
  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) values[i] = buffer.transitions[i].value_estimate;
  const std::vector<double> advantages = compute_advantages(returns, values);

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  UpdateStats stats;
  double sum_ratio = 0.0, sum_surr = 0.0, sum_vloss = 0.0, sum_entropy = 0.0;
  long tally = 0;

  for (int epoch = 0; epoch < hp.update_epochs; ++epoch) {
    shuffle_indices(order, rng);
    for (int start = 0; start < n; start += hp.minibatch_size) {
      const int end = std::min(start + hp.minibatch_size, n);
      const int count = end - start;

      MlpGrads actor_g = zero_grads(policy.actor);
      MlpGrads critic_g = zero_grads(policy.critic);
      Vec log_std_g = Vec::Zero(policy.log_std.size());
      double mb_surr = 0.0, mb_vloss = 0.0, mb_entropy = 0.0;

      for (int k = start; k < end; ++k) {
        const Transition& tr = buffer.transitions[order[k]];
        const double adv = advantages[order[k]];
        const double ret = returns[order[k]];

        ForwardCache cache;
        const Vec out = forward(policy.actor, tr.observation, cache);

        double ratio, entropy;
        if (policy.kind == PolicyKind::kCategorical) {
          // ratio = p_new[a] / p_old[a] without logs, so a collapsed action
          // cannot produce a NaN.
          const double p_new = out[tr.action];
          ratio = p_new * std::exp(-tr.log_prob_old);
          const double unclipped = ratio * adv;
          const double clipped =
              std::clamp(ratio, 1.0 - hp.clip_epsilon, 1.0 + hp.clip_epsilon) * adv;
          mb_surr += std::min(unclipped, clipped);
          // d surr / d log p[a]: ratio*adv on the unclipped branch, 0 when the
          // clip is active.
          const double dsurr_dlp = (unclipped <= clipped) ? unclipped : 0.0;

          double h = 0.0;
          for (int i = 0; i < out.size(); ++i)
            if (out[i] > 0.0) h -= out[i] * std::log(out[i]);
          entropy = h;

          // Logit-space gradient of -(surr + c_H * H).
          Vec g_z(out.size());
          for (int i = 0; i < out.size(); ++i) {
            const double onehot = (i == tr.action) ? 1.0 : 0.0;
            const double dh_dz =
                out[i] > 0.0 ? -out[i] * (std::log(out[i]) + h) : 0.0;
            g_z[i] = -(dsurr_dlp * (onehot - out[i]) + hp.entropy_coef * dh_dz);
          }
          actor_g.add_scaled(backward_from_preactivation(policy.actor, cache, g_z), 1.0);
        } else {
          const auto [offset, len] = action_slice(policy, tr);
          double lp_new = 0.0;
          for (int i = 0; i < len; ++i) {
            const double sd = std::exp(policy.log_std[offset + i]);
            const double z = (tr.action_vec[i] - out[offset + i]) / sd;
            lp_new += -0.5 * z * z - policy.log_std[offset + i] - 0.9189385332046727;
          }
          ratio = std::exp(lp_new - tr.log_prob_old);
          const double unclipped = ratio * adv;
          const double clipped =
              std::clamp(ratio, 1.0 - hp.clip_epsilon, 1.0 + hp.clip_epsilon) * adv;
          mb_surr += std::min(unclipped, clipped);
          const double dsurr_dlp = (unclipped <= clipped) ? unclipped : 0.0;

          entropy = len * (0.5 + 0.9189385332046727);
          for (int i = 0; i < len; ++i) entropy += policy.log_std[offset + i];

          Vec g_mu = Vec::Zero(out.size());
          for (int i = 0; i < len; ++i) {
            const double sd = std::exp(policy.log_std[offset + i]);
            const double diff = tr.action_vec[i] - out[offset + i];
            // d lp / d mu = (x - mu) / sd^2 ; d lp / d log_std = z^2 - 1
            g_mu[offset + i] = -(dsurr_dlp * diff / (sd * sd));
            const double z2 = (diff / sd) * (diff / sd);
            log_std_g[offset + i] +=
                -(dsurr_dlp * (z2 - 1.0) + hp.entropy_coef * 1.0);
          }
          actor_g.add_scaled(backward(policy.actor, cache, g_mu), 1.0);
        }
        mb_entropy += entropy;
        sum_ratio += ratio;

        ForwardCache vcache;
        const double v = forward(policy.critic, tr.observation, vcache)[0];
        const double verr = v - ret;
        mb_vloss += verr * verr;
        critic_g.add_scaled(
            backward(policy.critic, vcache, Vec::Constant(1, 2.0 * hp.value_coef * verr)),
            1.0);
      }

      const double inv = 1.0 / static_cast<double>(count);
      actor_g.scale(inv);
      critic_g.scale(inv);
      log_std_g *= inv;
      mb_surr *= inv;
      mb_vloss *= inv;
      mb_entropy *= inv;

      const double mb_loss = -mb_surr + hp.value_coef * mb_vloss - hp.entropy_coef * mb_entropy;
      if (!std::isfinite(mb_loss)) {
        std::ostringstream dump;
        dump << "ppo_update: non-finite loss (surr=" << mb_surr
             << " vloss=" << mb_vloss << " entropy=" << mb_entropy
             << " epoch=" << epoch << " minibatch@" << start
             << " buffer=" << n << ")";
        throw PpoNumericError(dump.str());
      }

      // Joint actor + log_std norm clip, critic clipped separately.
      if (hp.max_grad_norm > 0.0) {
        const double actor_norm =
            std::sqrt(actor_g.squared_norm() + log_std_g.squaredNorm());
        if (actor_norm > hp.max_grad_norm) {
          const double s = hp.max_grad_norm / actor_norm;
          actor_g.scale(s);
          log_std_g *= s;
        }
        const double critic_norm = std::sqrt(critic_g.squared_norm());
        if (critic_norm > hp.max_grad_norm)
          critic_g.scale(hp.max_grad_norm / critic_norm);
      }

      adam_step(policy.actor, actor_g, policy.actor_opt, hp.lr);
      adam_step(policy.critic, critic_g, policy.critic_opt, hp.lr);
      if (policy.kind == PolicyKind::kGaussian) {
        adam_step_vec(policy.log_std, log_std_g, policy.log_std_opt, hp.lr);
        policy.log_std = policy.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
      }

      sum_surr += mb_surr;
      sum_vloss += mb_vloss;
      sum_entropy += mb_entropy;
      stats.minibatches += 1;
      tally += count;
    }
  }

  stats.samples = static_cast<int>(tally);
  stats.policy_loss = -sum_surr / stats.minibatches;
  stats.value_loss = sum_vloss / stats.minibatches;
  stats.entropy = sum_entropy / stats.minibatches;
  stats.mean_ratio = sum_ratio / static_cast<double>(tally);
  buffer.clear();
  return stats;
}

}  // namespace hammer
