#include "mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace hammer {

const char* head_name(OutputHead head) {
  switch (head) {
    case OutputHead::kLinear: return "linear";
    case OutputHead::kTanh: return "tanh";
    case OutputHead::kSoftmax: return "softmax";
  }
  return "?";
}

int Mlp::param_count() const {
  int n = 0;
  for (const auto& w : weights) n += static_cast<int>(w.size());
  for (const auto& b : biases) n += static_cast<int>(b.size());
  return n;
}

Mlp make_mlp(const std::vector<int>& layer_sizes, OutputHead head,
             double output_gain, Rng& rng) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("make_mlp: need at least input and output sizes");
  for (int s : layer_sizes)
    if (s <= 0) throw std::invalid_argument("make_mlp: layer sizes must be positive");

  Mlp net;
  net.layer_sizes = layer_sizes;
  net.head = head;
  const int L = static_cast<int>(layer_sizes.size()) - 1;
  for (int l = 0; l < L; ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double gain = (l == L - 1) ? output_gain : 1.0;
    const double limit = gain * std::sqrt(6.0 / (fan_in + fan_out));
    Mat w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-limit, limit);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vec::Zero(fan_out));
  }
  return net;
}

namespace {

Vec softmax(const Vec& z) {
  Vec e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

Vec apply_head(OutputHead head, const Vec& z) {
  switch (head) {
    case OutputHead::kLinear: return z;
    case OutputHead::kTanh: return z.array().tanh();
    case OutputHead::kSoftmax: return softmax(z);
  }
  return z;
}

// dL/dz from dL/dy, evaluated with the head output y.
Vec head_pullback(OutputHead head, const Vec& y, const Vec& upstream) {
  switch (head) {
    case OutputHead::kLinear:
      return upstream;
    case OutputHead::kTanh:
      return (upstream.array() * (1.0 - y.array().square())).matrix();
    case OutputHead::kSoftmax: {
      // (diag(p) - p p^T) u = p .* u - p (p . u)
      const double dot = y.dot(upstream);
      return (y.array() * (upstream.array() - dot)).matrix();
    }
  }
  return upstream;
}

MlpGrads backprop(const Mlp& net, const ForwardCache& cache, Vec delta,
                  Vec* input_grad) {
  MlpGrads grads = zero_grads(net);
  for (int l = net.num_layers() - 1; l >= 0; --l) {
    grads.weights[l].noalias() = delta * cache.activations[l].transpose();
    grads.biases[l] = delta;
    if (l > 0) {
      // hidden tanh: a' = 1 - a^2
      Vec back = net.weights[l].transpose() * delta;
      delta = (back.array() * (1.0 - cache.activations[l].array().square())).matrix();
    } else if (input_grad) {
      *input_grad = net.weights[0].transpose() * delta;
    }
  }
  return grads;
}

}  // namespace

Vec forward(const Mlp& net, const Vec& input, ForwardCache& cache) {
  if (input.size() != net.input_dim())
    throw std::invalid_argument("forward: input length " + std::to_string(input.size()) +
                                " does not match net input dim " +
                                std::to_string(net.input_dim()));
  cache.activations.clear();
  cache.activations.reserve(net.num_layers() + 1);
  cache.activations.push_back(input);
  Vec a = input;
  const int L = net.num_layers();
  for (int l = 0; l < L; ++l) {
    Vec z = net.weights[l] * a + net.biases[l];
    a = (l + 1 < L) ? Vec(z.array().tanh()) : apply_head(net.head, z);
    cache.activations.push_back(a);
  }
  return a;
}

Vec forward(const Mlp& net, const Vec& input) {
  ForwardCache cache;
  return forward(net, input, cache);
}

void MlpGrads::add_scaled(const MlpGrads& other, double s) {
  for (size_t l = 0; l < weights.size(); ++l) {
    weights[l] += s * other.weights[l];
    biases[l] += s * other.biases[l];
  }
}

void MlpGrads::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
}

double MlpGrads::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weights) s += w.squaredNorm();
  for (const auto& b : biases) s += b.squaredNorm();
  return s;
}

MlpGrads zero_grads(const Mlp& net) {
  MlpGrads g;
  for (int l = 0; l < net.num_layers(); ++l) {
    g.weights.push_back(Mat::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.biases.push_back(Vec::Zero(net.biases[l].size()));
  }
  return g;
}

MlpGrads backward(const Mlp& net, const ForwardCache& cache, const Vec& upstream,
                  Vec* input_grad) {
  if (upstream.size() != net.output_dim())
    throw std::invalid_argument("backward: upstream length does not match output dim");
  if (cache.activations.size() != static_cast<size_t>(net.num_layers() + 1))
    throw std::invalid_argument("backward: cache does not match network depth");
  Vec delta = head_pullback(net.head, cache.activations.back(), upstream);
  return backprop(net, cache, std::move(delta), input_grad);
}

MlpGrads backward_from_preactivation(const Mlp& net, const ForwardCache& cache,
                                     const Vec& upstream, Vec* input_grad) {
  if (upstream.size() != net.output_dim())
    throw std::invalid_argument("backward: upstream length does not match output dim");
  return backprop(net, cache, upstream, input_grad);
}

AdamState make_adam_state(const Mlp& net) {
  AdamState st;
  for (int l = 0; l < net.num_layers(); ++l) {
    st.m_w.push_back(Mat::Zero(net.weights[l].rows(), net.weights[l].cols()));
    st.v_w.push_back(Mat::Zero(net.weights[l].rows(), net.weights[l].cols()));
    st.m_b.push_back(Vec::Zero(net.biases[l].size()));
    st.v_b.push_back(Vec::Zero(net.biases[l].size()));
  }
  return st;
}

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state, double lr) {
  if (lr < 0.0) throw std::invalid_argument("adam_step: lr must be >= 0");
  for (int l = 0; l < net.num_layers(); ++l) {
    if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite())
      throw std::runtime_error("adam_step: non-finite gradient in layer " +
                               std::to_string(l));
  }
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (int l = 0; l < net.num_layers(); ++l) {
    state.m_w[l] = state.beta1 * state.m_w[l] + (1.0 - state.beta1) * grads.weights[l];
    state.v_w[l] = state.beta2 * state.v_w[l].array() +
                   (1.0 - state.beta2) * grads.weights[l].array().square();
    state.m_b[l] = state.beta1 * state.m_b[l] + (1.0 - state.beta1) * grads.biases[l];
    state.v_b[l] = state.beta2 * state.v_b[l].array() +
                   (1.0 - state.beta2) * grads.biases[l].array().square();
    if (lr == 0.0) continue;
    net.weights[l].array() -=
        lr * (state.m_w[l].array() / bc1) / ((state.v_w[l].array() / bc2).sqrt() + state.epsilon);
    net.biases[l].array() -=
        lr * (state.m_b[l].array() / bc1) / ((state.v_b[l].array() / bc2).sqrt() + state.epsilon);
  }
}

AdamVecState make_adam_vec_state(int dim) {
  AdamVecState st;
  st.m = Vec::Zero(dim);
  st.v = Vec::Zero(dim);
  return st;
}

void adam_step_vec(Vec& param, const Vec& grad, AdamVecState& state, double lr) {
  if (!grad.allFinite())
    throw std::runtime_error("adam_step_vec: non-finite gradient");
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v.array() + (1.0 - state.beta2) * grad.array().square();
  if (lr == 0.0) return;
  param.array() -= lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + state.epsilon);
}

MlpGrads finite_difference_grads(const Mlp& net, const Vec& input,
                                 const ScalarLoss& loss, double fd_step) {
  if (fd_step <= 0.0) throw std::invalid_argument("finite_difference_grads: fd_step must be > 0");
  Mlp probe = net;
  MlpGrads fd = zero_grads(net);
  auto eval = [&]() { return loss.value(forward(probe, input)); };
  for (int l = 0; l < net.num_layers(); ++l) {
    for (int r = 0; r < net.weights[l].rows(); ++r) {
      for (int c = 0; c < net.weights[l].cols(); ++c) {
        const double saved = probe.weights[l](r, c);
        probe.weights[l](r, c) = saved + fd_step;
        const double up = eval();
        probe.weights[l](r, c) = saved - fd_step;
        const double dn = eval();
        probe.weights[l](r, c) = saved;
        fd.weights[l](r, c) = (up - dn) / (2.0 * fd_step);
      }
    }
    for (int i = 0; i < net.biases[l].size(); ++i) {
      const double saved = probe.biases[l](i);
      probe.biases[l](i) = saved + fd_step;
      const double up = eval();
      probe.biases[l](i) = saved - fd_step;
      const double dn = eval();
      probe.biases[l](i) = saved;
      fd.biases[l](i) = (up - dn) / (2.0 * fd_step);
    }
  }
  return fd;
}

double max_relative_error(const MlpGrads& a, const MlpGrads& b) {
  double worst = 0.0;
  auto compare = [&worst](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y))
      throw std::runtime_error("max_relative_error: non-finite gradient value");
    // The floor keeps central-difference roundoff (~1e-10 absolute at step
    // 1e-6) from dominating components whose true gradient is near zero; a
    // wrong or missing term on any component that matters still scores >> 1.
    const double denom = std::max({std::abs(x), std::abs(y), 1e-4});
    worst = std::max(worst, std::abs(x - y) / denom);
  };
  for (size_t l = 0; l < a.weights.size(); ++l) {
    for (int r = 0; r < a.weights[l].rows(); ++r)
      for (int c = 0; c < a.weights[l].cols(); ++c)
        compare(a.weights[l](r, c), b.weights[l](r, c));
    for (int i = 0; i < a.biases[l].size(); ++i)
      compare(a.biases[l](i), b.biases[l](i));
  }
  return worst;
}

double gradient_check(const Mlp& net, const Vec& input, const ScalarLoss& loss,
                      double fd_step) {
  ForwardCache cache;
  Vec out = forward(net, input, cache);
  MlpGrads analytic = backward(net, cache, loss.grad(out));
  MlpGrads fd = finite_difference_grads(net, input, loss, fd_step);
  return max_relative_error(analytic, fd);
}

double gradcheck_random_nets(uint64_t seed, int trials) {
  if (trials < 1) throw std::invalid_argument("gradcheck_random_nets: trials must be >= 1");
  Rng rng(splitmix64(seed));
  const OutputHead heads[] = {OutputHead::kLinear, OutputHead::kTanh, OutputHead::kSoftmax};
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<int> sizes;
    sizes.push_back(2 + rng.uniform_int(15));  // input dim 2..16
    for (int l = 0; l < 2; ++l) sizes.push_back(4 + rng.uniform_int(61));  // hidden 4..64
    sizes.push_back(2 + rng.uniform_int(9));  // output dim 2..10
    OutputHead head = heads[trial % 3];
    Mlp net = make_mlp(sizes, head, 1.0, rng);
    Vec input(net.input_dim());
    for (Eigen::Index i = 0; i < input.size(); ++i) input[i] = rng.normal();

    // loss(y) = w.y + 0.5 * sum_i q_i y_i^2, a quadratic that exercises the
    // head's Jacobian without saturating it.
    Vec w(net.output_dim()), q(net.output_dim());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.normal();
    for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = rng.normal();
    ScalarLoss loss{
        [w, q](const Vec& y) { return w.dot(y) + 0.5 * y.cwiseProduct(q).dot(y); },
        [w, q](const Vec& y) { return Vec(w + q.cwiseProduct(y)); }};
    worst = std::max(worst, gradient_check(net, input, loss, 1e-6));
  }
  return worst;
}

}  // namespace hammer
