#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "rng.hpp"

namespace hammer {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class OutputHead { kLinear, kTanh, kSoftmax };

const char* head_name(OutputHead head);

// Dense feed-forward network with tanh hidden activations and a selectable
// output head. Parameters and all arithmetic are 64-bit. Policy and value
// networks in this project are built with exactly two hidden layers; the
// struct itself supports any depth so tests can use smaller nets.
struct Mlp {
  std::vector<int> layer_sizes;  // input, hidden..., output
  std::vector<Mat> weights;      // weights[l] has shape (layer_sizes[l+1], layer_sizes[l])
  std::vector<Vec> biases;
  OutputHead head = OutputHead::kLinear;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  int param_count() const;
};

// Scaled uniform init: limit = gain * sqrt(6 / (fan_in + fan_out)), zero
// biases. The output layer takes its own gain so actor heads can start small.
Mlp make_mlp(const std::vector<int>& layer_sizes, OutputHead head,
             double output_gain, Rng& rng);

struct ForwardCache {
  // activations[0] is the input, activations.back() the head output.
  std::vector<Vec> activations;
};

// Pure function of (parameters, input); repeated calls are bit-identical.
Vec forward(const Mlp& net, const Vec& input);
Vec forward(const Mlp& net, const Vec& input, ForwardCache& cache);

struct MlpGrads {
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  void add_scaled(const MlpGrads& other, double scale);
  void scale(double factor);
  double squared_norm() const;
};

MlpGrads zero_grads(const Mlp& net);

// Gradients of (upstream . output) with respect to every parameter, and
// optionally the input. upstream is taken with respect to the head output,
// so the softmax/tanh Jacobian is applied here.
MlpGrads backward(const Mlp& net, const ForwardCache& cache, const Vec& upstream,
                  Vec* input_grad = nullptr);

// Same chain but upstream is with respect to the last layer's pre-activation
// (head skipped). Policy-gradient updates for softmax heads use this: the
// logit-space gradient (e_a - p) is bounded where the two-step path through
// 1/p[a] is not.
MlpGrads backward_from_preactivation(const Mlp& net, const ForwardCache& cache,
                                     const Vec& upstream, Vec* input_grad = nullptr);

struct AdamState {
  std::vector<Mat> m_w, v_w;
  std::vector<Vec> m_b, v_b;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const Mlp& net);

// Bias-corrected Adam update. Throws on non-finite gradients, naming the
// offending layer. lr == 0 leaves parameters bit-identical (moments still
// decay and step_count still increments).
void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state, double lr);

// Adam over a bare parameter vector (used for learned log-std vectors).
struct AdamVecState {
  Vec m, v;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamVecState make_adam_vec_state(int dim);
void adam_step_vec(Vec& param, const Vec& grad, AdamVecState& state, double lr);

// Scalar loss of the network output with an analytic gradient, for the
// finite-difference oracle.
struct ScalarLoss {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
};

// Central finite differences of loss(forward(input)) over every parameter.
MlpGrads finite_difference_grads(const Mlp& net, const Vec& input,
                                 const ScalarLoss& loss, double fd_step);

// Worst relative error between two gradient sets, denominator
// max(|a|, |b|, 1e-8). Throws if either side is non-finite.
double max_relative_error(const MlpGrads& a, const MlpGrads& b);

// backward() vs central finite differences; returns the worst relative error.
double gradient_check(const Mlp& net, const Vec& input, const ScalarLoss& loss,
                      double fd_step);

// Self-check over `trials` randomly shaped two-hidden-layer networks (widths
// 4..64, output heads cycling through linear/tanh/softmax) with a random
// quadratic loss, finite differences at step 1e-6. Returns the worst relative
// error seen.
double gradcheck_random_nets(uint64_t seed, int trials);

}  // namespace hammer
