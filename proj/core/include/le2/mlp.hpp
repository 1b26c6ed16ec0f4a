#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "le2/rng.hpp"

namespace le2 {

// Two-hidden-layer perceptron (in -> H -> H -> out) with rectifier hidden
// units and either tanh or linear output. Parameters live in one flat array
// [W1, b1, W2, b2, W3, b3], weights row-major (out x in), so whole networks can
// be summed, swapped, and checkpointed as plain vectors. Forward/backward are
// explicit loops: gradients come from hand-derived backprop, not autodiff.
class Mlp {
 public:
  Mlp(int in, int hidden, int out, bool tanh_output);

  int in_dim() const { return in_; }
  int hidden_dim() const { return hidden_; }
  int out_dim() const { return out_; }
  int param_count() const { return n_params_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // fan-in scaled uniform init; the output layer is additionally scaled by
  // final_scale (biases start at zero)
  void init_params(RngStream& rng, double final_scale = 1.0);

  // Per-batch activation cache for backward passes.
  struct BatchCache {
    int batch = 0;
    std::vector<double> z1, h1, z2, h2, y;  // pre/post activations, batch-major
  };

  void forward(std::span<const double> x, std::span<double> y_out) const;  // single sample
  void forward_batch(const double* X, int batch, BatchCache& cache) const;

  // dY is dL/d(output), batch-major. Accumulates into param_grads (size
  // param_count, caller zeroes) and optionally writes dL/dX into dX.
  void backward_batch(const double* X, const double* dY, const BatchCache& cache,
                      double* param_grads, double* dX = nullptr) const;

 private:
  int in_, hidden_, out_, n_params_ = 0;
  bool tanh_output_ = false;
  std::vector<double> params_;

 public:
  // flat-layout offsets (exposed for tests poking at specific layers)
  int w1() const { return 0; }
  int b1() const { return hidden_ * in_; }
  int w2() const { return b1() + hidden_; }
  int b2() const { return w2() + hidden_ * hidden_; }
  int w3() const { return b2() + hidden_; }
  int b3() const { return w3() + out_ * hidden_; }
};

// Adam with bias correction; one instance per network.
class AdamOptimizer {
 public:
  AdamOptimizer(int n_params, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  void step(std::vector<double>& params, const std::vector<double>& grads);

  int64_t step_count() const { return t_; }
  double learning_rate() const { return lr_; }
  std::vector<double>& moment1() { return m_; }
  std::vector<double>& moment2() { return v_; }
  void restore(std::vector<double> m, std::vector<double> v, int64_t t);

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace le2
