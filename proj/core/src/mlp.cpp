#include "le2/mlp.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace le2 {
namespace {

// y[o] += sum_i W[o, i] * x[i], W row-major
inline void affine(const double* W, const double* b, const double* x, double* y, int out,
                   int in) {
  for (int o = 0; o < out; ++o) {
    double acc = b[o];
    const double* w = W + static_cast<std::size_t>(o) * in;
    for (int i = 0; i < in; ++i) acc += w[i] * x[i];
    y[o] = acc;
  }
}

}  // namespace

Mlp::Mlp(int in, int hidden, int out, bool tanh_output)
    : in_(in), hidden_(hidden), out_(out) {
  if (in <= 0 || hidden <= 0 || out <= 0) throw std::invalid_argument("Mlp: bad layer sizes");
  tanh_output_ = tanh_output;
  n_params_ = hidden_ * in_ + hidden_ + hidden_ * hidden_ + hidden_ + out_ * hidden_ + out_;
  params_.assign(static_cast<std::size_t>(n_params_), 0.0);
}

void Mlp::init_params(RngStream& rng, double final_scale) {
  auto fill = [&rng](double* w, int out, int in, double scale) {
    double bound = scale / std::sqrt(static_cast<double>(in));
    for (int i = 0; i < out * in; ++i) w[i] = rng.uniform(-bound, bound);
  };
  std::fill(params_.begin(), params_.end(), 0.0);
  fill(params_.data() + w1(), hidden_, in_, 1.0);
  fill(params_.data() + w2(), hidden_, hidden_, 1.0);
  fill(params_.data() + w3(), out_, hidden_, final_scale);
}

void Mlp::forward(std::span<const double> x, std::span<double> y_out) const {
  std::vector<double> h1(hidden_), h2(hidden_);
  const double* p = params_.data();
  affine(p + w1(), p + b1(), x.data(), h1.data(), hidden_, in_);
  for (double& v : h1) v = v > 0.0 ? v : 0.0;
  affine(p + w2(), p + b2(), h1.data(), h2.data(), hidden_, hidden_);
  for (double& v : h2) v = v > 0.0 ? v : 0.0;
  affine(p + w3(), p + b3(), h2.data(), y_out.data(), out_, hidden_);
  if (tanh_output_)
    for (int o = 0; o < out_; ++o) y_out[o] = std::tanh(y_out[o]);
}

void Mlp::forward_batch(const double* X, int batch, BatchCache& cache) const {
  cache.batch = batch;
  cache.z1.resize(static_cast<std::size_t>(batch) * hidden_);
  cache.h1.resize(static_cast<std::size_t>(batch) * hidden_);
  cache.z2.resize(static_cast<std::size_t>(batch) * hidden_);
  cache.h2.resize(static_cast<std::size_t>(batch) * hidden_);
  cache.y.resize(static_cast<std::size_t>(batch) * out_);
  const double* p = params_.data();
  for (int bidx = 0; bidx < batch; ++bidx) {
    const double* x = X + static_cast<std::size_t>(bidx) * in_;
    double* z1 = cache.z1.data() + static_cast<std::size_t>(bidx) * hidden_;
    double* h1v = cache.h1.data() + static_cast<std::size_t>(bidx) * hidden_;
    double* z2 = cache.z2.data() + static_cast<std::size_t>(bidx) * hidden_;
    double* h2v = cache.h2.data() + static_cast<std::size_t>(bidx) * hidden_;
    double* y = cache.y.data() + static_cast<std::size_t>(bidx) * out_;
    affine(p + w1(), p + b1(), x, z1, hidden_, in_);
    for (int i = 0; i < hidden_; ++i) h1v[i] = z1[i] > 0.0 ? z1[i] : 0.0;
    affine(p + w2(), p + b2(), h1v, z2, hidden_, hidden_);
    for (int i = 0; i < hidden_; ++i) h2v[i] = z2[i] > 0.0 ? z2[i] : 0.0;
    affine(p + w3(), p + b3(), h2v, y, out_, hidden_);
    if (tanh_output_)
      for (int o = 0; o < out_; ++o) y[o] = std::tanh(y[o]);
  }
}

void Mlp::backward_batch(const double* X, const double* dY, const BatchCache& cache,
                         double* param_grads, double* dX) const {
  const double* p = params_.data();
  std::vector<double> dz3(out_), dh2(hidden_), dz2(hidden_), dh1(hidden_), dz1(hidden_);

  for (int bidx = 0; bidx < cache.batch; ++bidx) {
    const double* x = X + static_cast<std::size_t>(bidx) * in_;
    const double* z1 = cache.z1.data() + static_cast<std::size_t>(bidx) * hidden_;
    const double* h1v = cache.h1.data() + static_cast<std::size_t>(bidx) * hidden_;
    const double* z2 = cache.z2.data() + static_cast<std::size_t>(bidx) * hidden_;
    const double* h2v = cache.h2.data() + static_cast<std::size_t>(bidx) * hidden_;
    const double* y = cache.y.data() + static_cast<std::size_t>(bidx) * out_;
    const double* dy = dY + static_cast<std::size_t>(bidx) * out_;

    for (int o = 0; o < out_; ++o)
      dz3[o] = tanh_output_ ? dy[o] * (1.0 - y[o] * y[o]) : dy[o];

    // layer 3 grads; dh2 = W3^T dz3
    std::fill(dh2.begin(), dh2.end(), 0.0);
    for (int o = 0; o < out_; ++o) {
      const double g = dz3[o];
      const double* w = p + w3() + static_cast<std::size_t>(o) * hidden_;
      double* gw = param_grads + w3() + static_cast<std::size_t>(o) * hidden_;
      for (int i = 0; i < hidden_; ++i) {
        gw[i] += g * h2v[i];
        dh2[i] += g * w[i];
      }
      param_grads[b3() + o] += g;
    }

    for (int i = 0; i < hidden_; ++i) dz2[i] = z2[i] > 0.0 ? dh2[i] : 0.0;

    std::fill(dh1.begin(), dh1.end(), 0.0);
    for (int o = 0; o < hidden_; ++o) {
      const double g = dz2[o];
      if (g == 0.0) continue;
      const double* w = p + w2() + static_cast<std::size_t>(o) * hidden_;
      double* gw = param_grads + w2() + static_cast<std::size_t>(o) * hidden_;
      for (int i = 0; i < hidden_; ++i) {
        gw[i] += g * h1v[i];
        dh1[i] += g * w[i];
      }
      param_grads[b2() + o] += g;
    }

    for (int i = 0; i < hidden_; ++i) dz1[i] = z1[i] > 0.0 ? dh1[i] : 0.0;

    double* dx = dX ? dX + static_cast<std::size_t>(bidx) * in_ : nullptr;
    if (dx) std::memset(dx, 0, sizeof(double) * in_);
    for (int o = 0; o < hidden_; ++o) {
      const double g = dz1[o];
      if (g == 0.0) continue;
      const double* w = p + w1() + static_cast<std::size_t>(o) * in_;
      double* gw = param_grads + w1() + static_cast<std::size_t>(o) * in_;
      for (int i = 0; i < in_; ++i) {
        gw[i] += g * x[i];
        if (dx) dx[i] += g * w[i];
      }
      param_grads[b1() + o] += g;
    }
  }
}

AdamOptimizer::AdamOptimizer(int n_params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.assign(static_cast<std::size_t>(n_params), 0.0);
  v_.assign(static_cast<std::size_t>(n_params), 0.0);
}

void AdamOptimizer::step(std::vector<double>& params, const std::vector<double>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw std::invalid_argument("AdamOptimizer: size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

void AdamOptimizer::restore(std::vector<double> m, std::vector<double> v, int64_t t) {
  if (m.size() != m_.size() || v.size() != v_.size())
    throw std::invalid_argument("AdamOptimizer::restore: size mismatch");
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

}  // namespace le2
