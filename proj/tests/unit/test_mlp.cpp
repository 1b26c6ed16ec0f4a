#include <cmath>

#include "doctest.h"
#include "le2/mlp.hpp"
#include "le2/rng.hpp"

using namespace le2;

namespace {

// floored relative error: tiny gradients are compared absolutely so finite
// difference roundoff cannot inflate the ratio
double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-4, std::abs(a), std::abs(b)});
}

double mse_loss(const Mlp& net, const std::vector<double>& X, int batch,
                const std::vector<double>& targets) {
  Mlp::BatchCache cache;
  net.forward_batch(X.data(), batch, cache);
  double loss = 0.0;
  const int out = net.out_dim();
  for (int b = 0; b < batch; ++b)
    for (int o = 0; o < out; ++o) {
      double err = cache.y[b * out + o] - targets[b * out + o];
      loss += err * err;
    }
  return loss / batch;
}

}  // namespace

TEST_SUITE("mlp") {
  TEST_CASE("forward single equals forward batch") {
    RngStream rng(1);
    Mlp net(6, 8, 3, true);
    net.init_params(rng);
    std::vector<double> X(2 * 6);
    for (double& v : X) v = rng.uniform(-1, 1);
    Mlp::BatchCache cache;
    net.forward_batch(X.data(), 2, cache);
    for (int b = 0; b < 2; ++b) {
      std::vector<double> y(3);
      net.forward(std::span(X.data() + b * 6, 6), y);
      for (int o = 0; o < 3; ++o) CHECK(y[o] == cache.y[b * 3 + o]);
    }
  }

  TEST_CASE("tanh output is bounded, linear output is not clamped") {
    RngStream rng(2);
    Mlp bounded(4, 8, 2, true);
    bounded.init_params(rng);
    for (double& p : bounded.params()) p *= 50.0;  // saturate
    std::vector<double> x{3.0, -2.0, 1.0, 0.5}, y(2);
    bounded.forward(x, y);
    for (double v : y) CHECK(std::abs(v) <= 1.0);
  }

  TEST_CASE("backward matches central finite differences") {
    const double h = 1e-5;
    for (uint64_t seed = 0; seed < 3; ++seed) {
      RngStream rng(derive_seed(seed, "gradcheck"));
      for (bool tanh_out : {true, false}) {
        Mlp net(5, 8, 2, tanh_out);
        net.init_params(rng);
        const int batch = 4;
        std::vector<double> X(batch * 5), targets(batch * 2);
        for (double& v : X) v = rng.uniform(-1, 1);
        for (double& v : targets) v = rng.uniform(-1, 1);

        // analytic gradient of the batch MSE
        Mlp::BatchCache cache;
        net.forward_batch(X.data(), batch, cache);
        std::vector<double> dY(batch * 2);
        for (int i = 0; i < batch * 2; ++i)
          dY[i] = 2.0 * (cache.y[i] - targets[i]) / batch;
        std::vector<double> grads(net.param_count(), 0.0);
        std::vector<double> dX(batch * 5, 0.0);
        net.backward_batch(X.data(), dY.data(), cache, grads.data(), dX.data());

        double worst = 0.0;
        for (int p = 0; p < net.param_count(); ++p) {
          double saved = net.params()[p];
          net.params()[p] = saved + h;
          double up = mse_loss(net, X, batch, targets);
          net.params()[p] = saved - h;
          double down = mse_loss(net, X, batch, targets);
          net.params()[p] = saved;
          worst = std::max(worst, rel_err(grads[p], (up - down) / (2 * h)));
        }
        CHECK(worst < 1e-4);

        // input gradients against finite differences too
        double worst_x = 0.0;
        for (int i = 0; i < batch * 5; ++i) {
          std::vector<double> Xp = X, Xm = X;
          Xp[i] += h;
          Xm[i] -= h;
          double fd = (mse_loss(net, Xp, batch, targets) - mse_loss(net, Xm, batch, targets)) /
                      (2 * h);
          worst_x = std::max(worst_x, rel_err(dX[i], fd));
        }
        CHECK(worst_x < 1e-4);
      }
    }
  }

  TEST_CASE("adam drives a quadratic to its minimum") {
    std::vector<double> params{5.0, -3.0};
    AdamOptimizer opt(2, 0.05);
    for (int step = 0; step < 2000; ++step) {
      std::vector<double> grads{2 * (params[0] - 1.0), 2 * (params[1] + 2.0)};
      opt.step(params, grads);
    }
    CHECK(params[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(params[1] == doctest::Approx(-2.0).epsilon(1e-3));
    CHECK(opt.step_count() == 2000);
  }

  TEST_CASE("init scales the final layer") {
    RngStream rng(9);
    Mlp net(10, 16, 4, true);
    net.init_params(rng, 1e-3);
    double max_final = 0.0;
    for (int i = net.w3(); i < net.b3(); ++i)
      max_final = std::max(max_final, std::abs(net.params()[i]));
    CHECK(max_final <= 1e-3 / std::sqrt(16.0) + 1e-12);
    CHECK(max_final > 0.0);
  }
}
