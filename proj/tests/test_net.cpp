#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "acnmp/gaussian.hpp"
#include "acnmp/net.hpp"
#include "support/oracles.hpp"

using namespace acnmp;

TEST_CASE("mlp_forward identity layer maps input through unchanged") {
  MlpSpec spec{{2, 2, Activation::identity}};
  // W = I, b = 0
  ParameterVector params{1, 0, 0, 1, 0, 0};
  const auto out = mlp_forward(spec, params, {2.0, -3.0});
  REQUIRE(out[0] == 2.0);
  REQUIRE(out[1] == -3.0);
}

TEST_CASE("mlp_forward relu layer with zero weights returns relu of bias") {
  MlpSpec spec{{3, 2, Activation::relu}};
  ParameterVector params(3 * 2 + 2, 0.0);
  params[6] = 1.0;   // b0
  params[7] = -1.0;  // b1
  for (auto input : {std::vector<double>{0, 0, 0}, std::vector<double>{5, -2, 0.3}}) {
    const auto out = mlp_forward(spec, params, input);
    REQUIRE(out[0] == 1.0);
    REQUIRE(out[1] == 0.0);
  }
}

TEST_CASE("mlp_forward matches an independent naive re-implementation") {
  const MlpSpec spec = mlp_chain(1, {4, 2});
  const ParameterVector params = init_params(spec, 42);
  const auto out = mlp_forward(spec, params, {0.5});

  const std::vector<oracles::NaiveLayer> naive{{1, 4, 1}, {4, 2, 0}};
  const auto expected = oracles::naive_forward(naive, params, {0.5});
  REQUIRE(out.size() == expected.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    REQUIRE(out[i] == Catch::Approx(expected[i]).margin(1e-15));
}

TEST_CASE("mlp_forward is deterministic bit for bit") {
  const MlpSpec spec = mlp_chain(3, {16, 8, 4});
  const ParameterVector params = init_params(spec, 7);
  const std::vector<double> input{0.1, -0.7, 2.3};
  const auto a = mlp_forward(spec, params, input);
  const auto b = mlp_forward(spec, params, input);
  REQUIRE(a == b);
}

TEST_CASE("mlp_forward rejects bad inputs") {
  const MlpSpec spec = mlp_chain(2, {3});
  const ParameterVector params = init_params(spec, 1);
  REQUIRE_THROWS_AS(mlp_forward(spec, params, {1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(mlp_forward(spec, ParameterVector(5, 0.0), {1.0, 2.0}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(mlp_forward(spec, params, {1.0, std::nan("")}), std::domain_error);
  MlpSpec broken{{2, 3, Activation::relu}, {4, 1, Activation::identity}};
  REQUIRE_THROWS_AS(mlp_forward(broken, params, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("softplus analytic values and asymptotes") {
  REQUIRE(softplus(0.0) == Catch::Approx(std::log(2.0)).epsilon(1e-12));
  REQUIRE(std::abs(softplus(100.0) - 100.0) < 1e-12);
  REQUIRE(softplus(-100.0) > 0.0);
  REQUIRE(softplus(-100.0) < 1e-40);
  for (double x : {-30.0, -2.0, -0.1, 0.0, 0.3, 5.0, 60.0}) REQUIRE(softplus(x) > 0.0);
}

TEST_CASE("gaussian_nll standard normal at its mean") {
  const double floor = 0.0;
  // sigma_raw chosen so softplus(sigma_raw) = 1
  const double raw = std::log(std::exp(1.0) - 1.0);
  REQUIRE(gaussian_nll({0.0}, {raw}, {0.0}, floor) ==
          Catch::Approx(0.9189385332046727).epsilon(1e-12));
  REQUIRE(gaussian_nll({3.0}, {raw}, {3.0}, floor) ==
          Catch::Approx(0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("gaussian_nll is minimized at the mean") {
  const double raw = std::log(std::exp(1.0) - 1.0);
  const double at_mean = gaussian_nll({3.0}, {raw}, {3.0}, 0.0);
  for (double target : {2.0, 2.9, 3.01, 3.5, 10.0})
    REQUIRE(gaussian_nll({3.0}, {raw}, {target}, 0.0) > at_mean);

  // property form: nll(mu, s, t) >= nll(t, s, t) for random draws
  Rng rng = make_rng(99);
  for (int k = 0; k < 200; ++k) {
    const double mu = uniform(rng, -5, 5);
    const double t = uniform(rng, -5, 5);
    const double sraw = uniform(rng, -3, 3);
    REQUIRE(gaussian_nll({mu}, {sraw}, {t}) >= gaussian_nll({t}, {sraw}, {t}) - 1e-12);
  }
}

TEST_CASE("gaussian_nll analytic gradients match finite differences") {
  Rng rng = make_rng(4242);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> mu(3), raw(3), target(3);
    for (int d = 0; d < 3; ++d) {
      mu[d] = uniform(rng, -2, 2);
      raw[d] = uniform(rng, -2, 2);
      target[d] = uniform(rng, -2, 2);
    }
    std::vector<double> dmu, draw;
    gaussian_nll_grad(mu, raw, target, 1e-4, dmu, draw);

    const auto fd_mu = oracles::finite_difference(
        [&](const std::vector<double>& m) { return gaussian_nll(m, raw, target, 1e-4); }, mu);
    const auto fd_raw = oracles::finite_difference(
        [&](const std::vector<double>& r) { return gaussian_nll(mu, r, target, 1e-4); }, raw);
    REQUIRE(oracles::max_relative_error(dmu, fd_mu) < 1e-4);
    REQUIRE(oracles::max_relative_error(draw, fd_raw) < 1e-4);
  }
}

TEST_CASE("gaussian_nll rejects mismatched lengths") {
  REQUIRE_THROWS_AS(gaussian_nll({0.0, 1.0}, {0.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("backward of a linear layer squared norm follows the chain rule") {
  // loss = |W x + b|^2, so dW_ij = 2 * out_i * x_j and db_i = 2 * out_i.
  MlpSpec spec{{3, 2, Activation::identity}};
  ParameterVector params{0.5, -1.0, 2.0, 1.5, 0.25, -0.75, 0.1, -0.2};
  const std::vector<double> x{0.3, -0.8, 1.1};

  MlpTape tape;
  const auto out = mlp_forward(spec, params, x, &tape);
  std::vector<double> out_grad{2.0 * out[0], 2.0 * out[1]};
  GradientVector grad;
  mlp_backward(spec, params, tape, out_grad, grad);

  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j)
      REQUIRE(grad[i * 3 + j] == Catch::Approx(2.0 * out[i] * x[j]).epsilon(1e-12));
    REQUIRE(grad[6 + i] == Catch::Approx(2.0 * out[i]).epsilon(1e-12));
  }
}

TEST_CASE("dead relu blocks all upstream gradients") {
  // single relu unit with forced negative pre-activation
  MlpSpec spec{{2, 1, Activation::relu}, {1, 1, Activation::identity}};
  ParameterVector params{1.0, 1.0, -10.0,  // layer 0: W, b -> pre = x0 + x1 - 10 < 0
                         3.0, 0.5};        // layer 1
  MlpTape tape;
  const auto out = mlp_forward(spec, params, {1.0, 2.0}, &tape);
  REQUIRE(out[0] == 0.5);  // only the bias survives

  GradientVector grad;
  const auto dinput = mlp_backward(spec, params, tape, {1.0}, grad);
  // everything upstream of the dead unit is zero
  REQUIRE(grad[0] == 0.0);
  REQUIRE(grad[1] == 0.0);
  REQUIRE(grad[2] == 0.0);
  REQUIRE(dinput[0] == 0.0);
  REQUIRE(dinput[1] == 0.0);
  // layer 1's own parameters still receive gradient (its input is 0 for W)
  REQUIRE(grad[3] == 0.0);  // d/dw = upstream * input(=0)
  REQUIRE(grad[4] == 1.0);  // d/db
}

TEST_CASE("backward matches finite differences on a 3-layer net over 50 seeds") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const MlpSpec spec = mlp_chain(2, {6, 5, 3});
    const ParameterVector params = init_params(spec, seed);
    Rng rng = make_rng(seed + 1000);
    const std::vector<double> x{uniform(rng, -1, 1), uniform(rng, -1, 1)};
    const std::vector<double> w{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};

    // scalar loss: weighted sum of outputs (keeps the FD oracle cheap)
    const auto loss = [&](const ParameterVector& p) {
      const auto out = mlp_forward(spec, p, x);
      double s = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) s += w[i] * out[i];
      return s;
    };

    MlpTape tape;
    mlp_forward(spec, params, x, &tape);
    GradientVector grad;
    mlp_backward(spec, params, tape, w, grad);

    const auto fd = oracles::finite_difference(loss, params);
    REQUIRE(oracles::max_relative_error(grad, fd) < 1e-4);
  }
}

TEST_CASE("backward without a recorded forward is a state error") {
  const MlpSpec spec = mlp_chain(2, {3});
  const ParameterVector params = init_params(spec, 3);
  MlpTape tape;  // never recorded
  GradientVector grad;
  REQUIRE_THROWS_AS(mlp_backward(spec, params, tape, {1, 1, 1}, grad), std::logic_error);
}

TEST_CASE("init_params respects the fan-in bound and is seed reproducible") {
  const MlpSpec spec = mlp_chain(4, {8, 2});
  const auto a = init_params(spec, 42);
  const auto b = init_params(spec, 42);
  const auto c = init_params(spec, 43);
  REQUIRE(a == b);
  REQUIRE(a != c);
  // first layer bound sqrt(1/4) = 0.5
  for (std::size_t i = 0; i < 4 * 8 + 8; ++i) REQUIRE(std::abs(a[i]) <= 0.5);
}
