#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "adeuq/config.hpp"
#include "adeuq/dataset.hpp"
#include "adeuq/error.hpp"
#include "adeuq/pce.hpp"
#include "adeuq/rng.hpp"
#include "adeuq/surrogate.hpp"
#include "reference_mlp.hpp"

using namespace adeuq;

namespace {

MLPArchitecture arch_of(std::size_t layers, std::size_t units, std::size_t out) {
  MLPArchitecture arch;
  arch.hidden_layers = layers;
  arch.hidden_units = units;
  arch.out_dim = out;
  return arch;
}

// Small dataset whose records all live on an n_t x n_z grid.
Dataset make_dataset(std::size_t n_t, std::size_t n_z, std::size_t n_dim,
                     const std::vector<std::pair<std::vector<double>, std::vector<double>>>& records) {
  Dataset ds;
  ds.manifest.config.grid.n_t = n_t;
  ds.manifest.config.grid.n_z = n_z;
  ds.manifest.config.pce.n_dim = n_dim;
  ds.manifest.n_samples = records.size();
  const TimeGrid time(n_t);
  const SpatialGrid space(n_z);
  for (const auto& [xi, values] : records) ds.records.push_back(Record{xi, SolutionField(time, space, values)});
  return ds;
}

// Output-layer biases reproduce `coeffs` everywhere; every weight is zero.
MLPModel constant_model(const MLPArchitecture& arch, const std::vector<double>& coeffs) {
  MLPModel model = MLPModel::zeros(arch);
  model.layers.back().bias = coeffs;
  return model;
}

}  // namespace

TEST_CASE("default architecture reproduces the 33408 weight count") {
  const MLPArchitecture arch = PipelineConfig::paper().architecture();
  CHECK(arch.out_dim == 3);
  CHECK(arch.weight_count() == 33408);
  CHECK(arch.weight_count() == 2 * 128 + 2 * 128 * 128 + 128 * 3);
  CHECK(arch.bias_count() == 128 + 128 + 128 + 3);
  CHECK(arch.parameter_count() == 33795);
  CHECK(mlp_init(arch, 0).flatten().size() == arch.parameter_count());
}

TEST_CASE("minimal architecture weight count") {
  CHECK(arch_of(1, 1, 1).weight_count() == 3);
  CHECK(arch_of(1, 1, 1).bias_count() == 2);
}

TEST_CASE("architecture validation") {
  CHECK_THROWS_AS(arch_of(0, 4, 1).validate(), Error);
  CHECK_THROWS_AS(arch_of(1, 0, 1).validate(), Error);
  CHECK_THROWS_AS(arch_of(1, 4, 0).validate(), Error);
}

TEST_CASE("Glorot-uniform initialization") {
  const MLPArchitecture arch = arch_of(3, 16, 6);
  const MLPModel a = mlp_init(arch, 5);
  const MLPModel b = mlp_init(arch, 5);
  const MLPModel c = mlp_init(arch, 6);
  CHECK(a.flatten() == b.flatten());
  CHECK(a.flatten() != c.flatten());
  for (const auto& layer : a.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    double max_abs = 0.0;
    for (double w : layer.weights) {
      CHECK(std::abs(w) <= limit);
      max_abs = std::max(max_abs, std::abs(w));
    }
    CHECK(max_abs > 0.5 * limit);
    for (double bias : layer.bias) CHECK(bias == 0.0);
  }
}

TEST_CASE("flatten and unflatten round-trip") {
  const MLPModel model = mlp_init(arch_of(2, 5, 3), 1);
  MLPModel copy = MLPModel::zeros(model.arch);
  copy.unflatten(model.flatten());
  CHECK(copy.flatten() == model.flatten());
  CHECK_THROWS_AS(copy.unflatten(std::vector<double>(3, 0.0)), Error);
}

TEST_CASE("forward examples") {
  const MLPModel zero = MLPModel::zeros(arch_of(2, 8, 3));
  CHECK(forward(zero, 0.3, 0.9) == std::vector<double>(3, 0.0));

  MLPModel pass = MLPModel::zeros(arch_of(1, 1, 1));
  pass.layers[0].weights = {1.0, 0.0};
  pass.layers[1].weights = {1.0};
  CHECK(forward(pass, 0.7, 0.2) == std::vector<double>{0.7});
  CHECK(forward(pass, -0.7, 0.2) == std::vector<double>{0.0});

  CHECK_THROWS_AS(forward(pass, std::nan(""), 0.0), Error);
  CHECK_THROWS_AS(forward(pass, 0.0, std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("batched forward equals pointwise forward") {
  Rng rng(3);
  const MLPModel model = mlp_init(arch_of(3, 32, 6), 8);
  std::vector<double> t(50), z(50);
  for (std::size_t b = 0; b < 50; ++b) {
    t[b] = rng.uniform();
    z[b] = rng.uniform();
  }
  const std::vector<double> batched = forward_batch(model, t, z);
  REQUIRE(batched.size() == 50 * 6);
  for (std::size_t b = 0; b < 50; ++b) {
    const std::vector<double> single = forward(model, t[b], z[b]);
    for (std::size_t j = 0; j < 6; ++j)
      CHECK(batched[b * 6 + j] == doctest::Approx(single[j]).epsilon(1e-12));
  }
}

TEST_CASE("loss equals the brute-force pce_eval recomputation") {
  Rng rng(12);
  const MultiIndexSet set(2, 2);
  const MLPModel model = mlp_init(arch_of(2, 16, set.size()), 4);
  std::vector<double> t(30), z(30), targets(30);
  for (std::size_t b = 0; b < 30; ++b) {
    t[b] = rng.uniform();
    z[b] = rng.uniform();
    targets[b] = rng.normal();
  }
  const std::vector<double> xi{0.4, -1.1};
  double expected = 0.0;
  for (std::size_t b = 0; b < 30; ++b) {
    const double r = targets[b] - pce_eval(forward(model, t[b], z[b]), set, xi);
    expected += r * r / 30.0;
  }
  const TrainingBatch batch = make_batch(0, t, z, targets, xi, set);
  CHECK(std::abs(loss(model, batch) - expected) <= 1e-12 * std::max(1.0, expected));
  CHECK(backward(model, batch).loss == doctest::Approx(loss(model, batch)).epsilon(1e-14));
}

TEST_CASE("loss examples: constant residual and exact fit") {
  const MultiIndexSet set(2, 1);
  const std::vector<double> t{0.0, 0.5, 1.0}, z{0.1, 0.2, 0.3};
  const std::vector<double> xi{0.5, -2.0};
  const std::vector<double> constant(3, 1.5);
  const MLPModel zero = MLPModel::zeros(arch_of(2, 4, 3));
  CHECK(loss(zero, make_batch(0, t, z, constant, xi, set)) == doctest::Approx(2.25).epsilon(1e-15));

  // Coefficients (1, 2, 3) give 1 + 2 * xi_2 + 3 * xi_1 = 1 - 4 + 1.5.
  const MLPModel fit = constant_model(arch_of(2, 4, 3), {1.0, 2.0, 3.0});
  const std::vector<double> exact(3, -1.5);
  const TrainingBatch batch = make_batch(0, t, z, exact, xi, set);
  CHECK(loss(fit, batch) == 0.0);
  const std::vector<double> grad = backward(fit, batch).gradient.flatten();
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("gradient matches extended-precision central differences") {
  // 1-layer 4-unit probe model first, then randomized small shapes.
  {
    Rng rng(77);
    const MultiIndexSet set(2, 1);
    MLPModel model = mlp_init(arch_of(1, 4, set.size()), 21);
    for (auto& layer : model.layers)
      for (double& b : layer.bias) b = 0.1 * rng.normal();
    std::vector<double> t(10), z(10), y(10);
    for (std::size_t b = 0; b < 10; ++b) {
      t[b] = rng.uniform();
      z[b] = rng.uniform();
      y[b] = rng.normal();
    }
    const auto probe = adeuq::test::probe_gradient(model, set, t, z, y, std::vector<double>{0.3, -0.8});
    CHECK(probe.worst_relative_error <= 1e-6);
  }
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const adeuq::test::ProbeCase c = adeuq::test::random_probe(seed);
    const auto probe = adeuq::test::probe_gradient(c.model, c.set, c.t, c.z, c.targets, c.xi);
    INFO("probe seed " << seed);
    CHECK(probe.worst_relative_error <= 1e-6);
    CHECK(probe.both_zero < probe.parameters);
  }
}

TEST_CASE("gradient scales with the targets at the zero model") {
  const MultiIndexSet set(2, 2);
  const MLPModel zero = MLPModel::zeros(arch_of(2, 6, set.size()));
  const std::vector<double> t{0.1, 0.5, 0.9}, z{0.2, 0.4, 0.6};
  const std::vector<double> y{0.3, -1.0, 2.0}, y2{0.6, -2.0, 4.0};
  const std::vector<double> xi{1.5, -0.5};
  const std::vector<double> g1 = backward(zero, make_batch(0, t, z, y, xi, set)).gradient.flatten();
  const std::vector<double> g2 = backward(zero, make_batch(0, t, z, y2, xi, set)).gradient.flatten();
  bool any_nonzero = false;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    CHECK(g2[i] == doctest::Approx(2.0 * g1[i]).epsilon(1e-15));
    any_nonzero = any_nonzero || g1[i] != 0.0;
  }
  CHECK(any_nonzero);
}

TEST_CASE("forward is Lipschitz with the product of spectral norms") {
  Rng rng(31);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    MLPModel model = mlp_init(arch_of(2 + seed % 2, 24, 3), seed);
    for (auto& layer : model.layers)
      for (double& b : layer.bias) b = 0.2 * rng.normal();
    // Power iteration on W^T W per layer.
    double bound = 1.0;
    for (const auto& layer : model.layers) {
      std::vector<double> v(layer.in, 1.0);
      double sigma = 0.0;
      for (int it = 0; it < 500; ++it) {
        std::vector<double> u(layer.out, 0.0);
        for (std::size_t i = 0; i < layer.out; ++i)
          for (std::size_t j = 0; j < layer.in; ++j) u[i] += layer.weights[i * layer.in + j] * v[j];
        std::vector<double> w(layer.in, 0.0);
        for (std::size_t i = 0; i < layer.out; ++i)
          for (std::size_t j = 0; j < layer.in; ++j) w[j] += layer.weights[i * layer.in + j] * u[i];
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        sigma = std::sqrt(norm);
        for (std::size_t j = 0; j < layer.in; ++j) v[j] = w[j] / norm;
      }
      bound *= sigma * (1.0 + 1e-9);
    }
    for (int pair = 0; pair < 200; ++pair) {
      const double t1 = rng.uniform(), z1 = rng.uniform(), t2 = rng.uniform(), z2 = rng.uniform();
      const std::vector<double> f1 = forward(model, t1, z1), f2 = forward(model, t2, z2);
      double df = 0.0;
      for (std::size_t j = 0; j < f1.size(); ++j) df += (f1[j] - f2[j]) * (f1[j] - f2[j]);
      const double dx = std::hypot(t1 - t2, z1 - z2);
      CHECK(std::sqrt(df) <= bound * dx + 1e-12);
    }
  }
}

TEST_CASE("ADAM: zero gradient leaves the model unchanged and decays the moments") {
  MLPModel model = mlp_init(arch_of(1, 3, 2), 2);
  const std::vector<double> before = model.flatten();
  AdamState state = AdamState::zeros(model);
  state.m_weights[0].assign(state.m_weights[0].size(), 0.0);
  state.v_weights[0].assign(state.v_weights[0].size(), 0.0);
  TrainConfig cfg;
  adam_step(model, MLPModel::zeros(model.arch), state, cfg, 1);
  CHECK(model.flatten() == before);

  state.m_bias[1] = {0.5, -0.5};
  state.v_bias[1] = {0.25, 0.25};
  adam_step(model, MLPModel::zeros(model.arch), state, cfg, 2);
  CHECK(state.m_bias[1][0] == doctest::Approx(0.45).epsilon(1e-15));
  CHECK(state.v_bias[1][0] == doctest::Approx(0.25 * 0.999).epsilon(1e-15));
  CHECK_THROWS_AS(adam_step(model, MLPModel::zeros(model.arch), state, cfg, 0), Error);
}

TEST_CASE("ADAM: first step moves every parameter by lr against the gradient sign") {
  MLPModel model = mlp_init(arch_of(2, 5, 3), 9);
  const std::vector<double> before = model.flatten();
  Rng rng(10);
  std::vector<double> g(before.size());
  for (double& x : g) x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.01 + rng.uniform());
  MLPModel gradient = MLPModel::zeros(model.arch);
  gradient.unflatten(g);
  AdamState state = AdamState::zeros(model);
  TrainConfig cfg;
  cfg.lr = 0.01;
  adam_step(model, gradient, state, cfg, 1);
  const std::vector<double> after = model.flatten();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double expected = -cfg.lr * (g[i] > 0 ? 1.0 : -1.0);
    CHECK(std::abs((after[i] - before[i]) - expected) <= cfg.lr * 1e-6);
  }
}

TEST_CASE("ADAM trajectory matches a scalar reference on a fixed quadratic") {
  MLPModel model = mlp_init(arch_of(1, 4, 2), 13);
  const std::size_t n = model.flatten().size();
  Rng rng(14);
  std::vector<double> curvature(n), centre(n);
  for (std::size_t i = 0; i < n; ++i) {
    curvature[i] = 0.5 + rng.uniform();
    centre[i] = rng.normal();
  }
  TrainConfig cfg;
  cfg.lr = 0.05;

  std::vector<double> theta = model.flatten(), m(n, 0.0), v(n, 0.0);
  AdamState state = AdamState::zeros(model);
  for (std::size_t step = 1; step <= 10; ++step) {
    std::vector<double> grad(n);
    const std::vector<double> current = model.flatten();
    for (std::size_t i = 0; i < n; ++i) grad[i] = curvature[i] * (current[i] - centre[i]);
    MLPModel g = MLPModel::zeros(model.arch);
    g.unflatten(grad);
    adam_step(model, g, state, cfg, step);

    for (std::size_t i = 0; i < n; ++i) {
      const double gi = curvature[i] * (theta[i] - centre[i]);
      m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * gi;
      v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * gi * gi;
      const double m_hat = m[i] / (1 - std::pow(cfg.beta1, static_cast<double>(step)));
      const double v_hat = v[i] / (1 - std::pow(cfg.beta2, static_cast<double>(step)));
      theta[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
    const std::vector<double> ours = model.flatten();
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ours[i] - theta[i]) <= 1e-12);
  }
}

TEST_CASE("training recovers a target generated by a reachable coefficient field") {
  const MultiIndexSet set(2, 1);
  const MLPArchitecture arch = arch_of(2, 16, set.size());
  MLPModel teacher = mlp_init(arch, 1001);
  const std::size_t n_t = 8, n_z = 8;
  const GridInputs inputs = grid_inputs(TimeGrid(n_t), SpatialGrid(n_z));
  const std::vector<double> xi{0.7, -0.4};
  std::vector<double> target(n_t * n_z);
  for (std::size_t p = 0; p < target.size(); ++p)
    target[p] = pce_eval(forward(teacher, inputs.t[p], inputs.z[p]), set, xi);

  const Dataset ds = make_dataset(n_t, n_z, 2, {{xi, target}});
  TrainConfig cfg;
  cfg.lr = 1e-2;
  cfg.epochs = 500;
  cfg.seed = 5;
  const TrainResult result = train(ds, arch, cfg, set);
  CHECK(result.loss_history.size() == 500);
  const TrainingBatch batch = make_batch(0, inputs.t, inputs.z, target, xi, set);
  CHECK(loss(result.model, batch) <= 1e-3);
}

TEST_CASE("zero learning rate keeps the initial model") {
  const MultiIndexSet set(2, 1);
  const MLPArchitecture arch = arch_of(2, 8, set.size());
  const std::vector<double> values(4 * 4, 0.5);
  const Dataset ds = make_dataset(4, 4, 2, {{{0.1, 0.2}, values}});
  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.epochs = 1;
  cfg.seed = 3;
  TrainResult result = train(ds, arch, cfg, set);
  CHECK(result.model.flatten() == mlp_init(arch, 3).flatten());
  cfg.epochs = 4;
  result = train(ds, arch, cfg, set);
  CHECK(result.loss_history.size() == 4);
  for (double l : result.loss_history) CHECK(l == result.loss_history.front());
  cfg.epochs = 0;
  CHECK_THROWS_AS(train(ds, arch, cfg, set), Error);
}

TEST_CASE("training is bitwise deterministic per seed") {
  const MultiIndexSet set(2, 2);
  const MLPArchitecture arch = arch_of(2, 8, set.size());
  Rng rng(50);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> records;
  for (int s = 0; s < 5; ++s) {
    std::vector<double> values(6 * 5);
    for (double& v : values) v = rng.normal();
    records.push_back({{rng.normal(), rng.normal()}, values});
  }
  const Dataset ds = make_dataset(6, 5, 2, records);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 17;
  const TrainResult a = train(ds, arch, cfg, set);
  const TrainResult b = train(ds, arch, cfg, set);
  CHECK(a.model.flatten() == b.model.flatten());
  CHECK(a.loss_history == b.loss_history);
  cfg.seed = 18;
  CHECK(train(ds, arch, cfg, set).model.flatten() != a.model.flatten());

  std::vector<std::size_t> epochs;
  train(ds, arch, cfg, set, [&](std::size_t epoch, double) { epochs.push_back(epoch); });
  CHECK(epochs == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("non-finite loss aborts with the step index") {
  const MultiIndexSet set(2, 1);
  std::vector<double> values(9, 0.0);
  values[4] = std::nan("");
  const Dataset ds = make_dataset(3, 3, 2, {{{0.0, 0.0}, values}});
  try {
    train(ds, arch_of(1, 4, 3), TrainConfig{}, set);
    FAIL("expected a numerical error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numerical);
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
  }
}

TEST_CASE("training preconditions") {
  const MultiIndexSet set(2, 1);
  const Dataset ds = make_dataset(3, 3, 2, {{{0.0, 0.0}, std::vector<double>(9, 0.0)}});
  CHECK_THROWS_AS(train(ds, arch_of(1, 4, 6), TrainConfig{}, set), Error);
  CHECK_THROWS_AS(train(ds, arch_of(1, 4, 4), TrainConfig{}, MultiIndexSet(3, 1)), Error);
  CHECK_THROWS_AS(train(Dataset{}, arch_of(1, 4, 3), TrainConfig{}, set), Error);
}
