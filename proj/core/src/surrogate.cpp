#include "adeuq/surrogate.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <sstream>

#include "adeuq/dataset.hpp"
#include "adeuq/error.hpp"
#include "adeuq/rng.hpp"

namespace adeuq {

namespace {

using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Weights = Eigen::Map<RowMatrix>;
using Vector = Eigen::Map<Eigen::VectorXd>;

// Eigen picks its reduction peeling from the runtime address, so every
// operand is copied into Eigen-owned (aligned) storage first. Mapping
// std::vector memory directly makes results depend on heap placement.
RowMatrix weights_of(const DenseLayer& layer) {
  return Eigen::Map<const RowMatrix>(layer.weights.data(), static_cast<Eigen::Index>(layer.out),
                                     static_cast<Eigen::Index>(layer.in));
}

Eigen::VectorXd owned(std::span<const double> values) {
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// Inputs as an in_dim x B matrix, one column per point.
Matrix input_matrix(std::span<const double> t, std::span<const double> z) {
  require(t.size() == z.size(), "t and z input lengths differ");
  Matrix x(2, static_cast<Eigen::Index>(t.size()));
  for (std::size_t b = 0; b < t.size(); ++b) {
    const auto col = static_cast<Eigen::Index>(b);
    x(0, col) = t[b];
    x(1, col) = z[b];
  }
  return x;
}

// Forward pass keeping every pre-activation; returns the out_dim x B output.
Matrix forward_pass(const MLPModel& model, const Matrix& x, std::vector<Matrix>* pre) {
  Matrix a = x;
  const std::size_t n_layers = model.layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const DenseLayer& layer = model.layers[l];
    Matrix z = weights_of(layer) * a;
    z.colwise() += owned(layer.bias);
    if (l + 1 == n_layers) return z;
    a = z.cwiseMax(0.0);
    if (pre) pre->push_back(std::move(z));
  }
  return a;
}

void check_batch(const MLPModel& model, const TrainingBatch& batch) {
  require(batch.t.size() == batch.size() && batch.z.size() == batch.size(),
          "training batch inputs and targets differ in length");
  require(batch.basis.size() == model.arch.out_dim,
          "training batch has " + std::to_string(batch.basis.size()) +
              " basis values but the model outputs " + std::to_string(model.arch.out_dim));
  require(batch.size() > 0, "training batch is empty");
}

}  // namespace

void MLPArchitecture::validate() const {
  require(in_dim == 2, "surrogate input dimension must be 2 (t, z)");
  require(hidden_layers >= 1, "hidden_layers must be >= 1");
  require(hidden_units >= 1, "hidden_units must be >= 1");
  require(out_dim >= 1, "out_dim must be >= 1");
}

std::size_t MLPArchitecture::layer_in(std::size_t l) const {
  return l == 0 ? in_dim : hidden_units;
}

std::size_t MLPArchitecture::layer_out(std::size_t l) const {
  return l == hidden_layers ? out_dim : hidden_units;
}

std::size_t MLPArchitecture::weight_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l < n_layers(); ++l) count += layer_in(l) * layer_out(l);
  return count;
}

std::size_t MLPArchitecture::bias_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l < n_layers(); ++l) count += layer_out(l);
  return count;
}

MLPModel MLPModel::zeros(const MLPArchitecture& arch) {
  arch.validate();
  MLPModel model;
  model.arch = arch;
  for (std::size_t l = 0; l < arch.n_layers(); ++l) {
    DenseLayer layer;
    layer.in = arch.layer_in(l);
    layer.out = arch.layer_out(l);
    layer.weights.assign(layer.in * layer.out, 0.0);
    layer.bias.assign(layer.out, 0.0);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

std::vector<double> MLPModel::flatten() const {
  std::vector<double> flat;
  flat.reserve(arch.parameter_count());
  for (const auto& layer : layers) {
    flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void MLPModel::unflatten(std::span<const double> flat) {
  require(flat.size() == arch.parameter_count(),
          "parameter blob holds " + std::to_string(flat.size()) + " values, model needs " +
              std::to_string(arch.parameter_count()));
  std::size_t offset = 0;
  for (auto& layer : layers) {
    std::copy_n(flat.begin() + offset, layer.weights.size(), layer.weights.begin());
    offset += layer.weights.size();
    std::copy_n(flat.begin() + offset, layer.bias.size(), layer.bias.begin());
    offset += layer.bias.size();
  }
}

void TrainConfig::validate() const {
  require(std::isfinite(lr) && lr >= 0.0, "train.lr must be >= 0");
  require(beta1 >= 0.0 && beta1 < 1.0, "train.beta1 must lie in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, "train.beta2 must lie in [0, 1)");
  require(std::isfinite(eps) && eps > 0.0, "train.eps must be > 0");
  require(epochs >= 1, "train.epochs must be >= 1");
}

GridInputs grid_inputs(const TimeGrid& time, const SpatialGrid& space) {
  GridInputs inputs;
  inputs.t.reserve(time.size() * space.size());
  inputs.z.reserve(time.size() * space.size());
  for (std::size_t k = 0; k < time.size(); ++k) {
    for (std::size_t m = 0; m < space.size(); ++m) {
      inputs.t.push_back(time.point(k));
      inputs.z.push_back(space.point(m));
    }
  }
  return inputs;
}

TrainingBatch make_batch(std::size_t sample, std::span<const double> t, std::span<const double> z,
                         std::span<const double> targets, std::span<const double> xi,
                         const MultiIndexSet& set) {
  TrainingBatch batch;
  batch.sample = sample;
  batch.t = t;
  batch.z = z;
  batch.targets = targets;
  batch.xi.assign(xi.begin(), xi.end());
  batch.basis = basis_values(set, xi);
  return batch;
}

MLPModel mlp_init(const MLPArchitecture& arch, std::uint64_t seed) {
  MLPModel model = MLPModel::zeros(arch);
  Rng rng(seed);
  for (auto& layer : model.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    for (double& w : layer.weights) w = limit * (2.0 * rng.uniform() - 1.0);
  }
  return model;
}

std::vector<double> forward(const MLPModel& model, double t, double z) {
  require(std::isfinite(t) && std::isfinite(z), "forward: non-finite input");
  std::vector<double> a{t, z};
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const DenseLayer& layer = model.layers[l];
    std::vector<double> next(layer.out);
    for (std::size_t i = 0; i < layer.out; ++i) {
      double sum = layer.bias[i];
      for (std::size_t j = 0; j < layer.in; ++j) sum += layer.weights[i * layer.in + j] * a[j];
      next[i] = (l + 1 == model.layers.size()) ? sum : (sum > 0.0 ? sum : 0.0);
    }
    a = std::move(next);
  }
  return a;
}

std::vector<double> forward_batch(const MLPModel& model, std::span<const double> t,
                                  std::span<const double> z) {
  for (std::size_t b = 0; b < t.size(); ++b)
    require(std::isfinite(t[b]) && std::isfinite(z[b]), "forward: non-finite input");
  const Matrix out = forward_pass(model, input_matrix(t, z), nullptr);
  // Column-major out_dim x B storage is exactly point-major B x out_dim.
  return std::vector<double>(out.data(), out.data() + out.size());
}

double loss(const MLPModel& model, const TrainingBatch& batch) {
  check_batch(model, batch);
  const Matrix coeffs = forward_pass(model, input_matrix(batch.t, batch.z), nullptr);
  const Eigen::VectorXd psi = owned(batch.basis);
  const Eigen::VectorXd targets = owned(batch.targets);
  const Eigen::VectorXd residual = coeffs.transpose() * psi - targets;
  return residual.squaredNorm() / static_cast<double>(batch.size());
}

LossGradient backward(const MLPModel& model, const TrainingBatch& batch) {
  check_batch(model, batch);
  const Matrix x = input_matrix(batch.t, batch.z);
  std::vector<Matrix> pre;
  pre.reserve(model.layers.size());
  const Matrix coeffs = forward_pass(model, x, &pre);

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const Eigen::VectorXd psi = owned(batch.basis);
  const Eigen::VectorXd targets = owned(batch.targets);
  const Eigen::VectorXd residual = coeffs.transpose() * psi - targets;

  LossGradient result;
  result.loss = residual.squaredNorm() * inv_b;
  result.gradient = MLPModel::zeros(model.arch);

  // dL/dC = (2/B) psi r^T, out_dim x B.
  Matrix delta = (2.0 * inv_b) * psi * residual.transpose();
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    DenseLayer& grad = result.gradient.layers[l];
    const auto rows = static_cast<Eigen::Index>(grad.out);
    const auto cols = static_cast<Eigen::Index>(grad.in);
    const RowMatrix g = l == 0 ? RowMatrix(delta * x.transpose())
                               : RowMatrix(delta * pre[l - 1].cwiseMax(0.0).transpose());
    Weights(grad.weights.data(), rows, cols) = g;
    const Eigen::VectorXd g_bias = delta.rowwise().sum();
    Vector(grad.bias.data(), rows) = g_bias;
    if (l == 0) break;
    Matrix upstream = weights_of(model.layers[l]).transpose() * delta;
    delta = (pre[l - 1].array() > 0.0).select(upstream.array(), 0.0).matrix();
  }
  return result;
}

AdamState AdamState::zeros(const MLPModel& model) {
  AdamState state;
  for (const auto& layer : model.layers) {
    state.m_weights.emplace_back(layer.weights.size(), 0.0);
    state.v_weights.emplace_back(layer.weights.size(), 0.0);
    state.m_bias.emplace_back(layer.bias.size(), 0.0);
    state.v_bias.emplace_back(layer.bias.size(), 0.0);
  }
  return state;
}

namespace {

void adam_update(std::vector<double>& params, const std::vector<double>& grads,
                 std::vector<double>& m, std::vector<double>& v, const TrainConfig& cfg,
                 double correction1, double correction2) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

}  // namespace

void adam_step(MLPModel& model, const ModelGradient& gradient, AdamState& state,
               const TrainConfig& cfg, std::size_t step_index) {
  require(step_index >= 1, "adam_step: step_index counts from 1");
  require(gradient.layers.size() == model.layers.size() &&
              state.m_weights.size() == model.layers.size(),
          "adam_step: model, gradient and state shapes differ");
  const double t = static_cast<double>(step_index);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    adam_update(model.layers[l].weights, gradient.layers[l].weights, state.m_weights[l],
                state.v_weights[l], cfg, correction1, correction2);
    adam_update(model.layers[l].bias, gradient.layers[l].bias, state.m_bias[l], state.v_bias[l],
                cfg, correction1, correction2);
  }
}

TrainResult train(const Dataset& dataset, const MLPArchitecture& arch, const TrainConfig& cfg,
                  const MultiIndexSet& set, const EpochCallback& on_epoch) {
  cfg.validate();
  arch.validate();
  require(!dataset.records.empty(), "train: dataset is empty");
  require(dataset.manifest.n_dim() == set.n_dim(),
          "train: dataset n_dim " + std::to_string(dataset.manifest.n_dim()) +
              " differs from the PCE set n_dim " + std::to_string(set.n_dim()));
  require(arch.out_dim == set.size(), "train: network outputs " + std::to_string(arch.out_dim) +
                                          " coefficients for a basis of " +
                                          std::to_string(set.size()));
  dataset.validate();

  const GridInputs inputs = grid_inputs(dataset.manifest.config.time_grid(),
                                        dataset.manifest.config.spatial_grid());
  std::vector<TrainingBatch> batches;
  batches.reserve(dataset.size());
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    const Record& record = dataset.records[s];
    batches.push_back(make_batch(s, inputs.t, inputs.z, record.solution.values(), record.xi, set));
  }

  TrainResult result;
  result.model = mlp_init(arch, cfg.seed);
  result.loss_history.reserve(cfg.epochs * dataset.size());
  AdamState state = AdamState::zeros(result.model);
  Rng shuffler(shuffle_seed(cfg.seed));

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t step = 0;
  double last_finite = std::nan("");
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffler.below(i)]);

    double epoch_sum = 0.0;
    for (const std::size_t s : order) {
      LossGradient lg = backward(result.model, batches[s]);
      ++step;
      if (!std::isfinite(lg.loss)) {
        std::ostringstream msg;
        msg << "training loss became non-finite at step " << step << " (epoch " << epoch + 1
            << ", sample " << s << "); last finite loss " << last_finite;
        fail(ErrorKind::numerical, msg.str());
      }
      last_finite = lg.loss;
      epoch_sum += lg.loss;
      result.loss_history.push_back(lg.loss);
      adam_step(result.model, lg.gradient, state, cfg, step);
    }
    if (on_epoch) on_epoch(epoch + 1, epoch_sum / static_cast<double>(order.size()));
  }
  return result;
}

}  // namespace adeuq
