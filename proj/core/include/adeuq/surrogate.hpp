#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "adeuq/grid.hpp"
#include "adeuq/pce.hpp"

namespace adeuq {

struct Dataset;

/// Fully connected net (t, z) -> |A| PCE coefficients. `hidden_layers`
/// counts ReLU layers of `hidden_units` each, so the net holds
/// hidden_layers - 1 square hidden-to-hidden matrices. The output layer is
/// linear.
struct MLPArchitecture {
  std::size_t in_dim = 2;
  std::size_t hidden_layers = 3;
  std::size_t hidden_units = 128;
  std::size_t out_dim = 1;

  void validate() const;
  std::size_t n_layers() const { return hidden_layers + 1; }
  /// Weight-matrix elements, biases excluded:
  /// in*n + (hidden_layers - 1)*n^2 + n*out.
  std::size_t weight_count() const;
  std::size_t bias_count() const;
  std::size_t parameter_count() const { return weight_count() + bias_count(); }
  /// (fan_in, fan_out) of layer l.
  std::size_t layer_in(std::size_t l) const;
  std::size_t layer_out(std::size_t l) const;
};

/// weights is out x in, row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

struct MLPModel {
  MLPArchitecture arch;
  std::vector<DenseLayer> layers;

  /// Zero-valued model of the given shape.
  static MLPModel zeros(const MLPArchitecture& arch);

  /// W1, b1, W2, b2, ..., W_out, b_out concatenated.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
};

/// Gradients share the model's shape.
using ModelGradient = MLPModel;

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t epochs = 15;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Flattened (t_b, z_b) inputs over the grid, t-major.
struct GridInputs {
  std::vector<double> t;
  std::vector<double> z;
};
GridInputs grid_inputs(const TimeGrid& time, const SpatialGrid& space);

/// One solution sample flattened over the (t, z) grid.
struct TrainingBatch {
  std::size_t sample = 0;
  std::span<const double> t;        // B inputs
  std::span<const double> z;        // B inputs
  std::span<const double> targets;  // T(t_b, z_b; xi_s)
  std::vector<double> xi;
  std::vector<double> basis;        // Psi_alpha(xi) for each alpha in A

  std::size_t size() const { return targets.size(); }
};

TrainingBatch make_batch(std::size_t sample, std::span<const double> t, std::span<const double> z,
                         std::span<const double> targets, std::span<const double> xi,
                         const MultiIndexSet& set);

/// Glorot-uniform weights, zero biases.
MLPModel mlp_init(const MLPArchitecture& arch, std::uint64_t seed);

std::vector<double> forward(const MLPModel& model, double t, double z);

/// Coefficients at B points, point-major (B x out_dim).
std::vector<double> forward_batch(const MLPModel& model, std::span<const double> t,
                                  std::span<const double> z);

/// (1/B) sum_b (T_b - sum_j C_j(t_b, z_b) Psi_j(xi))^2
double loss(const MLPModel& model, const TrainingBatch& batch);

struct LossGradient {
  double loss = 0.0;
  ModelGradient gradient;
};

/// Exact gradient of loss() by reverse mode; ReLU'(0) = 0.
LossGradient backward(const MLPModel& model, const TrainingBatch& batch);

struct AdamState {
  std::vector<std::vector<double>> m_weights, v_weights;
  std::vector<std::vector<double>> m_bias, v_bias;

  static AdamState zeros(const MLPModel& model);
};

/// In-place ADAM update with bias-corrected moments. step_index counts from 1.
void adam_step(MLPModel& model, const ModelGradient& gradient, AdamState& state,
               const TrainConfig& cfg, std::size_t step_index);

struct TrainResult {
  MLPModel model;
  std::vector<double> loss_history;  // one entry per optimizer step, pre-update loss
};

/// epoch counts from 1.
using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// epochs x n_s ADAM steps, one full solution per step, sample order
/// reshuffled every epoch. Throws ErrorKind::numerical on a non-finite loss.
TrainResult train(const Dataset& dataset, const MLPArchitecture& arch, const TrainConfig& cfg,
                  const MultiIndexSet& set, const EpochCallback& on_epoch = {});

/// Seed of the per-epoch shuffle stream derived from the training seed.
constexpr std::uint64_t shuffle_seed(std::uint64_t seed) { return seed ^ 0x53485546464c4521ULL; }

}  // namespace adeuq
