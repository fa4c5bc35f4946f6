#pragma once

#include "fame/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fame::fusion {

enum class Scaling { zscore, l2, none };

Scaling parse_scaling(const std::string& name);
std::string to_string(Scaling s);

struct BlockLayout {
  std::string name;
  std::size_t width = 0;
  Scaling mode = Scaling::none;
  Vector mean;    // zscore only
  Vector stddev;  // population std, zscore only
};

struct FusedInput {
  Matrix matrix;
  std::vector<BlockLayout> layout;
};

/// Concatenates blocks left to right, scaling each per its mode. z-scores use
/// (x - mean) / (std + 1e-8); constant columns map to 0.
FusedInput assemble_features(const std::vector<FeatureBlock>& blocks,
                             const std::vector<Scaling>& modes);

/// Re-applies recorded statistics to new rows (e.g. held-out documents).
Matrix apply_layout(const std::vector<BlockLayout>& layout, const std::vector<FeatureBlock>& blocks);

enum class Activation { relu, identity };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

struct DenseLayer {
  Matrix W;  // out x in
  Vector b;  // out
};

/// Symmetric encoder/decoder. The hidden activation applies to every layer
/// but the last, which is always linear. The latent code is the activation at
/// the middle width.
struct AutoencoderModel {
  std::vector<std::size_t> dims;
  std::vector<DenseLayer> layers;
  Activation hidden = Activation::relu;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return dims.front(); }
  std::size_t latent_dim() const { return dims[dims.size() / 2]; }
  std::size_t latent_layer() const { return dims.size() / 2; }
};

/// Glorot-uniform weights, zero biases.
AutoencoderModel init_autoencoder(const std::vector<std::size_t>& dims, std::uint64_t seed,
                                  Activation hidden = Activation::relu);

struct ForwardResult {
  Matrix latent;
  Matrix reconstruction;
  double mse = 0.0;
};

ForwardResult forward(const AutoencoderModel& model, const Matrix& X);

struct Gradients {
  std::vector<Matrix> dW;
  std::vector<Vector> db;
};

/// MSE = sum((X - Xhat)^2) / (n * D) and its gradient by backpropagation.
double loss_and_gradients(const AutoencoderModel& model, const Matrix& X, Gradients& grads);

enum class Optimizer { adam, sgd };

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 50;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainResult {
  AutoencoderModel model;
  /// Full-dataset MSE before training, then after each epoch.
  std::vector<double> loss_history;
};

TrainResult train_autoencoder(AutoencoderModel model, const Matrix& X, const TrainConfig& config);

FeatureBlock encode(const AutoencoderModel& model, const Matrix& X);

}  // namespace fame::fusion
