#include "fame/fusion.hpp"

#include "fame/random.hpp"

#include <cmath>
#include <numeric>

namespace fame::fusion {

Scaling parse_scaling(const std::string& name) {
  if (name == "zscore") return Scaling::zscore;
  if (name == "l2") return Scaling::l2;
  if (name == "none") return Scaling::none;
  throw Error("unknown scaling mode '" + name + "'");
}

std::string to_string(Scaling s) {
  switch (s) {
    case Scaling::zscore:
      return "zscore";
    case Scaling::l2:
      return "l2";
    case Scaling::none:
      return "none";
  }
  return "none";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "identity") return Activation::identity;
  throw Error("unknown activation '" + name + "'");
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

namespace {

constexpr double kStdEps = 1e-8;

void scale_block(const BlockLayout& layout, Eigen::Ref<Matrix> out) {
  switch (layout.mode) {
    case Scaling::none:
      break;
    case Scaling::l2:
      for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double norm = out.row(r).norm();
        if (norm > 0.0) out.row(r) /= norm;
      }
      break;
    case Scaling::zscore:
      for (Eigen::Index c = 0; c < out.cols(); ++c) {
        if (layout.stddev[c] == 0.0) {
          out.col(c).setZero();
        } else {
          out.col(c) = ((out.col(c).array() - layout.mean[c]) / (layout.stddev[c] + kStdEps)).matrix();
        }
      }
      break;
  }
}

}  // namespace

FusedInput assemble_features(const std::vector<FeatureBlock>& blocks,
                             const std::vector<Scaling>& modes) {
  if (blocks.empty()) throw Error("fusion: no feature blocks");
  if (modes.size() != blocks.size()) throw Error("fusion: one scaling mode per block required");
  const Eigen::Index n = blocks.front().rows();
  FusedInput fused;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    if (b.rows() != n)
      throw Error("fusion: block '" + b.name + "' has " + std::to_string(b.rows()) +
                  " rows, expected " + std::to_string(n));
    BlockLayout layout{b.name, static_cast<std::size_t>(b.cols()), modes[i], {}, {}};
    if (modes[i] == Scaling::zscore) {
      layout.mean = b.values.colwise().mean().transpose();
      layout.stddev.resize(b.cols());
      for (Eigen::Index c = 0; c < b.cols(); ++c) {
        const auto col = b.values.col(c);
        if (n == 0 || col.maxCoeff() == col.minCoeff()) {
          layout.stddev[c] = 0.0;
        } else {
          layout.stddev[c] = std::sqrt((col.array() - layout.mean[c]).square().sum() /
                                       static_cast<double>(n));
        }
      }
    }
    fused.layout.push_back(std::move(layout));
  }
  fused.matrix = apply_layout(fused.layout, blocks);
  return fused;
}

Matrix apply_layout(const std::vector<BlockLayout>& layout, const std::vector<FeatureBlock>& blocks) {
  if (layout.size() != blocks.size()) throw Error("fusion: layout/block count mismatch");
  if (blocks.empty()) throw Error("fusion: no feature blocks");
  const Eigen::Index n = blocks.front().rows();
  Eigen::Index width = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (static_cast<std::size_t>(blocks[i].cols()) != layout[i].width)
      throw Error("fusion: block '" + blocks[i].name + "' width does not match layout");
    if (blocks[i].rows() != n) throw Error("fusion: blocks differ in row count");
    width += blocks[i].cols();
  }
  Matrix out(n, width);
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto view = out.middleCols(offset, blocks[i].cols());
    view = blocks[i].values;
    scale_block(layout[i], view);
    offset += blocks[i].cols();
  }
  return out;
}

AutoencoderModel init_autoencoder(const std::vector<std::size_t>& dims, std::uint64_t seed,
                                  Activation hidden) {
  if (dims.size() < 3) throw Error("autoencoder: need at least 3 layer widths");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) throw Error("autoencoder: layer widths must be >= 1");
    if (dims[i] != dims[dims.size() - 1 - i])
      throw Error("autoencoder: widths are not symmetric about the latent layer");
  }
  if (dims.size() % 2 == 0) throw Error("autoencoder: width list must have odd length");

  AutoencoderModel model;
  model.dims = dims;
  model.hidden = hidden;
  model.seed = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(dims[l]);
    const auto out = static_cast<Eigen::Index>(dims[l + 1]);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer layer{Matrix(out, in), Vector::Zero(out)};
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) layer.W(r, c) = rng.uniform(-bound, bound);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

namespace {

void check_input(const AutoencoderModel& model, const Matrix& X) {
  if (static_cast<std::size_t>(X.cols()) != model.input_dim())
    throw Error("autoencoder: input has " + std::to_string(X.cols()) + " columns, model expects " +
                std::to_string(model.input_dim()));
}

bool activated(const AutoencoderModel& model, std::size_t layer) {
  return model.hidden == Activation::relu && layer + 1 < model.layers.size();
}

// activations[0] = X, activations[l+1] = output of layer l.
std::vector<Matrix> run_layers(const AutoencoderModel& model, const Matrix& X) {
  std::vector<Matrix> acts;
  acts.reserve(model.layers.size() + 1);
  acts.push_back(X);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    Matrix z = acts.back() * layer.W.transpose();
    z.rowwise() += layer.b.transpose();
    if (activated(model, l)) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  return acts;
}

double mse(const Matrix& X, const Matrix& Xhat) {
  if (X.size() == 0) return 0.0;
  return (X - Xhat).squaredNorm() / static_cast<double>(X.size());
}

}  // namespace

ForwardResult forward(const AutoencoderModel& model, const Matrix& X) {
  check_input(model, X);
  auto acts = run_layers(model, X);
  ForwardResult r;
  r.latent = acts[model.latent_layer()];
  r.reconstruction = std::move(acts.back());
  r.mse = mse(X, r.reconstruction);
  return r;
}

double loss_and_gradients(const AutoencoderModel& model, const Matrix& X, Gradients& grads) {
  check_input(model, X);
  const auto acts = run_layers(model, X);
  const std::size_t L = model.layers.size();
  grads.dW.resize(L);
  grads.db.resize(L);

  // Output layer is linear: dL/dZ = 2 (Xhat - X) / (n D).
  Matrix delta = (acts.back() - X) * (2.0 / static_cast<double>(X.size()));
  for (std::size_t l = L; l-- > 0;) {
    grads.dW[l] = delta.transpose() * acts[l];
    grads.db[l] = delta.colwise().sum().transpose();
    if (l == 0) break;
    Matrix upstream = delta * model.layers[l].W;
    if (activated(model, l - 1))
      upstream = upstream.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    delta = std::move(upstream);
  }
  return mse(X, acts.back());
}

TrainResult train_autoencoder(AutoencoderModel model, const Matrix& X, const TrainConfig& config) {
  check_input(model, X);
  if (X.rows() < 1) throw Error("autoencoder: training matrix has no rows");
  if (!X.allFinite()) throw Error("autoencoder: training matrix has non-finite entries");
  if (config.batch_size < 1) throw Error("autoencoder: batch_size must be >= 1");
  if (!(config.learning_rate > 0.0)) throw Error("autoencoder: learning_rate must be positive");

  TrainResult result;
  result.loss_history.push_back(forward(model, X).mse);

  const std::size_t L = model.layers.size();
  std::vector<Matrix> mW(L), vW(L);
  std::vector<Vector> mb(L), vb(L);
  for (std::size_t l = 0; l < L; ++l) {
    mW[l] = Matrix::Zero(model.layers[l].W.rows(), model.layers[l].W.cols());
    vW[l] = mW[l];
    mb[l] = Vector::Zero(model.layers[l].b.size());
    vb[l] = mb[l];
  }

  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed);
  Gradients g;
  Matrix batch;
  std::uint64_t step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - start);
      batch.resize(static_cast<Eigen::Index>(count), X.cols());
      for (std::size_t r = 0; r < count; ++r)
        batch.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(order[start + r]));
      loss_and_gradients(model, batch, g);
      ++step;

      if (config.optimizer == Optimizer::sgd) {
        for (std::size_t l = 0; l < L; ++l) {
          model.layers[l].W -= config.learning_rate * g.dW[l];
          model.layers[l].b -= config.learning_rate * g.db[l];
        }
        continue;
      }
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      const double b1 = config.beta1;
      const double b2 = config.beta2;
      auto adam = [&](auto& param, auto& m, auto& v, const auto& grad) {
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
        param.array() -= config.learning_rate * (m.array() / c1) /
                         ((v.array() / c2).sqrt() + config.epsilon);
      };
      for (std::size_t l = 0; l < L; ++l) {
        adam(model.layers[l].W, mW[l], vW[l], g.dW[l]);
        adam(model.layers[l].b, mb[l], vb[l], g.db[l]);
      }
    }
    const double loss = forward(model, X).mse;
    if (!std::isfinite(loss))
      throw Error("autoencoder: loss became non-finite at epoch " + std::to_string(epoch + 1) +
                  " (previous loss " + std::to_string(result.loss_history.back()) +
                  "); lower the learning rate");
    result.loss_history.push_back(loss);
  }
  result.model = std::move(model);
  return result;
}

FeatureBlock encode(const AutoencoderModel& model, const Matrix& X) {
  return {"latent", forward(model, X).latent};
}

}  // namespace fame::fusion
