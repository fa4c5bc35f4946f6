#include "fame/fusion.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace fame;
using namespace fame::fusion;

namespace {

// Elementwise loss computed without Eigen expressions.
double mse_oracle(const Matrix& X, const Matrix& Y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) s += (X(i, j) - Y(i, j)) * (X(i, j) - Y(i, j));
  return s / static_cast<double>(X.size());
}

double max_gradient_error(AutoencoderModel model, const Matrix& X) {
  Gradients g;
  loss_and_gradients(model, X, g);
  double worst = 0.0;
  const double h = 1e-5;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = forward(model, X).mse;
    param = saved - h;
    const double down = forward(model, X).mse;
    param = saved;
    const double numeric = (up - down) / (2 * h);
    const double err = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    worst = std::max(worst, err);
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto& W = model.layers[l].W;
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) check(W(r, c), g.dW[l](r, c));
    auto& b = model.layers[l].b;
    for (Eigen::Index r = 0; r < b.size(); ++r) check(b(r), g.db[l](r));
  }
  return worst;
}

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("assemble_features widths and scaling") {
  Rng rng(1);
  const Matrix a = fame::testing::random_matrix(6, 3, rng, -2, 5);
  Matrix b = fame::testing::random_matrix(6, 5, rng);
  b.col(2).setConstant(4.0);
  const auto fused = assemble_features({{"a", a}, {"b", b}}, {Scaling::none, Scaling::zscore});
  CHECK(fused.matrix.cols() == 8);
  CHECK(fused.matrix.leftCols(3) == a);
  REQUIRE(fused.layout.size() == 2);
  CHECK(fused.layout[1].width == 5);
  for (Eigen::Index j = 3; j < 8; ++j) {
    const auto col = fused.matrix.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().mean());
    CHECK(std::abs(mean) <= 1e-9);
    if (j == 5) CHECK(col.isZero());
    else CHECK(std::abs(sd - 1.0) <= 1e-6);
  }
  CHECK(apply_layout(fused.layout, {{"a", a}, {"b", b}}) == fused.matrix);

  const auto l2 = assemble_features({{"a", a}}, {Scaling::l2});
  for (Eigen::Index r = 0; r < 6; ++r) CHECK(l2.matrix.row(r).norm() == doctest::Approx(1.0));
}

TEST_CASE("assemble_features errors") {
  CHECK_THROWS_AS(assemble_features({}, {}), Error);
  CHECK_THROWS_AS(assemble_features({{"a", Matrix::Ones(2, 2)}, {"b", Matrix::Ones(3, 2)}},
                                    {Scaling::none, Scaling::none}),
                  Error);
  CHECK_THROWS_AS(parse_scaling("minmax"), Error);
  CHECK(parse_scaling("zscore") == Scaling::zscore);
}

TEST_CASE("init_autoencoder") {
  const auto a = init_autoencoder({4, 2, 4}, 7);
  const auto b = init_autoencoder({4, 2, 4}, 7);
  REQUIRE(a.layers.size() == 2);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(a.layers[l].W == b.layers[l].W);
    CHECK(a.layers[l].b.isZero());
    const double bound = std::sqrt(6.0 / double(a.layers[l].W.rows() + a.layers[l].W.cols()));
    CHECK(a.layers[l].W.cwiseAbs().maxCoeff() <= bound);
  }
  CHECK(a.layers[0].W.rows() == 2);
  CHECK(a.layers[0].W.cols() == 4);
  CHECK(a.latent_dim() == 2);
  CHECK_THROWS_AS(init_autoencoder({4, 2, 3}, 7), Error);
  CHECK_THROWS_AS(init_autoencoder({4, 4}, 7), Error);
  CHECK_THROWS_AS(init_autoencoder({4, 0, 4}, 7), Error);
}

TEST_CASE("forward") {
  auto id = init_autoencoder({3, 3, 3}, 1, Activation::identity);
  for (auto& l : id.layers) l.W = Matrix::Identity(3, 3);
  Rng rng(2);
  const Matrix X = fame::testing::random_matrix(4, 3, rng, -1, 1);
  const auto r = forward(id, X);
  CHECK(r.reconstruction == X);
  CHECK(r.mse == 0.0);

  const auto relu = init_autoencoder({3, 2, 3}, 5);
  const auto z = forward(relu, Matrix::Zero(5, 3));
  CHECK(z.reconstruction.isZero());
  CHECK(z.mse == 0.0);

  const auto deep = init_autoencoder({6, 4, 2, 4, 6}, 3);
  const Matrix Y = fame::testing::random_matrix(7, 6, rng, -1, 1);
  const auto f = forward(deep, Y);
  CHECK(std::abs(f.mse - mse_oracle(Y, f.reconstruction)) <= 1e-12);
  CHECK(f.latent.cols() == 2);
  CHECK(encode(deep, Y).values == f.latent);
  CHECK(encode(deep, Y).values == encode(deep, Y).values);
  CHECK_THROWS_AS(forward(deep, Matrix::Ones(2, 5)), Error);
}

TEST_CASE("analytic gradients match finite differences") {
  const std::vector<std::vector<std::size_t>> shapes{
      {8, 5, 3, 5, 8}, {4, 2, 4}, {6, 3, 6}, {5, 5, 5}, {8, 4, 8}};
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(40 + s);
    const auto& dims = shapes[s % shapes.size()];
    const auto act = s % 2 ? Activation::identity : Activation::relu;
    auto model = init_autoencoder(dims, s, act);
    for (auto& l : model.layers)
      for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b(i) = rng.uniform(-0.3, 0.3);
    const Matrix X = fame::testing::random_matrix(static_cast<Eigen::Index>(2 + s % 5),
                                                  static_cast<Eigen::Index>(dims.front()), rng, -1, 1);
    worst = std::max(worst, max_gradient_error(model, X));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("training") {
  Rng rng(9);
  const Matrix X = fame::testing::random_matrix(20, 6, rng, -1, 1);
  const auto model = init_autoencoder({6, 3, 6}, 4, Activation::identity);

  SUBCASE("zero epochs is a no-op") {
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto r = train_autoencoder(model, X, cfg);
    REQUIRE(r.loss_history.size() == 1);
    CHECK(r.loss_history[0] == forward(model, X).mse);
    for (std::size_t l = 0; l < 2; ++l) CHECK(r.model.layers[l].W == model.layers[l].W);
  }
  SUBCASE("plain gradient descent decreases the loss") {
    TrainConfig cfg;
    cfg.optimizer = Optimizer::sgd;
    cfg.learning_rate = 1e-3;
    cfg.epochs = 200;
    cfg.batch_size = 20;
    const auto r = train_autoencoder(model, X, cfg);
    std::size_t down = 0;
    for (std::size_t i = 1; i < r.loss_history.size(); ++i) down += r.loss_history[i] <= r.loss_history[i - 1];
    CHECK(down >= 190);
  }
  SUBCASE("training is deterministic") {
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 7;
    cfg.seed = 3;
    CHECK(train_autoencoder(model, X, cfg).loss_history == train_autoencoder(model, X, cfg).loss_history);
  }
  SUBCASE("divergence is reported") {
    TrainConfig cfg;
    cfg.optimizer = Optimizer::sgd;
    cfg.learning_rate = 1e200;
    cfg.epochs = 5;
    CHECK_THROWS_WITH_AS(train_autoencoder(model, X, cfg), doctest::Contains("non-finite"), Error);
  }
  SUBCASE("bad input") {
    TrainConfig cfg;
    Matrix bad = X;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(train_autoencoder(model, bad, cfg), Error);
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train_autoencoder(model, X, cfg), Error);
  }
}

TEST_CASE("linear autoencoder recovers a low-rank subspace") {
  Rng rng(21);
  const Matrix X = fame::testing::random_matrix(200, 3, rng, -1, 1) * fame::testing::random_matrix(3, 12, rng, -1, 1);
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.batch_size = 200;
  cfg.learning_rate = 1e-2;
  const auto r = train_autoencoder(init_autoencoder({12, 3, 12}, 1, Activation::identity), X, cfg);
  CHECK(r.loss_history.back() <= 1e-3);
}

}  // TEST_SUITE
