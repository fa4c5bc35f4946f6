#include "fame/projection.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace fame;
using namespace fame::projection;

namespace {

Matrix blobs(std::uint64_t seed, std::vector<int>& label) {
  Rng rng(seed);
  Matrix X(60, 5);
  label.assign(60, 0);
  for (Eigen::Index i = 0; i < 60; ++i) {
    label[static_cast<std::size_t>(i)] = i < 30 ? 0 : 1;
    for (Eigen::Index j = 0; j < 5; ++j) X(i, j) = rng.normal() + (i < 30 || j > 0 ? 0.0 : 20.0);
  }
  return X;
}

double entropy_perplexity(const Matrix& P, Eigen::Index i) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < P.cols(); ++j)
    if (P(i, j) > 0) h -= P(i, j) * std::log(P(i, j));
  return std::exp(h);
}

}  // namespace

TEST_SUITE("projection") {

TEST_CASE("PCA on rank-one data") {
  Matrix X(6, 2);
  for (Eigen::Index i = 0; i < 6; ++i) X.row(i) << double(i), 2.0 * double(i);
  const auto p = pca_project(X);
  CHECK(p.coords.col(1).cwiseAbs().maxCoeff() <= 1e-9);
  const Matrix centered = X.rowwise() - X.colwise().mean();
  CHECK(p.coords.col(0).squaredNorm() == doctest::Approx(centered.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("PCA of 2-D input is an isometry") {
  Rng rng(2);
  const Matrix X = fame::testing::random_matrix(12, 2, rng, -3, 3);
  const auto p = pca_project(X);
  for (Eigen::Index i = 0; i < 12; ++i)
    for (Eigen::Index j = 0; j < 12; ++j)
      CHECK(std::abs((X.row(i) - X.row(j)).norm() - (p.coords.row(i) - p.coords.row(j)).norm()) <= 1e-9);
}

TEST_CASE("PCA components are orthonormal and sign-fixed") {
  for (const auto [n, d] : {std::pair{20, 6}, std::pair{5, 30}}) {
    Rng rng(static_cast<std::uint64_t>(n * d));
    Matrix X = fame::testing::random_matrix(n, d, rng, -1, 1);
    X.row(3) = X.row(1);
    const auto p = pca_project(X);
    REQUIRE(p.components.cols() == 2);
    const Matrix gram = p.components.transpose() * p.components;
    CHECK((gram - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-9);
    for (Eigen::Index c = 0; c < 2; ++c) {
      Eigen::Index arg = 0;
      p.components.col(c).cwiseAbs().maxCoeff(&arg);
      CHECK(p.components(arg, c) > 0);
    }
    CHECK(p.coords.row(3) == p.coords.row(1));
    const Matrix centered = X.rowwise() - X.colwise().mean();
    CHECK((centered * p.components - p.coords).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("PCA pads narrow input and rejects bad input") {
  const Matrix X = (Matrix(3, 1) << 1, 2, 4).finished();
  const auto p = pca_project(X);
  CHECK(p.coords.cols() == 2);
  CHECK(p.coords.col(1).isZero());
  Matrix bad = Matrix::Ones(3, 2);
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(pca_project(bad), Error);
  CHECK_THROWS_AS(pca_project(Matrix::Ones(1, 2)), Error);
}

TEST_CASE("input affinities") {
  std::vector<int> label;
  const Matrix X = blobs(1, label);
  const auto a = input_affinities(X, 10.0);
  CHECK((a.joint - a.joint.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.joint.diagonal().isZero());
  CHECK(a.conditional.diagonal().isZero());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    CHECK(std::abs(a.conditional.row(i).sum() - 1.0) <= 1e-9);
    CHECK(std::abs(entropy_perplexity(a.conditional, i) - 10.0) <= 1e-3);
    CHECK(std::abs(a.achieved_perplexity[i] - 10.0) <= 1e-3);
  }
  CHECK(a.joint.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("t-SNE gradient") {
  SUBCASE("two symmetric points") {
    Matrix P = (Matrix(2, 2) << 0, 0.5, 0.5, 0).finished();
    const Matrix Y = (Matrix(2, 2) << -0.5, 0, 0.5, 0).finished();
    const Matrix g = tsne_gradient(P, Y);
    CHECK(g.colwise().sum().cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((g.row(0) + g.row(1)).cwiseAbs().maxCoeff() <= 1e-9);
  }
  SUBCASE("sums to zero and matches finite differences") {
    std::vector<int> label;
    const Matrix P = input_affinities(blobs(2, label).topRows(12), 3.0).joint;
    Rng rng(3);
    Matrix Y = fame::testing::random_matrix(12, 2, rng, -1, 1);
    double kl = 0.0;
    const Matrix g = tsne_gradient(P, Y, &kl);
    CHECK(g.colwise().sum().cwiseAbs().maxCoeff() <= 1e-9);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < 12; ++i)
      for (Eigen::Index c = 0; c < 2; ++c) {
        double up = 0, down = 0;
        Y(i, c) += h;
        tsne_gradient(P, Y, &up);
        Y(i, c) -= 2 * h;
        tsne_gradient(P, Y, &down);
        Y(i, c) += h;
        CHECK(g(i, c) == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5));
      }
  }
}

TEST_CASE("t-SNE separates blobs and lowers KL") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::vector<int> label;
    const Matrix X = blobs(10 + seed, label);
    TsneOptions opt;
    opt.perplexity = 15;
    opt.iters = 500;
    opt.seed = seed;
    const auto p = tsne_project(X, opt);
    REQUIRE(p.coords.rows() == 60);
    CHECK(p.coords.allFinite());
    REQUIRE(p.kl_history.size() >= 2);
    CHECK(p.kl_history.back() < p.kl_history.front());
    int agree = 0;
    for (Eigen::Index i = 0; i < 60; ++i) {
      Eigen::Index best = -1;
      double bd = INFINITY;
      for (Eigen::Index j = 0; j < 60; ++j)
        if (j != i && (p.coords.row(i) - p.coords.row(j)).squaredNorm() < bd) {
          bd = (p.coords.row(i) - p.coords.row(j)).squaredNorm();
          best = j;
        }
      agree += label[static_cast<std::size_t>(i)] == label[static_cast<std::size_t>(best)];
    }
    CHECK(agree >= 57);
    CHECK(tsne_project(X, opt).coords == p.coords);
  }
}

TEST_CASE("t-SNE preconditions") {
  TsneOptions opt;
  opt.perplexity = 5;
  CHECK_THROWS_AS(tsne_project(Matrix::Random(3, 2), opt), Error);
  opt.perplexity = 2;
  CHECK_THROWS_WITH_AS(tsne_project(Matrix::Random(6, 2), opt), doctest::Contains("perplexity"), Error);
  opt.perplexity = 1;
  CHECK_THROWS_AS(tsne_project(Matrix::Ones(8, 2), opt), Error);
  Matrix bad = Matrix::Random(8, 2);
  bad(1, 1) = INFINITY;
  CHECK_THROWS_AS(tsne_project(bad, opt), Error);
}

TEST_CASE("emit_projection") {
  fame::testing::TempDir dir("proj");
  Projection2D p;
  p.coords = (Matrix(5, 2) << 0, 1, 2, 3, 4, 5, 6, 7, 8.5, -9).finished();
  emit_projection(p, {"a", "b", "c,d", "e", "f"}, {0, 1, 0, 1, 1},
                  {std::string("x"), std::nullopt, std::string("y"), std::string("x"), std::nullopt}, dir / "p.csv");
  const auto text = fame::testing::read_text(dir / "p.csv");
  std::istringstream in(text);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "doc_id,x,y,cluster,label");
  CHECK(lines[1] == "a,0,1,0,x");
  CHECK(lines[2] == "b,2,3,1,");
  CHECK(lines[3] == "\"c,d\",4,5,0,y");
  CHECK(lines[5] == "f,8.5,-9,1,");
  CHECK(text.find('\r') == std::string::npos);
  CHECK_THROWS_AS(emit_projection(p, {"a"}, {0}, {std::nullopt}, dir / "q.csv"), Error);
}

}  // TEST_SUITE
