#include "fame/term_features.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace fame;
using namespace fame::term;

namespace {

CountMatrix sparse(const Matrix& m) { return m.sparseView(); }

// d1 = "a b a", d2 = "b c" over vocabulary (a, b, c)
Matrix abc_counts() { return (Matrix(2, 3) << 2, 1, 0, 0, 1, 1).finished(); }

}  // namespace

TEST_SUITE("term_features") {

TEST_CASE("idf values") {
  const auto model = fit_tfidf(sparse(abc_counts()));
  REQUIRE(model.idf.size() == 3);
  CHECK(model.idf[0] == doctest::Approx(std::log(1.5) + 1.0).epsilon(1e-15));
  CHECK(model.idf[1] == 1.0);
  CHECK(model.idf[2] == doctest::Approx(1.405465).epsilon(1e-6));
  CHECK((model.idf.array() >= 1.0).all());

  const auto single = fit_tfidf(sparse((Matrix(1, 2) << 4, 1).finished()));
  CHECK(single.idf[0] == 1.0);
  CHECK(single.idf[1] == 1.0);
}

TEST_CASE("tf-idf transform matches hand computation") {
  const auto model = fit_tfidf(sparse(abc_counts()));
  const Matrix t = transform_tfidf(model, sparse(abc_counts())).values;
  const double ia = std::log(3.0 / 2.0) + 1.0;
  const double n1 = std::sqrt(4 * ia * ia + 1.0);
  CHECK(std::abs(t(0, 0) - 2 * ia / n1) <= 1e-12);
  CHECK(std::abs(t(0, 1) - 1.0 / n1) <= 1e-12);
  CHECK(t(0, 2) == 0.0);
  CHECK(std::abs(t(1, 1) - 1.0 / std::sqrt(1.0 + ia * ia)) <= 1e-12);
  CHECK(std::abs(t(1, 2) - ia / std::sqrt(1.0 + ia * ia)) <= 1e-12);
  CHECK(t(0, 0) == doctest::Approx(0.9421).epsilon(1e-4));
  CHECK(t(0, 1) == doctest::Approx(0.3352).epsilon(1e-3));
}

TEST_CASE("tf-idf zero rows and unnormalized product") {
  Matrix c = (Matrix(2, 2) << 3, 0, 0, 0).finished();
  c(1, 1) = 0;
  auto model = fit_tfidf(sparse(c), false);
  const Matrix t = transform_tfidf(model, sparse(c)).values;
  CHECK(t(0, 0) == 3.0 * model.idf[0]);
  CHECK(t.row(1).isZero());

  model = fit_tfidf(sparse((Matrix(1, 1) << 3).finished()), false);
  CHECK(transform_tfidf(model, sparse((Matrix(1, 1) << 3).finished())).values(0, 0) == 3.0);
}

TEST_CASE("tf-idf properties") {
  Rng rng(5);
  Matrix c(12, 9);
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j) c(i, j) = rng.uniform() < 0.4 ? double(rng.below(5)) : 0.0;
  c(0, 0) = 1;
  const auto model = fit_tfidf(sparse(c));
  const Matrix a = transform_tfidf(model, sparse(c)).values;
  const Matrix b = transform_tfidf(model, sparse(c)).values;
  CHECK(a == b);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    if (c.row(i).sum() > 0) CHECK(a.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));

  const Matrix reversed = c.colwise().reverse();
  CHECK(Matrix(transform_tfidf(model, sparse(reversed)).values) == Matrix(a.colwise().reverse()));
}

TEST_CASE("tf-idf errors") {
  CHECK_THROWS_AS(fit_tfidf(sparse(Matrix::Zero(2, 3))), Error);
  CHECK_THROWS_AS(fit_tfidf(CountMatrix(0, 0)), Error);
  const auto model = fit_tfidf(sparse(abc_counts()));
  CHECK_THROWS_AS(transform_tfidf(model, sparse(Matrix::Ones(2, 4))), Error);
}

TEST_CASE("NMF exact factorizations") {
  NmfOptions opt;
  opt.rank = 1;
  opt.iters = 500;
  const Matrix r1 = (Matrix(2, 2) << 1, 2, 2, 4).finished();
  auto m = fit_nmf(r1, opt);
  CHECK(m.loss_history.back() <= 1e-6);
  CHECK((r1 - m.W * m.H).norm() == doctest::Approx(m.loss_history.back()).epsilon(1e-9));

  opt.rank = 3;
  opt.iters = 2000;
  m = fit_nmf(Matrix::Identity(3, 3), opt);
  CHECK(m.loss_history.back() <= 1e-4);
}

TEST_CASE("NMF is monotone and nonnegative on random instances") {
  std::size_t violations = 0;
  std::size_t negatives = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng rng(1000 + s);
    const Matrix X = fame::testing::random_matrix(10, 8, rng);
    for (std::size_t k = 1; k <= 3; ++k) {
      NmfOptions opt{k, 100, s, 0.0};
      const auto m = fit_nmf(X, opt, [&](std::size_t, const Matrix& W, const Matrix& H) {
        if ((W.array() < 0).any() || (H.array() < 0).any()) ++negatives;
      });
      for (std::size_t i = 1; i < m.loss_history.size(); ++i)
        if (m.loss_history[i] > m.loss_history[i - 1] + 1e-10) ++violations;
    }
  }
  CHECK(violations == 0);
  CHECK(negatives == 0);
}

TEST_CASE("NMF sparse and dense paths agree") {
  Rng rng(8);
  Matrix X = fame::testing::random_matrix(15, 10, rng);
  X = (X.array() < 0.5).select(0.0, X);
  NmfOptions opt{3, 50, 4, 0.0};
  const auto d = fit_nmf(X, opt);
  const auto s = fit_nmf(sparse(X), opt);
  CHECK((d.W - s.W).norm() <= 1e-9 * d.W.norm());
  CHECK(d.loss_history.back() == doctest::Approx(s.loss_history.back()).epsilon(1e-8));
}

TEST_CASE("NMF determinism, iteration count and early stop") {
  Rng rng(2);
  const Matrix X = fame::testing::random_matrix(10, 8, rng);
  NmfOptions one{2, 1, 9, 0.0};
  NmfOptions hundred{2, 100, 9, 0.0};
  const auto a = fit_nmf(X, one);
  const auto b = fit_nmf(X, hundred);
  CHECK(b.loss_history.size() == 100);
  CHECK(b.loss_history.back() <= a.loss_history.back());
  CHECK(fit_nmf(X, hundred).W == b.W);

  NmfOptions early{2, 100000, 9, 1e-6};
  CHECK(fit_nmf(X, early).loss_history.size() < 100000);
}

TEST_CASE("NMF errors") {
  NmfOptions opt{1, 10, 0, 0.0};
  CHECK_THROWS_AS(fit_nmf((Matrix(1, 2) << 1, -1).finished(), opt), Error);
  opt.rank = 0;
  CHECK_THROWS_AS(fit_nmf(Matrix::Ones(3, 3), opt), Error);
  opt.rank = 4;
  CHECK_THROWS_AS(fit_nmf(Matrix::Ones(3, 3), opt), Error);
  opt.rank = 1;
  opt.iters = 0;
  CHECK_THROWS_AS(fit_nmf(Matrix::Ones(3, 3), opt), Error);
}

}  // TEST_SUITE
