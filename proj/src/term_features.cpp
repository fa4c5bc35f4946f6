#include "fame/term_features.hpp"

#include "fame/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fame::term {

TfidfModel fit_tfidf(const CountMatrix& counts, bool normalize) {
  if (counts.rows() == 0 || counts.cols() == 0) throw Error("tf-idf: count matrix is empty");
  Eigen::VectorXd df = Eigen::VectorXd::Zero(counts.cols());
  bool any = false;
  for (Eigen::Index r = 0; r < counts.outerSize(); ++r)
    for (CountMatrix::InnerIterator it(counts, r); it; ++it)
      if (it.value() != 0.0) {
        df[it.col()] += 1.0;
        any = true;
      }
  if (!any) throw Error("tf-idf: count matrix has no nonzero entries");

  const double n = static_cast<double>(counts.rows());
  TfidfModel model;
  model.vocab_size = static_cast<std::size_t>(counts.cols());
  model.normalize = normalize;
  model.idf.resize(counts.cols());
  for (Eigen::Index t = 0; t < counts.cols(); ++t)
    model.idf[t] = std::log((1.0 + n) / (1.0 + df[t])) + 1.0;
  return model;
}

CountMatrix transform_tfidf_sparse(const TfidfModel& model, const CountMatrix& counts) {
  if (static_cast<std::size_t>(counts.cols()) != model.vocab_size)
    throw Error("tf-idf: matrix has " + std::to_string(counts.cols()) + " columns, model expects " +
                std::to_string(model.vocab_size));
  CountMatrix out = counts;
  for (Eigen::Index r = 0; r < out.outerSize(); ++r) {
    double sq = 0.0;
    for (CountMatrix::InnerIterator it(out, r); it; ++it) {
      it.valueRef() *= model.idf[it.col()];
      sq += it.value() * it.value();
    }
    if (model.normalize && sq > 0.0) {
      const double norm = std::sqrt(sq);
      for (CountMatrix::InnerIterator it(out, r); it; ++it) it.valueRef() /= norm;
    }
  }
  return out;
}

FeatureBlock transform_tfidf(const TfidfModel& model, const CountMatrix& counts) {
  return {"tfidf", Matrix(transform_tfidf_sparse(model, counts))};
}

namespace {

constexpr double kEps = 1e-12;

double frobenius_error(const Matrix& X, const Matrix& W, const Matrix& H) {
  return (X - W * H).norm();
}

// Expands ||X||^2 - 2<X, WH> + ||WH||^2 touching only the nonzeros of X.
double frobenius_error(const CountMatrix& X, const Matrix& W, const Matrix& H) {
  double cross = 0.0;
  double xx = 0.0;
  for (Eigen::Index r = 0; r < X.outerSize(); ++r)
    for (CountMatrix::InnerIterator it(X, r); it; ++it) {
      xx += it.value() * it.value();
      cross += it.value() * W.row(r).dot(H.col(it.col()));
    }
  const double whwh = ((W.transpose() * W).cwiseProduct(H * H.transpose())).sum();
  return std::sqrt(std::max(0.0, xx - 2.0 * cross + whwh));
}

template <class Mat>
NmfModel run_nmf(const Mat& X, const NmfOptions& opt, const NmfObserver& observer,
                 double total, bool has_negative) {
  const auto n = X.rows();
  const auto m = X.cols();
  if (has_negative) throw Error("NMF: input has a negative entry");
  const auto k = static_cast<Eigen::Index>(opt.rank);
  if (k < 1 || k > std::min(n, m))
    throw Error("NMF: rank " + std::to_string(opt.rank) + " outside [1, " +
                std::to_string(std::min(n, m)) + "]");
  if (opt.iters < 1) throw Error("NMF: iters must be >= 1");

  const double mean = total / (static_cast<double>(n) * static_cast<double>(m));
  const double scale = std::sqrt(mean / static_cast<double>(k));
  Rng rng(opt.seed);
  NmfModel model;
  model.rank = opt.rank;
  model.W.resize(n, k);
  model.H.resize(k, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) model.W(i, j) = rng.uniform() * scale;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < m; ++j) model.H(i, j) = rng.uniform() * scale;

  Matrix& W = model.W;
  Matrix& H = model.H;
  for (std::size_t iter = 0; iter < opt.iters; ++iter) {
    {
      const Matrix num = W.transpose() * X;
      const Matrix den = (W.transpose() * W) * H;
      H = H.cwiseProduct(num).cwiseQuotient((den.array() + kEps).matrix());
    }
    {
      const Matrix num = X * H.transpose();
      const Matrix den = W * (H * H.transpose());
      W = W.cwiseProduct(num).cwiseQuotient((den.array() + kEps).matrix());
    }
    const double err = frobenius_error(X, W, H);
    const bool stall =
        opt.early_stop > 0.0 && !model.loss_history.empty() &&
        (model.loss_history.back() <= 0.0 ||
         (model.loss_history.back() - err) / model.loss_history.back() < opt.early_stop);
    model.loss_history.push_back(err);
    if (observer) observer(iter, W, H);
    if (stall) break;
  }
  return model;
}

}  // namespace

NmfModel fit_nmf(const Matrix& X, const NmfOptions& options, const NmfObserver& on_iteration) {
  return run_nmf(X, options, on_iteration, X.sum(), (X.array() < 0.0).any());
}

NmfModel fit_nmf(const CountMatrix& X, const NmfOptions& options,
                 const NmfObserver& on_iteration) {
  bool negative = false;
  double total = 0.0;
  for (Eigen::Index r = 0; r < X.outerSize(); ++r)
    for (CountMatrix::InnerIterator it(X, r); it; ++it) {
      negative = negative || it.value() < 0.0;
      total += it.value();
    }
  return run_nmf(X, options, on_iteration, total, negative);
}

}  // namespace fame::term
