#include "fame/projection.hpp"

#include "fame/byte_io.hpp"

#include <Eigen/Eigenvalues>

#include <charconv>
#include <cmath>
#include <limits>

namespace fame::projection {
namespace {

void fix_sign(Eigen::Ref<Vector> axis) {
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < axis.size(); ++i)
    if (std::abs(axis[i]) > std::abs(axis[arg])) arg = i;
  if (axis.size() > 0 && axis[arg] < 0.0) axis = -axis;
}

Matrix squared_distances(const Matrix& X) {
  const Vector sq = X.rowwise().squaredNorm();
  Matrix D = (-2.0 * X * X.transpose()).colwise() + sq;
  D.rowwise() += sq.transpose();
  D = D.cwiseMax(0.0);
  D.diagonal().setZero();
  return D;
}

}  // namespace

Projection2D pca_project(const Matrix& X, std::size_t out_dims) {
  if (X.rows() < 2) throw Error("pca: need at least 2 rows");
  if (!X.allFinite()) throw Error("pca: input has non-finite entries");
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const auto k = static_cast<Eigen::Index>(out_dims);
  const Eigen::Index used = std::min(k, d);
  const Matrix centered = X.rowwise() - X.colwise().mean();

  Matrix components = Matrix::Zero(d, k);
  if (d <= n) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(centered.transpose() * centered);
    for (Eigen::Index c = 0; c < used; ++c) components.col(c) = eig.eigenvectors().col(d - 1 - c);
  } else {
    // Wide data: eigenvectors of the n x n Gram matrix give the same axes.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(centered * centered.transpose());
    for (Eigen::Index c = 0; c < used; ++c) {
      Vector axis = centered.transpose() * eig.eigenvectors().col(n - 1 - c);
      const double norm = axis.norm();
      if (norm > 1e-12 * std::max(1.0, centered.norm())) components.col(c) = axis / norm;
    }
  }
  for (Eigen::Index c = 0; c < used; ++c) fix_sign(components.col(c));

  Projection2D proj;
  proj.method = Method::pca;
  proj.coords = centered * components;
  proj.components = std::move(components);
  return proj;
}

Affinities input_affinities(const Matrix& X, double perplexity) {
  const Eigen::Index n = X.rows();
  const Matrix D = squared_distances(X);
  const double target = std::log(perplexity);
  Affinities a;
  a.conditional = Matrix::Zero(n, n);
  a.achieved_perplexity.resize(n);
  Vector p(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    double dsum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) {
        dmin = std::min(dmin, D(i, j));
        dsum += D(i, j);
      }
    const double spread = dsum / static_cast<double>(n - 1) - dmin;
    double beta = spread > 0.0 ? 1.0 / spread : 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double entropy = 0.0;
    for (int step = 0; step < 50; ++step) {
      double sum = 0.0;
      double weighted = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) {
          p[j] = 0.0;
          continue;
        }
        const double shifted = D(i, j) - dmin;
        p[j] = std::exp(-beta * shifted);
        sum += p[j];
        weighted += shifted * p[j];
      }
      entropy = std::log(sum) + beta * weighted / sum;
      p /= sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0.0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    a.conditional.row(i) = p.transpose();
    a.achieved_perplexity[i] = std::exp(entropy);
  }
  a.joint = (a.conditional + a.conditional.transpose()) / (2.0 * static_cast<double>(n));
  return a;
}

namespace {

// Gradient of KL(scale * P || Q). P and the Student-t kernel are symmetric, so
// row i is read as column i. The cost uses the unscaled P.
Matrix gradient(const Matrix& P, double scale, const Matrix& Y, double* kl, Matrix& kernel) {
  const Eigen::Index n = Y.rows();
  const Eigen::Index dims = Y.cols();
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Yr = Y;
  auto sq_dist = [&](Eigen::Index i, Eigen::Index j) {
    const double* a = Yr.data() + i * dims;
    const double* b = Yr.data() + j * dims;
    double s = 0.0;
    for (Eigen::Index c = 0; c < dims; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    return s;
  };
  kernel.resize(n, n);
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    kernel(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = 1.0 / (1.0 + sq_dist(i, j));
      kernel(i, j) = v;
      total += 2.0 * v;
    }
  }
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) kernel(i, j) = kernel(j, i);

  Matrix grad(n, dims);
  double cost = 0.0;
  constexpr double kFloor = 1e-12;
  std::vector<double> g(static_cast<std::size_t>(dims));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::fill(g.begin(), g.end(), 0.0);
    const double* p = P.col(i).data();
    const double* k = kernel.col(i).data();
    const double* yi = Yr.data() + i * dims;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = std::max(k[j] / total, kFloor);
      const double w = 4.0 * (scale * p[j] - q) * k[j];
      const double* yj = Yr.data() + j * dims;
      for (Eigen::Index c = 0; c < dims; ++c) g[static_cast<std::size_t>(c)] += w * (yi[c] - yj[c]);
      if (kl && p[j] > 0.0) cost += p[j] * std::log(p[j] / q);
    }
    for (Eigen::Index c = 0; c < dims; ++c) grad(i, c) = g[static_cast<std::size_t>(c)];
  }
  if (kl) *kl = cost;
  return grad;
}

}  // namespace

Matrix tsne_gradient(const Matrix& P, const Matrix& Y, double* kl) {
  Matrix kernel;
  return gradient(P, 1.0, Y, kl, kernel);
}

Projection2D tsne_project(const Matrix& X, const TsneOptions& opt) {
  const Eigen::Index n = X.rows();
  if (n < 4) throw Error("t-SNE: need at least 4 points");
  if (!X.allFinite()) throw Error("t-SNE: input has non-finite entries");
  if (!(opt.perplexity > 0.0) || opt.perplexity >= static_cast<double>(n - 1) / 3.0)
    throw Error("t-SNE: perplexity " + format_double(opt.perplexity) + " is infeasible for " +
                std::to_string(n) + " points (must be < (n - 1) / 3)");
  if ((X.rowwise() - X.row(0)).squaredNorm() == 0.0)
    throw Error("t-SNE: all points are identical");

  const Affinities aff = input_affinities(X, opt.perplexity);
  Matrix P = aff.joint.cwiseMax(1e-12);
  P.diagonal().setZero();

  Matrix Y = pca_project(X, 2).coords;
  const Vector first = Y.col(0);
  const double sd = std::sqrt((first.array() - first.mean()).square().mean());
  if (sd > 0.0) Y *= 1e-4 / sd;

  Projection2D proj;
  proj.method = Method::tsne;
  proj.params = {{"perplexity", opt.perplexity},
                 {"iters", static_cast<double>(opt.iters)},
                 {"seed", static_cast<double>(opt.seed)},
                 {"learning_rate", opt.learning_rate},
                 {"exaggeration", opt.exaggeration}};

  Matrix update = Matrix::Zero(n, 2);
  Matrix gains = Matrix::Ones(n, 2);
  Matrix kernel;
  for (std::size_t it = 0; it < opt.iters; ++it) {
    const bool early = it < opt.exaggeration_iters;
    Matrix grad;
    if (it % 10 == 0) {
      double kl = 0.0;
      grad = gradient(P, early ? opt.exaggeration : 1.0, Y, &kl, kernel);
      proj.kl_iterations.push_back(it);
      proj.kl_history.push_back(kl);
    } else {
      grad = gradient(P, early ? opt.exaggeration : 1.0, Y, nullptr, kernel);
    }
    const double momentum = it < opt.momentum_switch ? opt.momentum : opt.final_momentum;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index c = 0; c < 2; ++c) {
        const bool same = (grad(i, c) > 0.0) == (update(i, c) > 0.0);
        gains(i, c) = std::max(same ? gains(i, c) * 0.8 : gains(i, c) + 0.2, 0.01);
      }
    update = momentum * update - opt.learning_rate * gains.cwiseProduct(grad);
    Y += update;
    Y.rowwise() -= Y.colwise().mean();
    if (!Y.allFinite()) throw Error("t-SNE: coordinates diverged at iteration " + std::to_string(it));
  }
  double final_kl = 0.0;
  gradient(P, 1.0, Y, &final_kl, kernel);
  proj.kl_iterations.push_back(opt.iters);
  proj.kl_history.push_back(final_kl);
  proj.coords = std::move(Y);
  return proj;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void emit_projection(const Projection2D& proj, const std::vector<std::string>& doc_ids,
                     const std::vector<std::uint32_t>& assignments,
                     const std::vector<std::optional<std::string>>& gold,
                     const std::filesystem::path& path) {
  const auto n = static_cast<std::size_t>(proj.coords.rows());
  if (doc_ids.size() != n || assignments.size() != n || (!gold.empty() && gold.size() != n))
    throw Error("projection: coordinates, ids, assignments and labels differ in length");
  std::string text = "doc_id,x,y,cluster,label\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    text += csv_field(doc_ids[i]) + ',' + format_double(proj.coords(r, 0)) + ',' +
            format_double(proj.coords.cols() > 1 ? proj.coords(r, 1) : 0.0) + ',' +
            std::to_string(assignments[i]) + ',' +
            (gold.empty() || !gold[i] ? std::string() : csv_field(*gold[i])) + '\n';
  }
  byte_io::write_file(path.string(), std::vector<char>(text.begin(), text.end()));
}

}  // namespace fame::projection
