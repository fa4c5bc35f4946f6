#include "fame/cluster.hpp"

#include "fame/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fame::cluster {
namespace {

struct Nearest {
  std::uint32_t index = 0;
  double dist = 0.0;
};

Nearest nearest(const Matrix& X, Eigen::Index i, const Matrix& centroids) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (X.row(i) - centroids.row(c)).squaredNorm();
    if (d < best.dist) best = {static_cast<std::uint32_t>(c), d};
  }
  return best;
}

Matrix kmeans_plus_plus(const Matrix& X, std::size_t k, Rng& rng) {
  const Eigen::Index n = X.rows();
  Matrix centroids(static_cast<Eigen::Index>(k), X.cols());
  centroids.row(0) = X.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = (X.row(i) - centroids.row(0)).squaredNorm();
  for (std::size_t c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (u < acc && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (d2[pick] == 0.0 && pick > 0) --pick;
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centroids.row(static_cast<Eigen::Index>(c)) = X.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], (X.row(i) - centroids.row(static_cast<Eigen::Index>(c))).squaredNorm());
  }
  return centroids;
}

struct RestartResult {
  Matrix centroids;
  std::vector<std::uint32_t> assignments;
  double inertia = 0.0;
  std::size_t n_iter = 0;
  std::vector<double> history;
};

// Moves the point farthest from its centroid (among clusters that can spare
// one) into each empty cluster.
void reseed_empty(const Matrix& X, Matrix& centroids, std::vector<std::uint32_t>& assign,
                  std::vector<std::size_t>& sizes) {
  const std::size_t k = sizes.size();
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const auto owner = assign[static_cast<std::size_t>(i)];
      if (sizes[owner] < 2) continue;
      const double d = (X.row(i) - centroids.row(owner)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) throw Error("k-means: cannot fill empty cluster");
    --sizes[assign[static_cast<std::size_t>(far)]];
    assign[static_cast<std::size_t>(far)] = static_cast<std::uint32_t>(c);
    sizes[c] = 1;
    centroids.row(static_cast<Eigen::Index>(c)) = X.row(far);
  }
}

void update_centroids(const Matrix& X, Matrix& centroids, const std::vector<std::uint32_t>& assign,
                      const std::vector<std::size_t>& sizes) {
  centroids.setZero();
  for (Eigen::Index i = 0; i < X.rows(); ++i) centroids.row(assign[static_cast<std::size_t>(i)]) += X.row(i);
  for (std::size_t c = 0; c < sizes.size(); ++c)
    centroids.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(sizes[c]);
}

RestartResult lloyd(const Matrix& X, std::size_t k, const KMeansOptions& opt, Rng& rng) {
  RestartResult r;
  r.centroids = kmeans_plus_plus(X, k, rng);
  const auto n = static_cast<std::size_t>(X.rows());
  r.assignments.assign(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::size_t> sizes(k);
  double prev = std::numeric_limits<double>::infinity();

  for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto best = nearest(X, static_cast<Eigen::Index>(i), r.centroids);
      changed = changed || best.index != r.assignments[i];
      r.assignments[i] = best.index;
      ++sizes[best.index];
    }
    if (std::find(sizes.begin(), sizes.end(), 0) != sizes.end()) {
      reseed_empty(X, r.centroids, r.assignments, sizes);
      changed = true;
    }
    update_centroids(X, r.centroids, r.assignments, sizes);
    const double cur = inertia(X, r.centroids, r.assignments);
    r.history.push_back(cur);
    r.n_iter = iter + 1;
    if (!changed) break;
    if (std::isfinite(prev) && (prev <= 0.0 || (prev - cur) / prev < opt.tol)) break;
    prev = cur;
  }
  // Leave every point with its nearest final centroid.
  std::fill(sizes.begin(), sizes.end(), 0);
  for (std::size_t i = 0; i < n; ++i) ++sizes[r.assignments[i] = nearest(X, static_cast<Eigen::Index>(i), r.centroids).index];
  if (std::find(sizes.begin(), sizes.end(), 0) == sizes.end()) {
    r.inertia = inertia(X, r.centroids, r.assignments);
  } else {
    reseed_empty(X, r.centroids, r.assignments, sizes);
    update_centroids(X, r.centroids, r.assignments, sizes);
    r.inertia = inertia(X, r.centroids, r.assignments);
  }
  return r;
}

}  // namespace

double inertia(const Matrix& X, const Matrix& centroids, const std::vector<std::uint32_t>& assignments) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    total += (X.row(i) - centroids.row(assignments[static_cast<std::size_t>(i)])).squaredNorm();
  return total;
}

ClusteringResult kmeans_fit(const Matrix& X, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (options.k < 1) throw Error("k-means: k must be >= 1");
  if (options.k > n)
    throw Error("k-means: k = " + std::to_string(options.k) + " exceeds the " + std::to_string(n) +
                " points");
  if (!X.allFinite()) throw Error("k-means: input has non-finite entries");
  if (options.restarts < 1) throw Error("k-means: restarts must be >= 1");
  if (options.max_iter < 1) throw Error("k-means: max_iter must be >= 1");

  RestartResult best;
  bool have = false;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    Rng rng(options.seed, r);
    auto res = lloyd(X, options.k, options, rng);
    if (!have || res.inertia < best.inertia) {
      best = std::move(res);
      have = true;
    }
  }

  ClusteringResult out;
  out.assignments = std::move(best.assignments);
  out.model.k = options.k;
  out.model.centroids = std::move(best.centroids);
  out.model.inertia = best.inertia;
  out.model.n_iter = best.n_iter;
  out.model.seed = options.seed;
  out.model.inertia_history = std::move(best.history);
  return out;
}

std::vector<std::uint32_t> kmeans_predict(const KMeansModel& model, const Matrix& X) {
  if (X.cols() != model.centroids.cols())
    throw Error("k-means: input has " + std::to_string(X.cols()) + " columns, centroids have " +
                std::to_string(model.centroids.cols()));
  std::vector<std::uint32_t> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    out[static_cast<std::size_t>(i)] = nearest(X, i, model.centroids).index;
  return out;
}

namespace {

struct Contingency {
  std::size_t ka = 0;
  std::size_t kb = 0;
  std::vector<std::size_t> table;  // ka x kb
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

Contingency contingency(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  Contingency c;
  for (auto x : a) c.ka = std::max(c.ka, x + 1);
  for (auto x : b) c.kb = std::max(c.kb, x + 1);
  c.table.assign(c.ka * c.kb, 0);
  c.rows.assign(c.ka, 0);
  c.cols.assign(c.kb, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++c.table[a[i] * c.kb + b[i]];
    ++c.rows[a[i]];
    ++c.cols[b[i]];
  }
  return c;
}

double entropy(const std::vector<std::size_t>& counts, double n) {
  double h = 0.0;
  for (auto c : counts)
    if (c > 0) {
      const double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
  return h;
}

}  // namespace

double nmi_codes(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size())
    throw Error("nmi: label lists differ in length (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  if (a.empty()) throw Error("nmi: label lists are empty");
  const auto c = contingency(a, b);
  const double n = static_cast<double>(a.size());
  const double ha = entropy(c.rows, n);
  const double hb = entropy(c.cols, n);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < c.ka; ++i)
    for (std::size_t j = 0; j < c.kb; ++j) {
      const auto nij = c.table[i * c.kb + j];
      if (nij == 0) continue;
      const double v = static_cast<double>(nij);
      mi += v / n * std::log(v * n / (static_cast<double>(c.rows[i]) * static_cast<double>(c.cols[j])));
    }
  return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

PartitionMetrics partition_metrics_codes(const std::vector<std::size_t>& pred,
                                         const std::vector<std::size_t>& gold) {
  if (pred.size() != gold.size())
    throw Error("partition metrics: label lists differ in length (" + std::to_string(pred.size()) +
                " vs " + std::to_string(gold.size()) + ")");
  if (pred.size() < 2) throw Error("partition metrics: need at least 2 points");
  const auto c = contingency(pred, gold);
  auto pairs = [](std::size_t x) { return static_cast<long double>(x) * (x - 1) / 2; };

  // Integer pair counts keep the adjusted Rand index exact for small inputs.
  long double index = 0, sum_a = 0, sum_b = 0;
  for (auto v : c.table) index += pairs(v);
  for (auto v : c.rows) sum_a += pairs(v);
  for (auto v : c.cols) sum_b += pairs(v);
  const long double total = pairs(pred.size());
  const long double num = 2 * (index * total - sum_a * sum_b);
  const long double den = (sum_a + sum_b) * total - 2 * sum_a * sum_b;

  PartitionMetrics m;
  m.ari = den == 0 ? 1.0 : static_cast<double>(num / den);
  std::size_t majority = 0;
  for (std::size_t i = 0; i < c.ka; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 0; j < c.kb; ++j) best = std::max(best, c.table[i * c.kb + j]);
    majority += best;
  }
  m.purity = static_cast<double>(majority) / static_cast<double>(pred.size());
  return m;
}

}  // namespace fame::cluster
