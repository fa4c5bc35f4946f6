#pragma once

#include "fame/common.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fame::projection {

enum class Method { pca, tsne };

struct Projection2D {
  Matrix coords;  // n x 2
  Method method = Method::pca;
  std::map<std::string, double> params;
  std::vector<std::size_t> kl_iterations;
  std::vector<double> kl_history;
  Matrix components;  // d x 2 loadings (pca only)
};

/// Centers the columns and projects onto the two leading principal axes.
/// Each axis is signed so that its largest-magnitude loading is positive.
Projection2D pca_project(const Matrix& X, std::size_t out_dims = 2);

struct TsneOptions {
  double perplexity = 30.0;
  std::size_t iters = 1000;
  std::uint64_t seed = 0;
  double learning_rate = 200.0;
  double exaggeration = 12.0;
  std::size_t exaggeration_iters = 250;
  double momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
};

struct Affinities {
  Matrix conditional;         // row i: p(j | i), zero diagonal
  Vector achieved_perplexity;  // per row
  Matrix joint;               // (P + P^T) / 2n
};

/// Per-point Gaussian bandwidths by bisection on the entropy (tolerance 1e-5,
/// at most 50 steps), then symmetrized.
Affinities input_affinities(const Matrix& X, double perplexity);

/// KL(P || Q) gradient for low-dimensional coordinates Y under Student-t
/// affinities. When `kl` is non-null it receives KL(P || Q).
Matrix tsne_gradient(const Matrix& P, const Matrix& Y, double* kl = nullptr);

/// Exact O(n^2) t-SNE initialized from PCA scaled to standard deviation 1e-4.
Projection2D tsne_project(const Matrix& X, const TsneOptions& options);

/// CSV with header doc_id,x,y,cluster,label. Missing labels are written as
/// empty fields.
void emit_projection(const Projection2D& proj, const std::vector<std::string>& doc_ids,
                     const std::vector<std::uint32_t>& assignments,
                     const std::vector<std::optional<std::string>>& gold,
                     const std::filesystem::path& path);

std::string format_double(double v);
std::string csv_field(const std::string& s);

}  // namespace fame::projection
