#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fame {

/// Every recoverable failure in the library surfaces as a fame::Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Document-term counts, one row per document. Values are whole numbers.
using CountMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A named dense matrix of per-document features, row-aligned to corpus order.
struct FeatureBlock {
  std::string name;
  Matrix values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

}  // namespace fame
