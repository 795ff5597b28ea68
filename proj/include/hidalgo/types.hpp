#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hidalgo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::MatrixXi;
using IntVector = Eigen::VectorXi;
using Index = Eigen::Index;

// Two observations coincide (r_i1 = 0): the TWO-NN ratio is undefined there.
struct DuplicatePoints : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ball height trace carries no release signal.
struct FlatTrajectory : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// N observations living in R^D, one per row.
struct Dataset {
  Matrix points;                 // N x D
  std::vector<std::string> ids;  // N unique row labels

  Index rows() const { return points.rows(); }
  Index dim() const { return points.cols(); }
};

// Throws std::invalid_argument unless N >= 3, D >= 1, all entries finite and
// row labels are unique.
void validate(const Dataset& data);

// Wraps a point matrix with labels "1".."N".
Dataset make_dataset(Matrix points);

}  // namespace hidalgo
