#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mcomp {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Thrown when an iterative kernel fails to converge within its cap.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

inline void check_finite(const CMatrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace mcomp
