#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "reach/errors.hpp"

namespace reach {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Largest singular value via dense SVD.
inline double sigma_max(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (!m.allFinite()) throw InvalidInput("sigma_max: non-finite matrix entries");
  if (m.rows() <= 4 && m.rows() == m.cols()) {
    // Symmetric eigen-solve of mᵀm is faster for tiny matrices and accurate to ~1e-15 relative.
    Eigen::SelfAdjointEigenSolver<Mat> es(m.transpose() * m, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

inline Mat identity(Eigen::Index n) { return Mat::Identity(n, n); }

}  // namespace reach
