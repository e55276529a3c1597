#pragma once

#include <cmath>

#include "reach/linalg.hpp"

namespace reach {

// Weighted norm ‖x‖_M = sqrt(xᵀ M x) = ‖A x‖₂ with M = AᵀA.
class Metric {
 public:
  Metric() = default;

  static Metric euclidean(Eigen::Index n) { return from_factor(identity(n)); }

  // From an SPD matrix M, factored by Cholesky (A upper triangular).
  static Metric from_matrix(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw DimensionError("metric: matrix must be square");
    if (!m.allFinite()) throw InvalidInput("metric: non-finite entries");
    const Mat sym = 0.5 * (m + m.transpose());
    Eigen::LLT<Mat> llt(sym);
    if (llt.info() != Eigen::Success) throw SingularError("metric: matrix is not positive definite");
    Metric out;
    out.m_ = sym;
    out.a_ = llt.matrixU();
    out.a_inv_ = out.a_.triangularView<Eigen::Upper>().solve(identity(m.rows()));
    return out;
  }

  // From any full-rank factor A; M = AᵀA.
  static Metric from_factor(const Mat& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw DimensionError("metric: factor must be square");
    if (!a.allFinite()) throw InvalidInput("metric: non-finite entries");
    Eigen::FullPivLU<Mat> lu(a);
    if (!lu.isInvertible()) throw SingularError("metric: factor is singular");
    Metric out;
    out.a_ = a;
    out.m_ = a.transpose() * a;
    out.a_inv_ = lu.inverse();
    return out;
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Mat& matrix() const { return m_; }
  const Mat& factor() const { return a_; }
  const Mat& factor_inverse() const { return a_inv_; }

  double norm(const Vec& x) const { return (a_ * x).norm(); }

  bool is_identity() const { return m_.isIdentity(0.0); }

 private:
  Mat m_;
  Mat a_;
  Mat a_inv_;
};

}  // namespace reach
