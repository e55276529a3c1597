#pragma once

// Interval vectors and matrices, plus the two matrix-level tools the
// reachability engines rely on: a rigorous upper bound on the (weighted)
// spectral norm of an interval matrix, and QR reconditioning of an interval
// matrix into a point orthogonal frame times a tighter interval factor.

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "reach/interval.hpp"
#include "reach/linalg.hpp"
#include "reach/metric.hpp"

namespace reach {

class IVector {
 public:
  IVector() = default;
  explicit IVector(std::size_t n) : v_(n, Interval(0.0)) {}
  IVector(std::initializer_list<Interval> xs) : v_(xs) {}
  explicit IVector(std::vector<Interval> xs) : v_(std::move(xs)) {}

  static IVector from(const Vec& x) {
    IVector out(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = Interval(x(i));
    return out;
  }

  // Box c ± r (componentwise radii, rounded outward).
  static IVector around(const Vec& c, const Vec& r) {
    if (c.size() != r.size()) throw DimensionError("IVector::around: size mismatch");
    IVector out(static_cast<std::size_t>(c.size()));
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      out[i] = Interval(detail::add_down(c(i), -r(i)), detail::add_up(c(i), r(i)));
    }
    return out;
  }

  std::size_t size() const { return v_.size(); }
  Interval& operator[](std::size_t i) { return v_[i]; }
  const Interval& operator[](std::size_t i) const { return v_[i]; }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  Vec lo() const { return map([](const Interval& x) { return x.lo(); }); }
  Vec hi() const { return map([](const Interval& x) { return x.hi(); }); }
  Vec mid() const { return map([](const Interval& x) { return x.mid(); }); }
  Vec rad() const { return map([](const Interval& x) { return x.rad(); }); }
  Vec width() const { return map([](const Interval& x) { return x.width(); }); }

  bool contains(const Vec& x) const {
    if (static_cast<std::size_t>(x.size()) != size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (!v_[i].contains(x(static_cast<Eigen::Index>(i)))) return false;
    return true;
  }

  bool contains(const IVector& o) const {
    if (o.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (!v_[i].contains(o[i])) return false;
    return true;
  }

  bool is_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](const Interval& x) { return x.is_finite(); });
  }

  friend IVector operator+(const IVector& a, const IVector& b) {
    check_same(a, b);
    IVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
  }

  friend IVector operator-(const IVector& a, const IVector& b) {
    check_same(a, b);
    IVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
  }

  friend IVector operator*(const Interval& s, const IVector& a) {
    IVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
    return out;
  }

  friend IVector hull(const IVector& a, const IVector& b) {
    check_same(a, b);
    IVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = Interval::hull(a[i], b[i]);
    return out;
  }

  // Componentwise intersection; throws if empty.
  friend IVector intersect(const IVector& a, const IVector& b) {
    check_same(a, b);
    IVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double lo = std::max(a[i].lo(), b[i].lo());
      const double hi = std::min(a[i].hi(), b[i].hi());
      if (lo > hi) throw InvalidInput("IVector intersect: empty intersection");
      out[i] = Interval(lo, hi);
    }
    return out;
  }

 private:
  template <class Fn>
  Vec map(Fn fn) const {
    Vec out(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) out(static_cast<Eigen::Index>(i)) = fn(v_[i]);
    return out;
  }

  static void check_same(const IVector& a, const IVector& b) {
    if (a.size() != b.size()) throw DimensionError("IVector: size mismatch");
  }

  std::vector<Interval> v_;
};

class IMatrix {
 public:
  IMatrix() = default;
  IMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), e_(rows * cols, Interval(0.0)) {}

  static IMatrix from(const Mat& m) {
    IMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (std::size_t i = 0; i < out.rows_; ++i)
      for (std::size_t j = 0; j < out.cols_; ++j) out(i, j) = Interval(m(idx(i), idx(j)));
    return out;
  }

  static IMatrix identity(std::size_t n) { return from(Mat::Identity(idx(n), idx(n))); }

  // Entrywise [lo, hi].
  static IMatrix from_bounds(const Mat& lo, const Mat& hi) {
    if (lo.rows() != hi.rows() || lo.cols() != hi.cols()) throw DimensionError("IMatrix: bounds shape mismatch");
    IMatrix out(static_cast<std::size_t>(lo.rows()), static_cast<std::size_t>(lo.cols()));
    for (std::size_t i = 0; i < out.rows_; ++i)
      for (std::size_t j = 0; j < out.cols_; ++j) out(i, j) = Interval(lo(idx(i), idx(j)), hi(idx(i), idx(j)));
    return out;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  Interval& operator()(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  const Interval& operator()(std::size_t i, std::size_t j) const { return e_[i * cols_ + j]; }

  Mat lo() const { return map([](const Interval& x) { return x.lo(); }); }
  Mat hi() const { return map([](const Interval& x) { return x.hi(); }); }
  Mat mid() const { return map([](const Interval& x) { return x.mid(); }); }
  Mat rad() const { return map([](const Interval& x) { return x.rad(); }); }
  Mat mag() const { return map([](const Interval& x) { return x.mag(); }); }

  bool contains(const Mat& m) const {
    if (m.rows() != idx(rows_) || m.cols() != idx(cols_)) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if (!(*this)(i, j).contains(m(idx(i), idx(j)))) return false;
    return true;
  }

  bool contains(const IMatrix& o) const {
    if (o.rows_ != rows_ || o.cols_ != cols_) return false;
    for (std::size_t k = 0; k < e_.size(); ++k)
      if (!e_[k].contains(o.e_[k])) return false;
    return true;
  }

  bool is_finite() const {
    return std::all_of(e_.begin(), e_.end(), [](const Interval& x) { return x.is_finite(); });
  }

  // Largest entry width.
  double max_width() const {
    double w = 0.0;
    for (const auto& x : e_) w = std::max(w, x.width());
    return w;
  }

  friend IMatrix operator+(const IMatrix& a, const IMatrix& b) {
    check_same(a, b);
    IMatrix out(a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.e_.size(); ++k) out.e_[k] = a.e_[k] + b.e_[k];
    return out;
  }

  friend IMatrix operator-(const IMatrix& a, const IMatrix& b) {
    check_same(a, b);
    IMatrix out(a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.e_.size(); ++k) out.e_[k] = a.e_[k] - b.e_[k];
    return out;
  }

  friend IMatrix operator*(const Interval& s, const IMatrix& a) {
    IMatrix out(a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.e_.size(); ++k) out.e_[k] = s * a.e_[k];
    return out;
  }

  friend IMatrix operator*(const IMatrix& a, const IMatrix& b) { return imatrix_mul(a, b); }
  friend IMatrix operator*(const Mat& a, const IMatrix& b) { return imatrix_mul(from(a), b); }
  friend IMatrix operator*(const IMatrix& a, const Mat& b) { return imatrix_mul(a, from(b)); }

  friend IVector operator*(const IMatrix& a, const IVector& x) {
    if (a.cols_ != x.size()) throw DimensionError("IMatrix * IVector: dimension mismatch");
    IVector out(a.rows_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      Interval acc(0.0);
      for (std::size_t k = 0; k < a.cols_; ++k) acc += a(i, k) * x[k];
      out[i] = acc;
    }
    return out;
  }

  friend IMatrix hull(const IMatrix& a, const IMatrix& b) {
    check_same(a, b);
    IMatrix out(a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.e_.size(); ++k) out.e_[k] = Interval::hull(a.e_[k], b.e_[k]);
    return out;
  }

  // Entrywise containment of every product A·B with A ∈ [A], B ∈ [B] via interval dot products.
  // The result is the interval hull of the product set, which in general overestimates
  // the set itself (it is not a matrix "box" product).
  friend IMatrix imatrix_mul(const IMatrix& a, const IMatrix& b) {
    if (a.cols_ != b.rows_) throw DimensionError("imatrix_mul: inner dimensions disagree");
    IMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t j = 0; j < b.cols_; ++j) {
        Interval acc(0.0);
        for (std::size_t k = 0; k < a.cols_; ++k) acc += a(i, k) * b(k, j);
        out(i, j) = acc;
      }
    }
    return out;
  }

 private:
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

  template <class Fn>
  Mat map(Fn fn) const {
    Mat out(idx(rows_), idx(cols_));
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(idx(i), idx(j)) = fn((*this)(i, j));
    return out;
  }

  static void check_same(const IMatrix& a, const IMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionError("IMatrix: shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Interval> e_;
};

namespace detail {

// Relative slack added to floating-point singular values so that the result bounds the exact one.
inline double sigma_upper(const Mat& m) {
  const double s = sigma_max(m);
  const double n = static_cast<double>(std::max(m.rows(), m.cols()));
  return nudge_up(s * (1.0 + 8.0 * n * std::numeric_limits<double>::epsilon()), 1);
}

// sqrt(‖W‖₁ ‖W‖∞) for an entrywise nonnegative matrix, rounded upward.
inline double hoelder_bound(const Mat& w) {
  double norm1 = 0.0;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < w.rows(); ++i) s = add_up(s, w(i, j));
    norm1 = std::max(norm1, s);
  }
  double norm_inf = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) s = add_up(s, w(i, j));
    norm_inf = std::max(norm_inf, s);
  }
  const double p = mul_up(norm1, norm_inf);
  const double r = std::sqrt(p);
  return std::fma(r, r, -p) < 0.0 ? next_up(r) : r;
}

}  // namespace detail

// Upper bound on sup{σ_max(G) : G ∈ [W]} for an already weighted interval matrix:
// the smaller of ‖C‖₂ + ‖|W − C|‖₂ (C the midpoint) and sqrt(‖|W|‖₁ ‖|W|‖∞).
inline double interval_norm_upper_bound(const IMatrix& w) {
  if (!w.is_finite()) throw BlowupError("spectral norm bound: non-finite interval matrix");
  const Mat c = w.mid();
  Mat dev(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      const auto& e = w(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      dev(i, j) = std::max(detail::add_up(e.hi(), -c(i, j)), detail::add_up(c(i, j), -e.lo()));
    }
  }
  const double centered = detail::add_up(detail::sigma_upper(c), detail::sigma_upper(dev));
  const double hoelder = detail::hoelder_bound(w.mag());
  return std::min(centered, hoelder);
}

// Weighted interval matrix A_range · [F] · A_domain⁻¹.
inline IMatrix weighted(const IMatrix& f, const Metric& range_metric, const Metric& domain_metric) {
  if (!f.is_square()) throw DimensionError("weighted: matrix must be square");
  const auto n = static_cast<Eigen::Index>(f.rows());
  if (range_metric.dim() != n || domain_metric.dim() != n) throw DimensionError("weighted: metric dimension mismatch");
  IMatrix w = f;
  if (!range_metric.is_identity()) w = range_metric.factor() * w;
  if (!domain_metric.is_identity()) w = w * domain_metric.factor_inverse();
  return w;
}

// Λ ≥ sup{‖A_range G A_domain⁻¹‖₂ : G ∈ [F]}.
inline double spectral_norm_upper_bound(const IMatrix& f, const Metric& range_metric, const Metric& domain_metric) {
  if (!f.is_square()) throw DimensionError("spectral_norm_upper_bound: matrix must be square");
  return interval_norm_upper_bound(weighted(f, range_metric, domain_metric));
}

namespace detail {

// Interval enclosure of Q⁻¹ for an approximately orthogonal Q:
// Q⁻¹ = (QᵀQ)⁻¹Qᵀ = (I + D)Qᵀ with |D_ij| ≤ e/(1−e), e ≥ ‖QᵀQ − I‖∞.
inline IMatrix orthogonal_inverse_enclosure(const Mat& q) {
  const auto n = static_cast<std::size_t>(q.rows());
  const IMatrix iq = IMatrix::from(q);
  IMatrix qtq(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Interval acc(0.0);
      for (std::size_t k = 0; k < n; ++k) acc += iq(k, i) * iq(k, j);
      qtq(i, j) = acc - Interval(i == j ? 1.0 : 0.0);
    }
  }
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s = add_up(s, qtq(i, j).mag());
    e = std::max(e, s);
  }
  if (e >= 0.5) throw SingularError("orthogonal_inverse_enclosure: matrix is far from orthogonal");
  const double eta = div_up(e, add_down(1.0, -e));
  IMatrix corr = IMatrix::identity(n);
  if (eta > 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) corr(i, j) += Interval(-eta, eta);
  }
  return corr * Mat(q.transpose());
}

// Orthogonal factor of a QR decomposition with sign-normalized (nonnegative) R diagonal.
// Returns identity when m is numerically rank deficient.
inline Mat orthogonal_frame(const Mat& m) {
  const auto n = m.rows();
  if (!m.allFinite()) return identity(n);
  Eigen::HouseholderQR<Mat> qr(m);
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return identity(n);
  Mat q = qr.householderQ() * identity(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(r(i, i)) <= 1e-13 * scale) return identity(n);
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  }
  return q;
}

}  // namespace detail

struct Reconditioned {
  Mat q;          // orthogonal frame (point matrix)
  IMatrix f_new;  // interval factor in that frame: q · f_new ⊇ [F]
};

// Lohner-style reconditioning: extract the rotational part of mid([F]) as a new
// coordinate frame. Rank-deficient mid([F]) falls back to Q = I.
inline Reconditioned lohner_qr_recondition(const IMatrix& f) {
  if (!f.is_square()) throw DimensionError("lohner_qr_recondition: matrix must be square");
  Reconditioned out;
  out.q = detail::orthogonal_frame(f.mid());
  out.f_new = detail::orthogonal_inverse_enclosure(out.q) * f;
  return out;
}

// An interval matrix carried as Q·[R] with Q a point orthogonal frame. Left-multiplying
// by an interval matrix first acts on Q (a point matrix, so no wrapping), and the
// frame is then re-extracted before the product with [R].
class LohnerMatrix {
 public:
  LohnerMatrix() = default;
  explicit LohnerMatrix(const IMatrix& f) : q_(identity(static_cast<Eigen::Index>(f.rows()))), r_(f) {}
  LohnerMatrix(Mat q, IMatrix r) : q_(std::move(q)), r_(std::move(r)) {}

  const Mat& frame() const { return q_; }
  const IMatrix& factor() const { return r_; }

  // Enclosure of the represented set in standard coordinates.
  IMatrix value() const { return q_ * r_; }

  // Enclosure of {Φ · G : Φ ∈ [phi], G ∈ this}.
  void left_multiply(const IMatrix& phi) {
    const IMatrix t = phi * q_;
    const Mat q_next = detail::orthogonal_frame(t.mid() * r_.mid());
    r_ = (detail::orthogonal_inverse_enclosure(q_next) * t) * r_;
    q_ = q_next;
  }

  // Weighted enclosure A_range · Q · [R] · A_domain⁻¹, multiplying the point factors first.
  IMatrix weighted(const Metric& range_metric, const Metric& domain_metric) const {
    IMatrix w = Mat(range_metric.factor() * q_) * r_;
    if (!domain_metric.is_identity()) w = w * domain_metric.factor_inverse();
    return w;
  }

 private:
  Mat q_;
  IMatrix r_;
};

}  // namespace reach
