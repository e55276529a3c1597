#pragma once

// Validated interval arithmetic on doubles.
//
// Directed rounding is emulated: every operation is evaluated in
// round-to-nearest and the endpoints are then pushed outward by one ULP
// whenever the rounded value may lie on the wrong side of the exact one.
// For +, -, *, / the rounding error is recovered exactly (TwoSum / FMA
// residuals), so exact results are not widened. Library transcendentals are
// not correctly rounded and always get a fixed outward nudge.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "reach/errors.hpp"

namespace reach {

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ULPs of outward slack applied to libm results (glibc documents up to 2 ULP for tanh).
inline constexpr int kLibmUlps = 2;

inline double next_down(double x) { return std::nextafter(x, -kInf); }
inline double next_up(double x) { return std::nextafter(x, kInf); }

inline double nudge_down(double x, int ulps) {
  for (int i = 0; i < ulps; ++i) x = next_down(x);
  return x;
}

inline double nudge_up(double x, int ulps) {
  for (int i = 0; i < ulps; ++i) x = next_up(x);
  return x;
}

// Smallest magnitude where the FMA/TwoSum residual is still exact.
inline constexpr double kTinyExact = 1e-290;

inline double add_down(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return s;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return err < 0.0 ? next_down(s) : s;
}

inline double add_up(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return s;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return err > 0.0 ? next_up(s) : s;
}

inline double mul_down(double a, double b) {
  const double p = a * b;
  if (!std::isfinite(p)) return p;
  if (std::abs(p) < kTinyExact) return (p == 0.0 && (a == 0.0 || b == 0.0)) ? 0.0 : next_down(p);
  const double err = std::fma(a, b, -p);
  return err < 0.0 ? next_down(p) : p;
}

inline double mul_up(double a, double b) {
  const double p = a * b;
  if (!std::isfinite(p)) return p;
  if (std::abs(p) < kTinyExact) return (p == 0.0 && (a == 0.0 || b == 0.0)) ? 0.0 : next_up(p);
  const double err = std::fma(a, b, -p);
  return err > 0.0 ? next_up(p) : p;
}

// Sign of (a/b - fl(a/b)); 0 when the quotient is exact.
inline int div_residual_sign(double a, double b, double q) {
  if (!std::isfinite(q)) return 0;
  if (std::abs(q) < kTinyExact || std::abs(a) < kTinyExact) return (a == 0.0) ? 0 : 2;
  const double r = std::fma(-q, b, a);
  if (r == 0.0) return 0;
  return ((r > 0.0) == (b > 0.0)) ? 1 : -1;
}

inline double div_down(double a, double b) {
  const double q = a / b;
  const int s = div_residual_sign(a, b, q);
  return (s < 0 || s == 2) ? next_down(q) : q;
}

inline double div_up(double a, double b) {
  const double q = a / b;
  const int s = div_residual_sign(a, b, q);
  return (s > 0 || s == 2) ? next_up(q) : q;
}

}  // namespace detail

class Interval {
 public:
  constexpr Interval() = default;

  // Point interval. Implicit so that model code can mix doubles and intervals.
  Interval(double v) : lo_(v), hi_(v) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(v)) throw InvalidInput("interval: NaN endpoint");
  }

  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (std::isnan(lo) || std::isnan(hi)) throw InvalidInput("interval: NaN endpoint");
    if (lo > hi) throw InvalidInput("interval: lower endpoint exceeds upper endpoint");
  }

  static Interval hull(const Interval& a, const Interval& b) {
    return {std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_)};
  }

  static Interval entire() { return {-detail::kInf, detail::kInf}; }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double mid() const { return lo_ == hi_ ? lo_ : 0.5 * lo_ + 0.5 * hi_; }
  double rad() const {
    const double m = mid();
    return std::max(detail::add_up(hi_, -m), detail::add_up(m, -lo_));
  }
  double width() const { return detail::add_up(hi_, -lo_); }
  double mag() const { return std::max(std::abs(lo_), std::abs(hi_)); }
  double mig() const { return contains(0.0) ? 0.0 : std::min(std::abs(lo_), std::abs(hi_)); }

  bool is_point() const { return lo_ == hi_; }
  bool is_finite() const { return std::isfinite(lo_) && std::isfinite(hi_); }
  bool contains(double v) const { return lo_ <= v && v <= hi_; }
  bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
  bool interior_contains(const Interval& o) const { return lo_ < o.lo_ && o.hi_ < hi_; }

  Interval& operator+=(const Interval& o) { return *this = *this + o; }
  Interval& operator-=(const Interval& o) { return *this = *this - o; }
  Interval& operator*=(const Interval& o) { return *this = *this * o; }
  Interval& operator/=(const Interval& o) { return *this = *this / o; }

  friend Interval operator+(const Interval& a, const Interval& b) {
    return raw(detail::add_down(a.lo_, b.lo_), detail::add_up(a.hi_, b.hi_));
  }

  friend Interval operator-(const Interval& a, const Interval& b) {
    return raw(detail::add_down(a.lo_, -b.hi_), detail::add_up(a.hi_, -b.lo_));
  }

  friend Interval operator-(const Interval& a) { return raw(-a.hi_, -a.lo_); }

  friend Interval operator*(const Interval& a, const Interval& b) {
    using detail::mul_down;
    using detail::mul_up;
    if (a.is_point() && b.is_point()) {
      return raw(mul_down(a.lo_, b.lo_), mul_up(a.lo_, b.lo_));
    }
    const double lo = std::min({mul_down(a.lo_, b.lo_), mul_down(a.lo_, b.hi_),
                                mul_down(a.hi_, b.lo_), mul_down(a.hi_, b.hi_)});
    const double hi = std::max({mul_up(a.lo_, b.lo_), mul_up(a.lo_, b.hi_),
                                mul_up(a.hi_, b.lo_), mul_up(a.hi_, b.hi_)});
    return raw(lo, hi);
  }

  friend Interval operator/(const Interval& a, const Interval& b) {
    using detail::div_down;
    using detail::div_up;
    if (b.contains(0.0)) throw DomainError("interval: division by an interval containing zero");
    const double lo = std::min({div_down(a.lo_, b.lo_), div_down(a.lo_, b.hi_),
                                div_down(a.hi_, b.lo_), div_down(a.hi_, b.hi_)});
    const double hi = std::max({div_up(a.lo_, b.lo_), div_up(a.lo_, b.hi_),
                                div_up(a.hi_, b.lo_), div_up(a.hi_, b.hi_)});
    return raw(lo, hi);
  }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

  friend std::ostream& operator<<(std::ostream& os, const Interval& x) {
    return os << '[' << x.lo_ << ", " << x.hi_ << ']';
  }

 private:
  // Unchecked construction for results whose ordering is known.
  static Interval raw(double lo, double hi) {
    Interval r;
    r.lo_ = lo;
    r.hi_ = hi;
    if (std::isnan(lo) || std::isnan(hi)) throw InvalidInput("interval: NaN result");
    return r;
  }

  double lo_ = 0.0;
  double hi_ = 0.0;
};

inline Interval hull(const Interval& a, const Interval& b) { return Interval::hull(a, b); }

// Widen both endpoints by an absolute amount (rounded outward).
inline Interval inflate(const Interval& x, double abs_eps) {
  return {detail::add_down(x.lo(), -abs_eps), detail::add_up(x.hi(), abs_eps)};
}

inline Interval sqr(const Interval& x) {
  using detail::mul_down;
  using detail::mul_up;
  const double mig = x.mig();
  const double mag = x.mag();
  return {mul_down(mig, mig), mul_up(mag, mag)};
}

inline Interval abs(const Interval& x) { return {x.mig(), x.mag()}; }

// Integer power.
inline Interval pow(const Interval& x, int n) {
  if (n < 0) return Interval(1.0) / pow(x, -n);
  if (n == 0) return Interval(1.0);
  if (n == 1) return x;
  auto point_pow_down = [n](double v) {
    // v >= 0
    double r = v;
    for (int i = 1; i < n; ++i) r = detail::mul_down(r, v);
    return r;
  };
  auto point_pow_up = [n](double v) {
    double r = v;
    for (int i = 1; i < n; ++i) r = detail::mul_up(r, v);
    return r;
  };
  if (n % 2 == 0) {
    return {point_pow_down(x.mig()), point_pow_up(x.mag())};
  }
  // Odd powers are monotone; handle the sign through symmetry.
  auto odd_down = [&](double v) { return v >= 0 ? point_pow_down(v) : -point_pow_up(-v); };
  auto odd_up = [&](double v) { return v >= 0 ? point_pow_up(v) : -point_pow_down(-v); };
  return {odd_down(x.lo()), odd_up(x.hi())};
}

inline Interval exp(const Interval& x) {
  using detail::kLibmUlps;
  const double lo = x.lo() == 0.0 ? 1.0 : std::max(0.0, detail::nudge_down(std::exp(x.lo()), kLibmUlps));
  const double hi = x.hi() == 0.0 ? 1.0 : detail::nudge_up(std::exp(x.hi()), kLibmUlps);
  return {lo, hi};
}

inline Interval tanh(const Interval& x) {
  using detail::kLibmUlps;
  const double lo = x.lo() == 0.0 ? 0.0 : std::max(-1.0, detail::nudge_down(std::tanh(x.lo()), kLibmUlps));
  const double hi = x.hi() == 0.0 ? 0.0 : std::min(1.0, detail::nudge_up(std::tanh(x.hi()), kLibmUlps));
  return {lo, hi};
}

namespace detail {

// Does [lo, hi] (possibly) contain offset + k*period for some integer k?
// Errs on the side of "yes" near the boundaries.
inline bool may_contain_lattice(double lo, double hi, double offset, double period) {
  constexpr double slack = 1e-12;
  const double klo = std::floor((lo - offset) / period - slack);
  const double khi = std::floor((hi - offset) / period + slack);
  if (khi > klo) return true;
  // Same cell: check the lattice point at the cell's upper end too.
  const double p = offset + (klo + 1.0) * period;
  return p >= lo - std::abs(p) * slack && p <= hi + std::abs(p) * slack;
}

inline Interval sin_cos_impl(const Interval& x, double (*fn)(double), double max_at, double min_at) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (!x.is_finite() || x.width() >= two_pi) return {-1.0, 1.0};
  const double a = fn(x.lo());
  const double b = fn(x.hi());
  double lo = std::max(-1.0, nudge_down(std::min(a, b), kLibmUlps));
  double hi = std::min(1.0, nudge_up(std::max(a, b), kLibmUlps));
  if (may_contain_lattice(x.lo(), x.hi(), max_at, two_pi)) hi = 1.0;
  if (may_contain_lattice(x.lo(), x.hi(), min_at, two_pi)) lo = -1.0;
  return {lo, hi};
}

}  // namespace detail

inline Interval sin(const Interval& x) {
  if (x.is_point() && x.lo() == 0.0) return Interval(0.0);
  return detail::sin_cos_impl(x, static_cast<double (*)(double)>(std::sin), std::numbers::pi / 2,
                              -std::numbers::pi / 2);
}

inline Interval cos(const Interval& x) {
  if (x.is_point() && x.lo() == 0.0) return Interval(1.0);
  return detail::sin_cos_impl(x, static_cast<double (*)(double)>(std::cos), 0.0, std::numbers::pi);
}

// Scalar overloads so that templated model code compiles for double and Interval alike.
inline double sqr(double x) { return x * x; }

}  // namespace reach
