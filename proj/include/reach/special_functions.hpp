#pragma once

#include <cmath>
#include <limits>

#include "reach/errors.hpp"

namespace reach {

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz's method.
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double tol = 1e-14;
  constexpr int max_iter = 100000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < tol) return h;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta function I_x(a, b) for a, b > 0, x ∈ [0, 1].
inline double incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: parameters must be positive");
  if (std::isnan(x) || x < 0.0 || x > 1.0) throw DomainError("incomplete_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Upper tail probability P(T > q) of Student's t with `dof` degrees of freedom.
inline double student_t_upper_tail(double q, double dof) {
  if (!(dof > 0.0)) throw DomainError("student_t_upper_tail: dof must be positive");
  const double tail = 0.5 * incomplete_beta(dof / (dof + q * q), 0.5 * dof, 0.5);
  return q >= 0.0 ? tail : 1.0 - tail;
}

// q such that P(T ≤ q) = 1 − p, i.e. the upper p-quantile t*_p(dof).
inline double student_t_quantile(double p, int dof) {
  if (dof < 1) throw DomainError("student_t_quantile: dof must be at least 1");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("student_t_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -student_t_quantile(1.0 - p, dof);
  const double nu = static_cast<double>(dof);
  double lo = 0.0;
  double hi = 1.0;
  while (student_t_upper_tail(hi, nu) > p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return std::numeric_limits<double>::infinity();
  }
  // Tail is strictly decreasing in q: bisect to machine resolution.
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (student_t_upper_tail(mid, nu) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace reach
