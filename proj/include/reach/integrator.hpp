#pragma once

// Point integration of ẋ = f(x) and of the augmented system
// (ẋ, Ḟ) = (f(x), ∂f/∂x(x)·F), whose F component is the sensitivity ∂x(t)/∂x(t₀).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "reach/errors.hpp"
#include "reach/linalg.hpp"
#include "reach/vector_field.hpp"

namespace reach {

enum class Method { rk4_fixed, rk45_adaptive };

inline std::string to_string(Method m) { return m == Method::rk4_fixed ? "rk4_fixed" : "rk45_adaptive"; }

inline Method method_from_string(const std::string& s) {
  if (s == "rk4_fixed") return Method::rk4_fixed;
  if (s == "rk45_adaptive") return Method::rk45_adaptive;
  throw InvalidInput("unknown integration method '" + s + "'");
}

struct IntegratorConfig {
  Method method = Method::rk45_adaptive;
  double step = 0.01;  // fixed step, also the cap for interval integration
  double rtol = 1e-9;
  double atol = 1e-9;
  long long max_steps = 1'000'000;

  void validate() const {
    if (!(step > 0.0)) throw InvalidInput("integrator: step must be positive");
    if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidInput("integrator: rtol and atol must be positive");
    if (max_steps < 1) throw InvalidInput("integrator: max_steps must be positive");
  }

  static IntegratorConfig fixed(double h) {
    IntegratorConfig c;
    c.method = Method::rk4_fixed;
    c.step = h;
    return c;
  }

  static IntegratorConfig adaptive(double rtol = 1e-9, double atol = 1e-9) {
    IntegratorConfig c;
    c.rtol = rtol;
    c.atol = atol;
    return c;
  }
};

struct TimeSpan {
  double t0 = 0.0;
  double t1 = 0.0;

  double length() const { return t1 - t0; }
};

// Step times t0 + j·dt for j = 1..⌈T/dt⌉, the last one clamped to t0 + T.
inline std::vector<double> step_times(double t0, double horizon, double dt) {
  const auto k = static_cast<long long>(std::ceil(horizon / dt - 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(0LL, k)));
  for (long long j = 1; j <= k; ++j) out.push_back(j == k ? t0 + horizon : t0 + static_cast<double>(j) * dt);
  return out;
}

struct AugmentedState {
  Vec x;
  Mat F;

  // Diagnostic for the full-rank invariant of deformation gradients.
  bool near_singular() const { return std::abs(F.determinant()) <= 1e-12; }
};

namespace detail {

inline void check_finite(const double* y, std::size_t m, double t) {
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(y[i])) throw BlowupError("integration produced a non-finite state at t = " + std::to_string(t));
  }
}

// Classical RK4 with n equal steps over [t0, t1].
template <class Rhs>
void rk4_fixed(Rhs&& rhs, std::size_t m, double* y, double t0, double t1, const IntegratorConfig& cfg) {
  const double span = t1 - t0;
  const auto steps = static_cast<long long>(std::max(1.0, std::ceil(span / cfg.step - 1e-9)));
  if (steps > cfg.max_steps) throw HorizonError("rk4: step budget exceeded");
  const double h = span / static_cast<double>(steps);
  std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m);
  for (long long s = 0; s < steps; ++s) {
    rhs(y, k1.data());
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(tmp.data(), k2.data());
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(tmp.data(), k3.data());
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(tmp.data(), k4.data());
    for (std::size_t i = 0; i < m; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    check_finite(y, m, t0 + h * static_cast<double>(s + 1));
  }
}

// Dormand–Prince 5(4) with standard step-size control. `h_hint` (if non-null)
// supplies the first trial step and receives the last proposed one.
template <class Rhs>
void dopri5(Rhs&& rhs, std::size_t m, double* y, double t0, double t1, const IntegratorConfig& cfg, double* h_hint) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2;
  (void)c3;
  (void)c4;
  (void)c5;

  const double span = t1 - t0;
  if (span == 0.0) return;
  std::vector<double> k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m), tmp(m), ynew(m);
  rhs(y, k1.data());

  auto scaled_norm = [&](const double* v, const double* ref) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double sc = cfg.atol + cfg.rtol * std::abs(ref[i]);
      s += (v[i] / sc) * (v[i] / sc);
    }
    return std::sqrt(s / static_cast<double>(m));
  };

  double h = (h_hint != nullptr && *h_hint > 0.0) ? *h_hint : 0.0;
  if (h <= 0.0) {
    const double d0 = scaled_norm(y, y);
    const double d1 = scaled_norm(k1.data(), y);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  }
  h = std::min(h, span);

  double t = t0;
  long long steps = 0;
  while (t < t1) {
    if (++steps > cfg.max_steps) throw HorizonError("rk45: step budget exceeded before t = " + std::to_string(t1));
    bool last = false;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(tmp.data(), k2.data());
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(tmp.data(), k3.data());
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(tmp.data(), k4.data());
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(tmp.data(), k5.data());
    for (std::size_t i = 0; i < m; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(tmp.data(), k6.data());
    for (std::size_t i = 0; i < m; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(ynew.data(), k7.data());

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < m; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
      finite = finite && std::isfinite(ynew[i]) && std::isfinite(ei);
    }
    if (!finite) {
      // Shrink before declaring blowup: a huge trial step can overflow on its own.
      h *= 0.1;
      if (h < 1e-14 * std::max(1.0, std::abs(t))) throw BlowupError("rk45: non-finite state at t = " + std::to_string(t));
      continue;
    }
    err = std::sqrt(err / static_cast<double>(m));
    if (err <= 1.0) {
      t = last ? t1 : t + h;
      std::copy(ynew.begin(), ynew.end(), y);
      std::swap(k1, k7);
      const double fac = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      if (!last && h_hint != nullptr) *h_hint = h * fac;
      if (last && h_hint != nullptr && *h_hint <= 0.0) *h_hint = h * fac;
      h *= fac;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (h < 1e-14 * std::max(1.0, std::abs(t))) throw BlowupError("rk45: step size underflow at t = " + std::to_string(t));
    }
  }
}

template <class Rhs>
void integrate(Rhs&& rhs, std::size_t m, double* y, const TimeSpan& span, const IntegratorConfig& cfg,
               double* h_hint = nullptr) {
  cfg.validate();
  if (span.t1 < span.t0) throw InvalidInput("integrate: t1 must not precede t0");
  check_finite(y, m, span.t0);
  if (span.t1 == span.t0) return;
  if (cfg.method == Method::rk4_fixed) {
    rk4_fixed(rhs, m, y, span.t0, span.t1, cfg);
  } else {
    dopri5(rhs, m, y, span.t0, span.t1, cfg, h_hint);
  }
}

// RHS of the augmented system; state layout [x (n), F (n×n, column-major)].
class AugmentedRhs {
 public:
  explicit AugmentedRhs(const VectorField& f) : f_(f), n_(f.dim()), jac_(n_ * n_) {}

  void operator()(const double* y, double* dy) {
    const auto n = static_cast<Eigen::Index>(n_);
    f_.eval(y, dy);
    f_.jacobian(y, jac_.data());
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> j(jac_.data(), n, n);
    Eigen::Map<const Mat> fm(y + n_, n, n);
    Eigen::Map<Mat> dfm(dy + n_, n, n);
    dfm.noalias() = j * fm;
  }

 private:
  const VectorField& f_;
  std::size_t n_;
  std::vector<double> jac_;
};

}  // namespace detail

// χ(t₁; x₀).
inline Vec solve_ivp(const VectorField& f, const Vec& x0, const TimeSpan& span, const IntegratorConfig& cfg = {},
                     double* h_hint = nullptr) {
  if (static_cast<std::size_t>(x0.size()) != f.dim()) throw DimensionError("solve_ivp: x0 has wrong dimension");
  Vec y = x0;
  detail::integrate([&f](const double* s, double* ds) { f.eval(s, ds); }, f.dim(), y.data(), span, cfg, h_hint);
  return y;
}

// Integrate the augmented system from (x₀, F₀).
inline AugmentedState integrate_augmented(const VectorField& f, const Vec& x0, const Mat& f0, const TimeSpan& span,
                                          const IntegratorConfig& cfg = {}, double* h_hint = nullptr) {
  const auto n = static_cast<Eigen::Index>(f.dim());
  if (x0.size() != n) throw DimensionError("integrate_augmented: x0 has wrong dimension");
  if (f0.rows() != n || f0.cols() != n) throw DimensionError("integrate_augmented: F0 has wrong shape");
  Vec y(n + n * n);
  y.head(n) = x0;
  Eigen::Map<Mat>(y.data() + n, n, n) = f0;
  detail::AugmentedRhs rhs(f);
  detail::integrate(rhs, static_cast<std::size_t>(y.size()), y.data(), span, cfg, h_hint);
  AugmentedState out;
  out.x = y.head(n);
  out.F = Eigen::Map<const Mat>(y.data() + n, n, n);
  return out;
}

// (χ(t₁; x₀), ∂χ(t₁; x₀)/∂x₀) with F(t₀) = I.
inline AugmentedState solve_augmented(const VectorField& f, const Vec& x0, const TimeSpan& span,
                                      const IntegratorConfig& cfg = {}, double* h_hint = nullptr) {
  const auto n = static_cast<Eigen::Index>(f.dim());
  return integrate_augmented(f, x0, Mat::Identity(n, n), span, cfg, h_hint);
}

// Positions at each of `times` (ascending, all ≥ t0), integrating once through them.
inline std::vector<Vec> trajectory(const VectorField& f, const Vec& x0, double t0, const std::vector<double>& times,
                                   const IntegratorConfig& cfg = {}) {
  std::vector<Vec> out;
  out.reserve(times.size());
  Vec x = x0;
  double t = t0;
  double hint = 0.0;
  for (double tj : times) {
    x = solve_ivp(f, x, {t, tj}, cfg, &hint);
    t = tj;
    out.push_back(x);
  }
  return out;
}

}  // namespace reach
