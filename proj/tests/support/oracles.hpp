#pragma once

// Independent reference computations shared by the unit tests and the acceptance run.
// None of these call into the library code they are used to check.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "reach/reach.hpp"

namespace oracle {

using reach::Interval;
using reach::Mat;
using reach::Vec;
using hp = boost::multiprecision::cpp_bin_float_50;

// ---------------------------------------------------------------- interval ops

struct OpReport {
  std::size_t checks = 0;
  std::size_t point_violations = 0;  // sampled exact result outside the returned interval
  std::size_t image_violations = 0;  // returned interval narrower than the exact image
};

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  std::uniform_real_distribution<double> u(lo, hi);
  const double v = u(rng);
  return std::min(std::max(v, lo), hi);
}

inline Interval random_interval(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  const double c = u(rng);
  const double kind = w(rng);
  if (kind < 0.1) return Interval(c);  // point intervals exercise the degenerate paths
  const double r = scale * std::pow(10.0, -6.0 * w(rng));
  return Interval(c - r, c + r);
}

// Sample point: an endpoint one time in four, otherwise interior.
inline double sample_point(std::mt19937_64& rng, const Interval& x) {
  const auto k = rng() % 8;
  if (k == 0) return x.lo();
  if (k == 1) return x.hi();
  return uniform_in(rng, x.lo(), x.hi());
}

inline bool contains_hp(const Interval& r, const hp& v) { return hp(r.lo()) <= v && v <= hp(r.hi()); }

inline hp hp_pi() { return boost::math::constants::pi<hp>(); }

// Does [lo, hi] contain some offset + k·period (exactly, in 50 digits)?
inline bool hp_contains_lattice(const Interval& x, const hp& offset, const hp& period) {
  const hp k = ceil((hp(x.lo()) - offset) / period);
  return offset + k * period <= hp(x.hi());
}

// Containment of 10⁵-scale random point checks per elementary operation, against
// 50-digit evaluation of the same operation. Also checks the returned interval covers
// the exact image computed from endpoints and interior critical points.
inline std::map<std::string, OpReport> interval_containment_suite(std::size_t checks_per_op, std::uint64_t seed) {
  std::map<std::string, OpReport> out;
  std::mt19937_64 rng(seed);
  using Unary = std::function<Interval(const Interval&)>;
  using UnaryHp = std::function<hp(const hp&)>;
  using Binary = std::function<Interval(const Interval&, const Interval&)>;
  using BinaryHp = std::function<hp(const hp&, const hp&)>;

  auto run_binary = [&](const std::string& name, const Binary& op, const BinaryHp& exact, bool nonzero_b,
                        double scale) {
    OpReport& rep = out[name];
    const std::size_t per_pair = 10;
    while (rep.checks < checks_per_op) {
      const Interval a = random_interval(rng, scale);
      Interval b = random_interval(rng, scale);
      if (nonzero_b && b.contains(0.0)) continue;
      const Interval r = op(a, b);
      hp lo = exact(hp(a.lo()), hp(b.lo()));
      hp hi = lo;
      for (double x : {a.lo(), a.hi()})
        for (double y : {b.lo(), b.hi()}) {
          const hp v = exact(hp(x), hp(y));
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      if (!(hp(r.lo()) <= lo && hi <= hp(r.hi()))) ++rep.image_violations;
      for (std::size_t k = 0; k < per_pair; ++k) {
        const hp v = exact(hp(sample_point(rng, a)), hp(sample_point(rng, b)));
        if (!contains_hp(r, v)) ++rep.point_violations;
        ++rep.checks;
      }
    }
  };

  // `critical` lists interior points whose images belong to the exact range.
  auto run_unary = [&](const std::string& name, const Unary& op, const UnaryHp& exact, double scale,
                       const std::function<std::vector<hp>(const Interval&)>& critical) {
    OpReport& rep = out[name];
    const std::size_t per_interval = 10;
    while (rep.checks < checks_per_op) {
      const Interval a = random_interval(rng, scale);
      const Interval r = op(a);
      hp lo = exact(hp(a.lo()));
      hp hi = lo;
      std::vector<hp> pts{hp(a.hi())};
      if (critical) {
        for (const hp& c : critical(a)) pts.push_back(c);
      }
      for (const hp& p : pts) {
        const hp v = exact(p);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(hp(r.lo()) <= lo && hi <= hp(r.hi()))) ++rep.image_violations;
      for (std::size_t k = 0; k < per_interval; ++k) {
        if (!contains_hp(r, exact(hp(sample_point(rng, a))))) ++rep.point_violations;
        ++rep.checks;
      }
    }
  };

  run_binary("add", [](auto& a, auto& b) { return a + b; }, [](const hp& x, const hp& y) { return x + y; }, false, 1e3);
  run_binary("sub", [](auto& a, auto& b) { return a - b; }, [](const hp& x, const hp& y) { return x - y; }, false, 1e3);
  run_binary("mul", [](auto& a, auto& b) { return a * b; }, [](const hp& x, const hp& y) { return x * y; }, false, 1e3);
  run_binary("div", [](auto& a, auto& b) { return a / b; }, [](const hp& x, const hp& y) { return x / y; }, true, 1e3);

  auto zero_if_inside = [](const Interval& a) {
    return a.contains(0.0) ? std::vector<hp>{hp(0)} : std::vector<hp>{};
  };
  auto trig_critical = [](const hp& offset) {
    return [offset](const Interval& a) {
      std::vector<hp> pts;
      const hp pi = hp_pi();
      hp k = ceil((hp(a.lo()) - offset) / pi);
      for (hp p = offset + k * pi; p <= hp(a.hi()) && pts.size() < 8; p += pi) pts.push_back(p);
      return pts;
    };
  };

  run_unary("neg", [](const Interval& a) { return -a; }, [](const hp& x) { return -x; }, 1e3, nullptr);
  run_unary("exp", [](const Interval& a) { return reach::exp(a); }, [](const hp& x) { return exp(x); }, 30.0, nullptr);
  run_unary("tanh", [](const Interval& a) { return reach::tanh(a); }, [](const hp& x) { return tanh(x); }, 5.0, nullptr);
  run_unary("sin", [](const Interval& a) { return reach::sin(a); }, [](const hp& x) { return sin(x); }, 10.0,
            trig_critical(hp_pi() / 2));
  run_unary("cos", [](const Interval& a) { return reach::cos(a); }, [](const hp& x) { return cos(x); }, 10.0,
            trig_critical(hp(0)));
  run_unary("sqr", [](const Interval& a) { return reach::sqr(a); }, [](const hp& x) { return x * x; }, 1e3,
            zero_if_inside);
  for (int n : {3, 4, 5}) {
    run_unary("pow" + std::to_string(n), [n](const Interval& a) { return reach::pow(a, n); },
              [n](const hp& x) { return pow(x, n); }, 20.0, zero_if_inside);
  }
  return out;
}

// ---------------------------------------------------------------- flows

// Central differences of the flow map x0 ↦ χ(t, x0), integrated at tight tolerance.
inline Mat fd_flow_jacobian(const reach::VectorField& f, const Vec& x0, double t, double h = 1e-5) {
  const auto n = x0.size();
  const auto cfg = reach::IntegratorConfig::adaptive(1e-12, 1e-12);
  Mat j(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Vec xp = x0;
    Vec xm = x0;
    xp(k) += h;
    xm(k) -= h;
    j.col(k) = (reach::solve_ivp(f, xp, {0.0, t}, cfg) - reach::solve_ivp(f, xm, {0.0, t}, cfg)) / (2.0 * h);
  }
  return j;
}

// e^{At} by Eigen's Padé scaling-and-squaring (separate code from the ODE solvers).
inline Mat expm(const Mat& a, double t) { return Mat(a * t).exp(); }

// Random stable matrix: a random orthogonal similarity of a block with negative spectrum.
inline Mat random_stable(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  const Eigen::EigenSolver<Mat> es(m);
  const double shift = es.eigenvalues().real().maxCoeff() + 0.5;
  return m - shift * Mat::Identity(n, n);
}

// ---------------------------------------------------------------- statistics

inline double t_density(double x, double nu) {
  const double c = std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) / std::sqrt(nu * M_PI);
  return c * std::pow(1.0 + x * x / nu, -0.5 * (nu + 1.0));
}

// Upper tail P(T > q) by adaptive Gauss–Kronrod quadrature of the density on [0, q].
inline double t_upper_tail(double q, double nu) {
  using boost::math::quadrature::gauss_kronrod;
  const double mass = gauss_kronrod<double, 61>::integrate([nu](double x) { return t_density(x, nu); }, 0.0, q, 15, 1e-15);
  return 0.5 - mass;
}

// q with P(T > q) = p, by bracketing root search on the quadrature tail.
inline double t_quantile(double p, int dof) {
  const double nu = dof;
  double hi = 1.0;
  while (t_upper_tail(hi, nu) > p) hi *= 2.0;
  auto fn = [&](double q) { return t_upper_tail(q, nu) - p; };
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(fn, 0.0, hi, tol, iters);
  return 0.5 * (r.first + r.second);
}

// ---------------------------------------------------------------- spheres

// Surface fraction of {y on the 2-sphere of radius R : ‖y − x‖ ≤ r} = r²/(4R²).
inline double cap_fraction_n3(double sphere_radius, double chord) {
  const double r = std::min(chord, 2.0 * sphere_radius);
  return r * r / (4.0 * sphere_radius * sphere_radius);
}

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Monte Carlo cap fraction with Gaussian-normalized sphere points (own RNG path).
inline McEstimate cap_fraction_mc(int n, double sphere_radius, double chord, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vec pole = Vec::Zero(n);
  pole(0) = sphere_radius;
  std::size_t hits = 0;
  Vec y(n);
  for (std::size_t k = 0; k < count; ++k) {
    for (int i = 0; i < n; ++i) y(i) = g(rng);
    y *= sphere_radius / y.norm();
    if ((y - pole).norm() <= chord) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(count);
  return {p, std::sqrt(std::max(p * (1.0 - p), 1e-300) / static_cast<double>(count))};
}

// ---------------------------------------------------------------- metrics

// Random SPD metric factor: A = Q·diag(s) with log-uniform s.
inline Mat random_spd_factor(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  const Mat q = Eigen::HouseholderQR<Mat>(m).householderQ();
  Vec s(n);
  for (int i = 0; i < n; ++i) s(i) = std::pow(10.0, u(rng));
  return s.asDiagonal() * q.transpose();
}

inline Mat random_full_rank(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = g(rng);
    if (std::abs(m.determinant()) > 1e-3) return m;
  }
}

// Volume of {x : ‖A(x − c)‖ ≤ Λδ} with Λ = σ_max(A F A0⁻¹) for a point gradient F:
// the closed-form stretching factor and the ellipsoid volume, via the SVD.
inline double ellipsoid_volume_for_metric(const Mat& a, const Mat& f, const Mat& a0, double delta0) {
  const int n = static_cast<int>(a.rows());
  const Eigen::JacobiSVD<Mat> svd(a * f * a0.inverse());
  const double lambda = svd.singularValues()(0);
  const double unit = std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
  return unit * std::pow(lambda * delta0, n) / std::abs(a.determinant());
}

}  // namespace oracle
