#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "reach/errors.hpp"
#include "reach/interval_matrix.hpp"
#include "reach/linalg.hpp"
#include "reach/metric.hpp"
#include "reach/special_functions.hpp"

namespace reach {

// B_M(c, δ) = {x : ‖x − c‖_M ≤ δ}.
struct Ellipsoid {
  Vec center;
  Metric metric;
  double radius = 0.0;

  Eigen::Index dim() const { return center.size(); }

  double distance(const Vec& x) const { return metric.norm(x - center); }
  bool contains(const Vec& x, double rel_tol = 0.0) const { return distance(x) <= radius * (1.0 + rel_tol); }

  // Half-widths of the axis-aligned bounding box: δ·sqrt((M⁻¹)_ii), with (M⁻¹)_ii = ‖row i of A⁻¹‖².
  Vec aabb_halfwidth() const {
    const Mat& ainv = metric.factor_inverse();
    Vec out(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      const double s = ainv.row(i).norm();
      out(i) = detail::nudge_up(radius * s * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()), 1);
    }
    return out;
  }

  IVector aabb() const {
    const Vec hw = aabb_halfwidth();
    IVector out(static_cast<std::size_t>(dim()));
    for (Eigen::Index i = 0; i < dim(); ++i) {
      out[static_cast<std::size_t>(i)] =
          Interval(detail::add_down(center(i), -hw(i)), detail::add_up(center(i), hw(i)));
    }
    return out;
  }

  static Ellipsoid ball(const Vec& center, double radius) {
    return {center, Metric::euclidean(center.size()), radius};
  }
};

struct Box {
  IVector intervals;

  std::size_t dim() const { return intervals.size(); }
  bool contains(const Vec& x) const { return intervals.contains(x); }

  double volume() const {
    double v = 1.0;
    for (const auto& iv : intervals) v *= iv.width();
    return v;
  }
};

inline double box_volume(const IVector& b) { return Box{b}.volume(); }

// Volume of the n-dimensional unit ball, π^{n/2}/Γ(n/2 + 1).
inline double unit_ball_volume(int n) {
  if (n < 1) throw InvalidInput("unit_ball_volume: dimension must be positive");
  const double h = 0.5 * n;
  return std::exp(h * std::log(std::numbers::pi) - std::lgamma(h + 1.0));
}

inline double ball_volume(int n, double radius) { return unit_ball_volume(n) * std::pow(radius, n); }

// c_n δⁿ / sqrt(det M) = c_n δⁿ / |det A|.
inline double ellipsoid_volume(const Ellipsoid& e) {
  const auto n = static_cast<int>(e.dim());
  const double det_a = std::abs(e.metric.factor().determinant());
  if (!(det_a > 0.0)) throw SingularError("ellipsoid_volume: degenerate metric");
  return ball_volume(n, e.radius) / det_a;
}

// Metric Â = A₀ F⁻¹ minimizing the volume of the ellipsoid that bounds the image of B_{M₀}.
inline Metric optimal_metric(const Mat& f_center, const Mat& a0) {
  if (f_center.rows() != f_center.cols() || a0.rows() != f_center.rows() || a0.cols() != f_center.cols()) {
    throw DimensionError("optimal_metric: shape mismatch");
  }
  if (!f_center.allFinite()) throw BlowupError("optimal_metric: non-finite gradient");
  Eigen::FullPivLU<Mat> lu(f_center);
  if (!lu.isInvertible() || std::abs(f_center.determinant()) <= 1e-12) {
    throw SingularError("optimal_metric: center gradient is singular");
  }
  return Metric::from_factor(a0 * lu.inverse());
}

// Λ ≥ ‖[F]‖ from the M₀ ball to the given metric.
inline double stretching_factor(const IMatrix& f, const Metric& metric, const Metric& m0) {
  return spectral_norm_upper_bound(f, metric, m0);
}

// AABB(ellipsoid) ∩ AABB(ball); both must share a center.
inline Box intersection_box(const Ellipsoid& ellipsoid, const Ellipsoid& ball) {
  if (ellipsoid.dim() != ball.dim()) throw DimensionError("intersection_box: dimension mismatch");
  if (!(ellipsoid.center - ball.center).isZero(0.0)) throw InvalidInput("intersection_box: centers differ");
  return Box{intersect(ellipsoid.aabb(), ball.aabb())};
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Generator for sample `index` under `seed`; independent of how indices are sharded.
inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(detail::splitmix64(detail::splitmix64(seed) ^ detail::splitmix64(~index)));
}

// Standard normal via Box–Muller, so the stream is identical across standard libraries.
inline double standard_normal(std::mt19937_64& rng) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;          // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Uniform point on the sphere of the given radius around center, for sample `index`.
inline Vec sample_sphere_point(const Vec& center, double radius, std::uint64_t seed, std::uint64_t index) {
  const Eigen::Index n = center.size();
  auto rng = sample_rng(seed, index);
  Vec g(n);
  double norm = 0.0;
  while (!(norm > 1e-150)) {
    for (Eigen::Index i = 0; i < n; ++i) g(i) = standard_normal(rng);
    norm = g.norm();
  }
  return center + (radius / norm) * g;
}

inline std::vector<Vec> sample_sphere_surface(int n, const Vec& center, double radius, std::size_t count,
                                              std::uint64_t seed, std::uint64_t first_index = 0) {
  if (n < 1) throw InvalidInput("sample_sphere_surface: dimension must be positive");
  if (center.size() != n) throw DimensionError("sample_sphere_surface: center has wrong dimension");
  if (!(radius > 0.0)) throw InvalidInput("sample_sphere_surface: radius must be positive");
  if (count < 1) throw InvalidInput("sample_sphere_surface: count must be positive");
  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_sphere_point(center, radius, seed, first_index + i));
  return out;
}

// Fraction of the sphere of radius ρ covered by B(x, r) for x on the sphere (r a chord length).
inline double cap_surface_fraction(int n, double sphere_radius, double cap_chord_radius) {
  if (n < 1) throw InvalidInput("cap_surface_fraction: dimension must be positive");
  if (!(sphere_radius > 0.0)) throw InvalidInput("cap_surface_fraction: sphere radius must be positive");
  if (std::isnan(cap_chord_radius) || cap_chord_radius < 0.0) throw DomainError("cap_surface_fraction: negative radius");
  if (cap_chord_radius == 0.0) return 0.0;
  const double ratio = cap_chord_radius / (2.0 * sphere_radius);
  if (ratio >= 1.0) return 1.0;
  const double theta = 2.0 * std::asin(ratio);
  if (n == 1) return 0.5;  // the 0-sphere: one of two points
  const double a = 0.5 * (n - 1);
  if (theta <= 0.5 * std::numbers::pi) {
    const double s = std::sin(theta);
    return 0.5 * incomplete_beta(s * s, a, 0.5);
  }
  const double s = std::sin(std::numbers::pi - theta);
  return 1.0 - 0.5 * incomplete_beta(s * s, a, 0.5);
}

}  // namespace reach
