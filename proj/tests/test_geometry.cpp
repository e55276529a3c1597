#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support/oracles.hpp"

using namespace reach;

namespace {

Mat diag(std::initializer_list<double> v) {
  Vec d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

// Uniform point in the Euclidean ball via rejection from its bounding cube.
Vec sample_in_ball(std::mt19937_64& rng, const Vec& c, double r) {
  for (;;) {
    Vec y(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) y(i) = oracle::uniform_in(rng, -r, r);
    if (y.norm() <= r) return c + y;
  }
}

}  // namespace

// ---------------------------------------------------------------- metrics and ellipsoids

TEST(Metric, FactorAndInverseAreConsistent) {
  std::mt19937_64 rng(31);
  for (int n : {1, 2, 3, 5, 8}) {
    for (int k = 0; k < 10; ++k) {
      const Mat a = oracle::random_spd_factor(rng, n);
      const Metric m = Metric::from_matrix(a.transpose() * a);
      const double scale = m.matrix().cwiseAbs().maxCoeff();
      EXPECT_LE((m.factor().transpose() * m.factor() - m.matrix()).cwiseAbs().maxCoeff(), 1e-10 * scale);
      EXPECT_LE((m.factor() * m.factor_inverse() - Mat::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
      const Metric f = Metric::from_factor(a);
      EXPECT_LE((f.factor().transpose() * f.factor() - f.matrix()).cwiseAbs().maxCoeff(), 1e-10 * scale);
    }
  }
}

TEST(Metric, RejectsIndefiniteMatrices) {
  EXPECT_THROW(Metric::from_matrix(diag({1.0, -1.0})), Error);
  EXPECT_THROW(Metric::from_matrix(Mat::Zero(2, 2)), Error);
}

TEST(Ellipsoid, DistanceIsTheQuadraticForm) {
  std::mt19937_64 rng(32);
  const Mat a = oracle::random_spd_factor(rng, 3);
  const Ellipsoid e{Vec::Zero(3), Metric::from_factor(a), 1.0};
  for (int k = 0; k < 100; ++k) {
    const Vec x = Vec::Random(3);
    const double q = std::sqrt(x.dot(e.metric.matrix() * x));
    EXPECT_NEAR(e.distance(x), q, 1e-12 * std::max(1.0, q));
  }
}

TEST(OptimalMetric, Examples) {
  EXPECT_TRUE(optimal_metric(Mat::Identity(2, 2), Mat::Identity(2, 2)).matrix().isApprox(Mat::Identity(2, 2)));
  const Metric m = optimal_metric(diag({2.0, 0.5}), Mat::Identity(2, 2));
  EXPECT_LE((m.matrix() - diag({0.25, 4.0})).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(optimal_metric(Mat::Zero(2, 2), Mat::Identity(2, 2)), SingularError);
  EXPECT_THROW(optimal_metric(Mat::Identity(2, 2), Mat::Identity(3, 3)), DimensionError);
}

TEST(OptimalMetric, MinimizesVolumeAgainstRandomMetrics) {
  std::mt19937_64 rng(33);
  for (int n : {2, 3, 4}) {
    for (int k = 0; k < 100; ++k) {
      const Mat f = oracle::random_full_rank(rng, n);
      const Mat a0 = k % 2 == 0 ? Mat(Mat::Identity(n, n)) : oracle::random_spd_factor(rng, n);
      const Metric opt = optimal_metric(f, a0);
      const double best = oracle::ellipsoid_volume_for_metric(opt.factor(), f, a0, 0.01);
      for (int s = 0; s < 50; ++s) {
        const Mat a = oracle::random_spd_factor(rng, n);
        ASSERT_LE(best, oracle::ellipsoid_volume_for_metric(a, f, a0, 0.01) * (1 + 1e-9)) << "n=" << n;
      }
    }
  }
}

TEST(StretchingFactor, Examples) {
  const Metric e = Metric::euclidean(2);
  const double id = stretching_factor(IMatrix::identity(2), e, e);
  EXPECT_GE(id, 1.0);
  EXPECT_NEAR(id, 1.0, 1e-14);
  const Mat f = diag({3.0, 1.0});
  EXPECT_NEAR(stretching_factor(IMatrix::from(f), optimal_metric(f, Mat::Identity(2, 2)), e), 1.0, 1e-8);
}

TEST(StretchingFactor, OptimalMetricAbsorbsCenterGradient) {
  std::mt19937_64 rng(34);
  for (int n : {2, 3, 4}) {
    for (int k = 0; k < 20; ++k) {
      const Mat f = oracle::random_full_rank(rng, n);
      const Metric m0 = Metric::from_factor(oracle::random_spd_factor(rng, n));
      const Metric opt = optimal_metric(f, m0.factor());
      EXPECT_NEAR(stretching_factor(IMatrix::from(f), opt, m0), 1.0, 1e-8);
    }
  }
}

TEST(StretchingFactor, PointGradientMatchesClosedForm) {
  std::mt19937_64 rng(35);
  for (int k = 0; k < 20; ++k) {
    const Mat f = oracle::random_full_rank(rng, 3);
    const Metric m = Metric::from_factor(oracle::random_spd_factor(rng, 3));
    const Metric m0 = Metric::from_factor(oracle::random_spd_factor(rng, 3));
    // √λ_max(A₀⁻ᵀ Fᵀ M F A₀⁻¹)
    const Mat g = m0.factor_inverse().transpose() * f.transpose() * m.matrix() * f * m0.factor_inverse();
    const double closed = std::sqrt(Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().maxCoeff());
    const double lambda = stretching_factor(IMatrix::from(f), m, m0);
    EXPECT_GE(lambda, closed * (1 - 1e-12));
    EXPECT_NEAR(lambda, closed, 1e-8 * closed);
  }
}

TEST(StretchingFactor, WideningIncreasesFactor) {
  std::mt19937_64 rng(36);
  const Mat f = oracle::random_full_rank(rng, 3);
  const Metric m = optimal_metric(f, Mat::Identity(3, 3));
  const Metric e = Metric::euclidean(3);
  double prev = 0.0;
  for (double eps : {0.0, 1e-4, 1e-3, 1e-2, 1e-1}) {
    const double lambda =
        stretching_factor(IMatrix::from_bounds((f.array() - eps).matrix(), (f.array() + eps).matrix()), m, e);
    EXPECT_GT(lambda, prev);
    prev = lambda;
  }
}

// ---------------------------------------------------------------- boxes and volumes

TEST(IntersectionBox, Examples) {
  const Ellipsoid ball = Ellipsoid::ball(Vec::Zero(2), 1.0);
  const Box same = intersection_box(ball, ball);
  for (const auto& iv : same.intervals) {
    EXPECT_NEAR(iv.lo(), -1.0, 1e-14);
    EXPECT_NEAR(iv.hi(), 1.0, 1e-14);
    EXPECT_LE(iv.lo(), -1.0);
    EXPECT_GE(iv.hi(), 1.0);
  }
  const Ellipsoid e{Vec::Zero(2), Metric::from_matrix(diag({0.25, 4.0})), 1.0};
  const Box b = intersection_box(e, ball);
  EXPECT_NEAR(b.intervals[0].hi(), 1.0, 1e-14);
  EXPECT_NEAR(b.intervals[1].hi(), 0.5, 1e-14);
  EXPECT_NEAR(b.intervals[1].lo(), -0.5, 1e-14);
  EXPECT_THROW(intersection_box(e, Ellipsoid::ball(Vec::Ones(2), 1.0)), InvalidInput);
}

TEST(IntersectionBox, ContainsSampledIntersectionPoints) {
  std::mt19937_64 rng(37);
  for (int n : {2, 3}) {
    const Vec c = Vec::Random(n);
    const Ellipsoid e{c, Metric::from_factor(oracle::random_spd_factor(rng, n)), 0.5};
    const Ellipsoid ball = Ellipsoid::ball(c, 0.7);
    const Box box = intersection_box(e, ball);
    EXPECT_LE(box.volume(), std::min(box_volume(e.aabb()), box_volume(ball.aabb())));
    int accepted = 0;
    while (accepted < 10000) {
      const Vec x = sample_in_ball(rng, c, ball.radius);
      if (!e.contains(x)) continue;
      ++accepted;
      ASSERT_TRUE(box.contains(x));
    }
  }
}

TEST(Volume, Examples) {
  EXPECT_NEAR(ellipsoid_volume(Ellipsoid::ball(Vec::Zero(2), 1.0)), std::numbers::pi, 1e-14);
  EXPECT_NEAR(ellipsoid_volume(Ellipsoid::ball(Vec::Zero(3), 2.0)), 32 * std::numbers::pi / 3, 1e-13);
  const Ellipsoid e{Vec::Zero(2), Metric::from_matrix(diag({4.0, 1.0})), 1.0};
  EXPECT_NEAR(ellipsoid_volume(e), std::numbers::pi / 2, 1e-14);
  EXPECT_NEAR(unit_ball_volume(1), 2.0, 1e-15);
  EXPECT_NEAR(unit_ball_volume(4), std::numbers::pi * std::numbers::pi / 2, 1e-14);
}

// ---------------------------------------------------------------- sphere sampling

TEST(SphereSampling, PointsLieOnTheSphere) {
  const Vec c(Eigen::Vector3d(1, -2, 0.5));
  for (const auto& x : sample_sphere_surface(3, c, 0.3, 1000, 5)) {
    EXPECT_LE(std::abs((x - c).norm() - 0.3), 1e-12);
  }
}

TEST(SphereSampling, DeterministicPerSeedAndIndex) {
  const auto a = sample_sphere_surface(4, Vec::Zero(4), 1.0, 20, 9);
  const auto b = sample_sphere_surface(4, Vec::Zero(4), 1.0, 10, 9, 10);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a[10 + i], b[i]);
  EXPECT_NE(a[0], sample_sphere_surface(4, Vec::Zero(4), 1.0, 1, 10)[0]);
}

TEST(SphereSampling, AnglesAreUniformOnTheCircle) {
  constexpr int bins = 36;
  constexpr int count = 100000;
  std::vector<int> hist(bins, 0);
  for (const auto& x : sample_sphere_surface(2, Vec::Zero(2), 1.0, count, 77)) {
    const double a = std::atan2(x(1), x(0)) + std::numbers::pi;
    ++hist[std::min(bins - 1, static_cast<int>(a / (2 * std::numbers::pi) * bins))];
  }
  const double expect = static_cast<double>(count) / bins;
  double chi2 = 0.0;
  for (int h : hist) chi2 += (h - expect) * (h - expect) / expect;
  EXPECT_LT(chi2, 57.342);  // χ²(35) upper 1% point
}

TEST(SphereSampling, MeanIsCenterWithinClt) {
  constexpr int n = 3;
  constexpr int count = 100000;
  const Vec c(Eigen::Vector3d(0.5, 0.5, -1));
  Vec mean = Vec::Zero(n);
  for (const auto& x : sample_sphere_surface(n, c, 2.0, count, 78)) mean += x;
  mean /= count;
  const double sigma = 2.0 / std::sqrt(static_cast<double>(n) * count);  // per-coordinate variance r²/n
  for (int i = 0; i < n; ++i) EXPECT_LE(std::abs(mean(i) - c(i)), 3 * sigma);
}

TEST(SphereSampling, RejectsBadArguments) {
  EXPECT_THROW(sample_sphere_surface(0, Vec::Zero(0), 1.0, 1, 0), InvalidInput);
  EXPECT_THROW(sample_sphere_surface(2, Vec::Zero(2), 0.0, 1, 0), InvalidInput);
  EXPECT_THROW(sample_sphere_surface(2, Vec::Zero(2), 1.0, 0, 0), InvalidInput);
}

// ---------------------------------------------------------------- caps

TEST(CapFraction, Examples) {
  EXPECT_EQ(cap_surface_fraction(3, 1.0, 0.0), 0.0);
  EXPECT_EQ(cap_surface_fraction(3, 1.0, 2.0), 1.0);
  EXPECT_EQ(cap_surface_fraction(5, 0.1, 0.3), 1.0);
  EXPECT_NEAR(cap_surface_fraction(3, 1.0, 1.0), 0.25, 1e-10);
  EXPECT_THROW(cap_surface_fraction(3, 1.0, -0.1), DomainError);
}

TEST(CapFraction, MatchesTwoSphereClosedForm) {
  for (double rho : {0.01, 1.0, 3.0}) {
    for (double t = 0.0; t <= 2.0; t += 0.05) {
      EXPECT_NEAR(cap_surface_fraction(3, rho, t * rho), oracle::cap_fraction_n3(rho, t * rho), 1e-10);
    }
  }
}

TEST(CapFraction, MonotoneAndContinuousAtHemisphere) {
  for (int n = 2; n <= 8; ++n) {
    double prev = 0.0;
    for (double r = 0.0; r <= 2.0; r += 0.01) {
      const double f = cap_surface_fraction(n, 1.0, r);
      EXPECT_GE(f, prev) << n;
      prev = f;
    }
    const double half = std::sqrt(2.0);  // chord of θ = π/2
    EXPECT_NEAR(cap_surface_fraction(n, 1.0, half * (1 - 1e-12)), cap_surface_fraction(n, 1.0, half * (1 + 1e-12)),
                1e-9);
    EXPECT_NEAR(cap_surface_fraction(n, 1.0, half), 0.5, 1e-10);
  }
}

TEST(CapFraction, MatchesMonteCarloMembership) {
  for (int n = 2; n <= 8; ++n) {
    for (double chord : {0.7, 1.6}) {
      const auto mc = oracle::cap_fraction_mc(n, 1.0, chord, 1000000, 100 + n);
      EXPECT_LE(std::abs(cap_surface_fraction(n, 1.0, chord) - mc.mean), 3 * mc.stderr_) << "n=" << n;
    }
  }
}
