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

StochasticConfig config(VectorFieldPtr f, Vec x0, double delta0, double horizon, double dt) {
  StochasticConfig c;
  c.field = std::move(f);
  c.x0 = std::move(x0);
  c.delta0 = delta0;
  c.horizon = horizon;
  c.dt = dt;
  c.mu = 1.1;
  c.gamma = 0.05;
  c.batch_size = 100;
  c.max_samples = 20000;
  c.seed = 7;
  return c;
}

SampleRecord record_at(const Vec& x, double lambda) {
  SampleRecord r;
  r.x0_sample = x;
  r.lambda_x = lambda;
  return r;
}

}  // namespace

// ---------------------------------------------------------------- building blocks

TEST(Distance, Examples) {
  const Metric e = Metric::euclidean(2);
  EXPECT_EQ(distance(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2), e), 0.0);
  EXPECT_DOUBLE_EQ(distance(Eigen::Vector2d(3, 4), Eigen::Vector2d(0, 0), e), 5.0);
  EXPECT_NEAR(distance(Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 0), Metric::from_matrix(diag({4, 1}))),
              std::sqrt(5.0), 1e-15);
  EXPECT_THROW(distance(Eigen::Vector2d(1, 1), Eigen::Vector3d(0, 0, 0), e), DimensionError);
}

TEST(LocalLipschitz, Examples) {
  const Metric e = Metric::euclidean(2);
  EXPECT_NEAR(local_lipschitz(Mat::Identity(2, 2), e, e), 1.0, 1e-15);
  EXPECT_NEAR(local_lipschitz(diag({2, 0.5}), e, e), 2.0, 1e-15);
  Mat bad = Mat::Identity(2, 2);
  bad(0, 1) = NAN;
  EXPECT_THROW(local_lipschitz(bad, e, e), BlowupError);
}

TEST(LocalLipschitz, MatchesSvdOracle) {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 20; ++k) {
    const Mat f = oracle::random_full_rank(rng, 4);
    const Metric e = Metric::euclidean(4);
    EXPECT_NEAR(local_lipschitz(f, e, e), Eigen::JacobiSVD<Mat>(f).singularValues()(0), 1e-9);
    const Metric r = Metric::from_factor(oracle::random_spd_factor(rng, 4));
    const Metric d = Metric::from_factor(oracle::random_spd_factor(rng, 4));
    const double svd = Eigen::JacobiSVD<Mat>(r.factor() * f * d.factor_inverse()).singularValues()(0);
    EXPECT_NEAR(local_lipschitz(f, r, d), svd, 1e-9 * std::max(1.0, svd));
  }
}

TEST(StudentT, Examples) {
  for (int dof : {1, 2, 7, 100}) EXPECT_EQ(student_t_quantile(0.5, dof), 0.0);
  EXPECT_NEAR(student_t_quantile(0.025, 10), 2.228, 1e-3);
  EXPECT_THROW(student_t_quantile(0.1, 0), DomainError);
  EXPECT_THROW(student_t_quantile(0.0, 3), DomainError);
}

TEST(StudentT, MatchesQuadratureOracle) {
  for (double p : {0.4, 0.1, 0.025, 0.005}) {
    for (int dof : {1, 2, 5, 10, 30, 100}) {
      const double q = student_t_quantile(p, dof);
      EXPECT_NEAR(q, oracle::t_quantile(p, dof), 1e-6) << p << " " << dof;
      EXPECT_NEAR(oracle::t_upper_tail(q, dof), p, 1e-8) << p << " " << dof;
    }
  }
}

TEST(StudentT, DecreasingInDof) {
  for (double p : {0.4, 0.1, 0.025, 0.005}) {
    double prev = INFINITY;
    for (int dof = 1; dof <= 200; ++dof) {
      const double q = student_t_quantile(p, dof);
      EXPECT_LT(q, prev);
      prev = q;
    }
  }
}

TEST(DeltaLambda, ConstantLambdaGivesZero) {
  std::vector<SampleRecord> recs;
  for (const auto& x : sample_sphere_surface(3, Vec::Zero(3), 1.0, 50, 1)) recs.push_back(record_at(x, 1.7));
  const CapStatistics s = delta_lambda(recs, 0.05);
  EXPECT_EQ(s.delta_lambda, 0.0);
  EXPECT_EQ(s.nu_mean, 0.0);
  EXPECT_EQ(s.N, 50u);
  EXPECT_EQ(s.nu_samples.size(), 49u);
}

TEST(DeltaLambda, LinearFlowGivesZero) {
  std::mt19937_64 rng(42);
  const auto f = make_linear(oracle::random_stable(rng, 3));
  const Metric e = Metric::euclidean(3);
  std::vector<SampleRecord> recs;
  for (const auto& x : sample_sphere_surface(3, Vec::Ones(3), 0.1, 20, 2)) {
    const AugmentedState s = solve_augmented(*f, x, {0.0, 1.0});
    recs.push_back(record_at(x, local_lipschitz(s.F, e, e)));
  }
  EXPECT_NEAR(delta_lambda(recs, 0.05).delta_lambda, 0.0, 1e-6);
}

TEST(DeltaLambda, Errors) {
  std::vector<SampleRecord> two{record_at(Eigen::Vector2d(1, 0), 1), record_at(Eigen::Vector2d(0, 1), 2)};
  EXPECT_THROW(delta_lambda(two, 0.05), InvalidInput);
  std::vector<SampleRecord> same(5, record_at(Eigen::Vector2d(1, 0), 1));
  EXPECT_THROW(delta_lambda(same, 0.05), DomainError);
  two.push_back(record_at(Eigen::Vector2d(-1, 0), 3));
  EXPECT_THROW(delta_lambda(two, 1.0), InvalidInput);
}

TEST(DeltaLambda, UpperBoundsMeanVariationUnderResampling) {
  // λ(x) = c·x₁ on the unit circle: ν = c·|sin((θ+φ)/2)| for angles θ, φ, so E ν = 2c/π.
  const double c = 3.0;
  const double gamma = 0.05;
  const double expect = 2.0 * c / std::numbers::pi;
  int covered = 0;
  constexpr int reps = 1000;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<SampleRecord> recs;
    for (const auto& x : sample_sphere_surface(2, Vec::Zero(2), 1.0, 100, 1000 + rep)) {
      recs.push_back(record_at(x, c * x(0)));
    }
    const CapStatistics s = delta_lambda(recs, gamma);
    EXPECT_GE(s.delta_lambda, s.nu_mean);
    if (s.delta_lambda >= expect) ++covered;
  }
  EXPECT_GE(covered, static_cast<int>((1.0 - gamma) * reps));
}

TEST(CapRadius, Examples) {
  EXPECT_EQ(cap_radius_gotube(2.0, 0.3, 1.1, 1.0, 1.1), 0.0);
  EXPECT_DOUBLE_EQ(cap_radius_gotube(2.0, 0.0, 1.1, 10.0, 10.0), 0.5);  // slack 1
  EXPECT_NEAR(cap_radius_gotube(2.0, 1e-8, 1.1, 10.0, 10.0), 0.5, 1e-8);
  EXPECT_EQ(cap_radius_gotube(0.0, 0.0, 1.1, 1.0, 0.5), INFINITY);
  EXPECT_THROW(cap_radius_gotube(1.0, 0.1, 1.1, 1.0, 1.2), InvalidInput);
  EXPECT_THROW(cap_radius_gotube(-1.0, 0.1, 1.1, 1.0, 1.0), InvalidInput);
}

TEST(CapRadius, SolvesTheQuadratic) {
  std::mt19937_64 rng(43);
  for (int k = 0; k < 10000; ++k) {
    const double lambda = oracle::uniform_in(rng, 0.0, 10.0);
    const double dl = std::pow(10.0, oracle::uniform_in(rng, -6.0, 3.0));
    const double m_bar = oracle::uniform_in(rng, 0.1, 2.0);
    const double dist = oracle::uniform_in(rng, 0.0, m_bar);
    const double r = cap_radius_gotube(lambda, dl, 1.1, m_bar, dist);
    const double slack = 1.1 * m_bar - dist;
    ASSERT_LE(std::abs(lambda * r + dl * r * r - slack), 1e-10 * std::max(1.0, slack));
  }
}

TEST(CapRadius, DecreasingInDistanceAndLambda) {
  for (double dl : {0.0, 0.5, 5.0}) {
    double prev = INFINITY;
    for (double d = 0.0; d <= 1.1; d += 0.01) {
      const double r = cap_radius_gotube(1.5, dl, 1.1, 1.0, std::min(d, 1.1));
      EXPECT_LE(r, prev);
      prev = r;
    }
    prev = INFINITY;
    for (double lambda = 0.01; lambda <= 10.0; lambda *= 1.2) {
      const double r = cap_radius_gotube(lambda, dl, 1.1, 1.0, 0.7);
      EXPECT_LT(r, prev);
      prev = r;
    }
  }
}

TEST(SafetyRadius, Examples) {
  EXPECT_EQ(safety_radius_slr(3.0, 1.1, 1.0, 1.1), 0.0);
  EXPECT_DOUBLE_EQ(safety_radius_slr(4.0, 1.5, 4.0, 4.0), 0.5);
  EXPECT_THROW(safety_radius_slr(0.0, 1.1, 1.0, 0.5), InvalidInput);
}

TEST(SafetyRadius, CapPointsStayInsideTheBound) {
  const auto f = make_linear(diag({-1.0, -0.5}));
  const double delta0 = 0.1;
  const Vec x0 = Vec::Zero(2);
  const double t = 1.0;
  const auto flow = solve_interval_augmented(*f, IVector::around(x0, Vec::Constant(2, delta0)), IMatrix::identity(2),
                                             {0.0, t}, IntegratorConfig::fixed(0.01));
  const double lambda = interval_norm_upper_bound(flow.second);
  const Vec center = solve_ivp(*f, x0, {0.0, t});
  double m_bar = 0.0;
  const auto samples = sample_sphere_surface(2, x0, delta0, 50, 11);
  for (const auto& x : samples) m_bar = std::max(m_bar, (solve_ivp(*f, x, {0.0, t}) - center).norm());
  const double mu = 1.1;
  for (int s = 0; s < 5; ++s) {
    const Vec& x = samples[s];
    const double r = safety_radius_slr(lambda, mu, m_bar, (solve_ivp(*f, x, {0.0, t}) - center).norm());
    ASSERT_GT(r, 0.0);
    int inside = 0;
    std::uint64_t index = 0;
    while (inside < 1000) {
      const Vec y = sample_sphere_point(x0, delta0, 12, index++);
      if ((y - x).norm() > r) continue;
      ++inside;
      ASSERT_LE((solve_ivp(*f, y, {0.0, t}) - center).norm(), mu * m_bar);
    }
  }
}

TEST(ComputeProbability, Examples) {
  EXPECT_EQ(compute_probability({}, 3, 1.0), 0.0);
  EXPECT_EQ(compute_probability({INFINITY}, 3, 1.0), 1.0);
  EXPECT_EQ(compute_probability({0.1, 2.0}, 3, 1.0), 1.0);
  EXPECT_NEAR(compute_probability({1.0, 1.0}, 3, 1.0), 0.4375, 1e-12);
  EXPECT_NEAR(compute_probability(std::vector<double>(5, 0.1), 3, 1.0), 1 - std::pow(1 - 0.0025, 5), 1e-12);
}

TEST(DistanceGradient, ZeroFieldHasNoAscentDirection) {
  const auto f = make_linear(Mat::Zero(3, 3));
  const Vec x0(Eigen::Vector3d(1, 2, 3));
  for (const auto& x : sample_sphere_surface(3, x0, 0.5, 20, 3)) {
    SampleRecord r;
    r.x0_sample = x;
    r.chi = solve_ivp(*f, x, {0.0, 1.0});
    r.F = Mat::Identity(3, 3);
    EXPECT_LE(distance_gradient(r, x0, x0, Metric::euclidean(3)).norm(), 1e-15);
  }
}

TEST(DistanceGradient, AscentFindsMajorAxis) {
  const Mat f = diag({2.0, 1.0});
  const Metric e = Metric::euclidean(2);
  for (std::uint64_t k = 0; k < 10; ++k) {
    Vec x = sample_sphere_point(Vec::Zero(2), 1.0, 4, k);
    if (std::abs(x(1)) > 0.999) continue;  // a saddle of the distance on the circle
    for (int it = 0; it < 500; ++it) {
      SampleRecord r;
      r.x0_sample = x;
      r.chi = f * x;
      r.F = f;
      x += 0.05 * distance_gradient(r, Vec::Zero(2), Vec::Zero(2), e);
      x.normalize();
    }
    EXPECT_LT(std::acos(std::min(1.0, std::abs(x(0)))), 1e-3);
  }
}

TEST(DistanceGradient, MatchesFiniteDifferencesOnVanDerPol) {
  const auto f = model_registry("vanderpol");
  const Vec x0(Eigen::Vector2d(1.4, 2.4));
  const double delta0 = 0.1;
  const double t = 0.5;
  const auto cfg = IntegratorConfig::adaptive(1e-12, 1e-12);
  const Vec center = solve_ivp(*f, x0, {0.0, t}, cfg);
  auto dist = [&](const Vec& y) { return (solve_ivp(*f, y, {0.0, t}, cfg) - center).norm(); };
  for (std::uint64_t k = 0; k < 2; ++k) {
    const Vec x = sample_sphere_point(x0, delta0, 5, k);
    const AugmentedState s = solve_augmented(*f, x, {0.0, t}, cfg);
    SampleRecord r;
    r.x0_sample = x;
    r.chi = s.x;
    r.F = s.F;
    const Vec g = distance_gradient(r, center, x0, Metric::euclidean(2));
    const Vec radial = (x - x0).normalized();
    const Vec tangent(Eigen::Vector2d(-radial(1), radial(0)));
    const double h = 1e-6;
    const double fd = (dist(x + h * tangent) - dist(x - h * tangent)) / (2 * h);
    EXPECT_NEAR(g.dot(tangent), fd, 1e-4 * g.norm());
    EXPECT_NEAR(g.dot(radial), 0.0, 1e-12 * g.norm());
  }
}

// ---------------------------------------------------------------- engines

TEST(GoTube, ZeroFieldRadiusIsMuDelta) {
  StochasticConfig c = config(make_linear(Mat::Zero(2, 2)), Eigen::Vector2d(1, 1), 0.1, 1.0, 0.1);
  const StochasticResult r = gotube_run(c);
  ASSERT_EQ(r.status, RunStatus::ok);
  ASSERT_EQ(r.steps.size(), 10u);
  for (const auto& st : r.steps) {
    EXPECT_NEAR(st.m_bar, 0.1, 1e-15);
    EXPECT_EQ(st.radius, c.mu * st.m_bar);
    EXPECT_EQ(st.samples_used, c.batch_size);
    EXPECT_GE(st.achieved_confidence, 1 - c.gamma);
  }
}

TEST(GoTube, ContractiveRadiusIsClosedForm) {
  StochasticConfig c = config(make_linear(-Mat::Identity(2, 2)), Eigen::Vector2d(1, -1), 0.1, 2.0, 0.1);
  const StochasticResult r = gotube_run(c);
  ASSERT_EQ(r.status, RunStatus::ok);
  for (const auto& st : r.steps) {
    const double exact = c.mu * c.delta0 * std::exp(-st.time);
    EXPECT_NEAR(st.radius, exact, 1e-6 * exact);
  }
}

TEST(Slr, ZeroFieldMatchesGoTube) {
  StochasticConfig c = config(make_linear(Mat::Zero(2, 2)), Eigen::Vector2d(1, 1), 0.1, 1.0, 0.1);
  c.engine = Engine::slr;
  const StochasticResult r = slr_run(c);
  ASSERT_EQ(r.status, RunStatus::ok);
  for (const auto& st : r.steps) EXPECT_NEAR(st.radius, c.mu * c.delta0, 1e-15);
}

TEST(Slr, ContractiveRadiusIsClosedForm) {
  StochasticConfig c = config(make_linear(-Mat::Identity(2, 2)), Eigen::Vector2d(1, -1), 0.1, 2.0, 0.1);
  c.engine = Engine::slr;
  const StochasticResult r = slr_run(c);
  ASSERT_EQ(r.status, RunStatus::ok);
  for (const auto& st : r.steps) {
    const double exact = c.mu * c.delta0 * std::exp(-st.time);
    EXPECT_NEAR(st.radius, exact, 1e-5 * exact);
  }
}

TEST(Engines, ConfidenceIsMonotoneWithinAStep) {
  for (Engine engine : {Engine::gotube, Engine::slr}) {
    StochasticConfig c = config(make_linear(-Mat::Identity(3, 3)), Vec::Zero(3), 0.1, 1.0, 0.25);
    c.engine = engine;
    c.gamma = 0.01;
    c.batch_size = 20;
    const StochasticResult r = stochastic_run(c);
    ASSERT_EQ(r.status, RunStatus::ok) << to_string(engine);
    for (const auto& st : r.steps) {
      ASSERT_FALSE(st.confidence_trace.empty());
      for (std::size_t i = 1; i < st.confidence_trace.size(); ++i) {
        EXPECT_GE(st.confidence_trace[i], st.confidence_trace[i - 1]) << to_string(engine);
      }
      EXPECT_EQ(st.confidence_trace.back(), st.achieved_confidence);
    }
  }
}

TEST(Engines, RadiusIsMuTimesSampleMaximum) {
  for (Engine engine : {Engine::gotube, Engine::slr}) {
    StochasticConfig c = config(model_registry("brusselator"), Eigen::Vector2d(1, 1), 0.01, 1.0, 0.1);
    c.engine = engine;
    const StochasticResult r = stochastic_run(c);
    ASSERT_EQ(r.status, RunStatus::ok);
    for (const auto& st : r.steps) {
      EXPECT_EQ(st.radius, c.mu * st.m_bar);
      EXPECT_GE(st.achieved_confidence, 1 - c.gamma);
    }
  }
}

TEST(GoTube, OwnSamplesLieWithinSampleMaximum) {
  StochasticConfig c = config(model_registry("vanderpol"), Eigen::Vector2d(1.4, 2.4), 0.01, 2.0, 0.1);
  const StochasticResult r = gotube_run(c);
  ASSERT_EQ(r.status, RunStatus::ok);
  // Samples 0..N−1 of the run's seed are present at every step.
  const auto own = fresh_sample_max_distance(c, r.steps, r.steps.front().samples_used, c.seed, 0);
  for (std::size_t j = 0; j < r.steps.size(); ++j) EXPECT_LE(own[j], r.steps[j].m_bar * (1 + 1e-6));
}

TEST(Engines, BrusselatorShortHorizonPassesFreshAudit) {
  for (Engine engine : {Engine::gotube, Engine::slr}) {
    StochasticConfig c = config(model_registry("brusselator"), Eigen::Vector2d(1, 1), 0.01, 2.0, 0.05);
    c.engine = engine;
    c.gamma = 0.01;
    const StochasticResult r = stochastic_run(c);
    ASSERT_EQ(r.status, RunStatus::ok) << to_string(engine);
    const auto fresh = fresh_sample_max_distance(c, r.steps, 1000, 99, 1ULL << 40);
    for (std::size_t j = 0; j < r.steps.size(); ++j) EXPECT_LE(fresh[j], r.steps[j].radius) << to_string(engine);
  }
}

TEST(GoTube, DeterministicPerSeed) {
  StochasticConfig c = config(model_registry("vanderpol"), Eigen::Vector2d(1.4, 2.4), 0.01, 1.0, 0.1);
  const StochasticResult a = gotube_run(c);
  const StochasticResult b = gotube_run(c);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t j = 0; j < a.steps.size(); ++j) ASSERT_EQ(a.steps[j].radius, b.steps[j].radius);
  c.seed += 1;
  const StochasticResult other = gotube_run(c);
  EXPECT_NE(other.steps.back().radius, a.steps.back().radius);
}

TEST(GoTube, SampleBudgetExhaustionIsReported) {
  StochasticConfig c = config(model_registry("vanderpol"), Eigen::Vector2d(1.4, 2.4), 0.01, 1.0, 0.1);
  c.gamma = 1e-9;
  c.batch_size = 10;
  c.max_samples = 30;
  const StochasticResult r = gotube_run(c);
  EXPECT_EQ(r.status, RunStatus::confidence_timeout);
  ASSERT_EQ(r.steps.size(), 1u);
  EXPECT_LT(r.steps.back().achieved_confidence, 1 - c.gamma);
  EXPECT_EQ(r.steps.back().samples_used, 30u);
  EXPECT_FALSE(r.message.empty());
}

TEST(Engines, RejectInvalidConfig) {
  const auto f = model_registry("brusselator");
  StochasticConfig c = config(f, Eigen::Vector2d(1, 1), 0.01, 1.0, 0.1);
  c.mu = 1.0;
  EXPECT_THROW(gotube_run(c), InvalidInput);
  c.mu = 1.1;
  c.gamma = 1.0;
  EXPECT_THROW(gotube_run(c), InvalidInput);
  c.gamma = 0.05;
  c.batch_size = 1;
  EXPECT_THROW(slr_run(c), InvalidInput);
  c.batch_size = 100;
  c.x0 = Vec::Zero(3);
  EXPECT_THROW(gotube_run(c), DimensionError);
}
