#pragma once

// Deterministic reachtubes: per step, an ellipsoid in the volume-optimal metric and a
// Euclidean ball, both with radius Λ·δ₀ where Λ bounds the interval deformation gradient,
// and the intersection of their bounding boxes as the next interval state.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "reach/errors.hpp"
#include "reach/geometry.hpp"
#include "reach/integrator.hpp"
#include "reach/interval_integrator.hpp"
#include "reach/parallel.hpp"
#include "reach/vector_field.hpp"

namespace reach {

struct LrtngConfig {
  VectorFieldPtr field;
  Vec x0;
  double delta0 = 0.0;
  Metric m0;  // initial metric; Euclidean when left empty
  double t0 = 0.0;
  double horizon = 0.0;  // T
  double dt = 0.01;
  IntegratorConfig point = IntegratorConfig::adaptive();
  IntegratorConfig interval = IntegratorConfig::fixed(0.01);

  Metric initial_metric() const { return m0.dim() == 0 ? Metric::euclidean(x0.size()) : m0; }

  void validate() {
    if (!field) throw InvalidInput("lrtng: no model");
    if (static_cast<std::size_t>(x0.size()) != field->dim()) throw DimensionError("lrtng: x0 has wrong dimension");
    if (!(delta0 > 0.0)) throw InvalidInput("lrtng: delta0 must be positive");
    if (!(dt > 0.0) || !(dt <= horizon)) throw InvalidInput("lrtng: need 0 < dt <= T");
    point.validate();
    interval.validate();
    if (initial_metric().dim() != x0.size()) throw DimensionError("lrtng: metric has wrong dimension");
  }
};

struct LrtngStep {
  double time = 0.0;
  Vec center;
  Ellipsoid ellipsoid;    // B_j in the optimal metric M_j
  Ellipsoid euclid_ball;  // B_j in the Euclidean metric
  Box box;                // AABB(ellipsoid) ∩ AABB(euclid_ball)
  IMatrix gradient_enclosure;
  double lambda_metric = 0.0;  // Λ(M_j)
  double lambda_euclid = 0.0;  // Λ(I)
  bool metric_fallback = false;
};

struct LrtngResult {
  std::vector<LrtngStep> steps;
  bool blowup = false;
  double blowup_time = 0.0;
  std::string message;
  std::vector<std::string> diagnostics;

  double mean_box_volume() const {
    if (steps.empty()) return 0.0;
    double s = 0.0;
    for (const auto& st : steps) s += st.box.volume();
    return s / static_cast<double>(steps.size());
  }
};

namespace detail {

inline LrtngStep make_lrtng_step(double t, const Vec& center, const Metric& metric, double lambda_m, double lambda_e,
                                 double delta0, IMatrix grad) {
  LrtngStep st;
  st.time = t;
  st.center = center;
  st.ellipsoid = Ellipsoid{center, metric, lambda_m * delta0};
  st.euclid_ball = Ellipsoid::ball(center, lambda_e * delta0);
  st.box = intersection_box(st.ellipsoid, st.euclid_ball);
  st.gradient_enclosure = std::move(grad);
  st.lambda_metric = lambda_m;
  st.lambda_euclid = lambda_e;
  return st;
}

}  // namespace detail

inline LrtngResult lrtng_run(LrtngConfig cfg) {
  cfg.validate();
  const VectorField& f = *cfg.field;
  const auto n = cfg.x0.size();
  const Metric m0 = cfg.initial_metric();
  const Metric euclid = Metric::euclidean(n);
  const Mat& a0 = m0.factor();

  LrtngResult out;
  IMatrix f_id = IMatrix::identity(static_cast<std::size_t>(n));
  const double lambda_e0 = stretching_factor(f_id, euclid, m0);
  out.steps.push_back(detail::make_lrtng_step(cfg.t0, cfg.x0, m0, 1.0, lambda_e0, cfg.delta0, f_id));

  Vec center = cfg.x0;
  Mat f_center = Mat::Identity(n, n);
  Metric metric = m0;
  LohnerMatrix f_interval(f_id);
  double t_prev = cfg.t0;
  double hint = 0.0;
  for (double t : step_times(cfg.t0, cfg.horizon, cfg.dt)) {
    const TimeSpan span{t_prev, t};
    try {
      const IVector x_prev = out.steps.back().box.intervals;
      const AugmentedState local = solve_augmented(f, center, span, cfg.point);
      Vec next_center = solve_ivp(f, center, span, cfg.point, &hint);
      f_center = local.F * f_center;

      IntervalFlow flow = solve_interval_augmented(f, x_prev, f_interval, span, cfg.interval);

      bool fallback = false;
      try {
        metric = optimal_metric(f_center, a0);
      } catch (const SingularError&) {
        fallback = true;
        out.diagnostics.push_back("t=" + std::to_string(t) + ": singular center gradient, previous metric reused");
      }
      const double lambda_m = interval_norm_upper_bound(flow.f.weighted(metric, m0));
      const double lambda_e = interval_norm_upper_bound(flow.f.weighted(euclid, m0));
      if (!std::isfinite(lambda_m) || !std::isfinite(lambda_e) || !next_center.allFinite()) {
        throw BlowupError("non-finite stretching factor");
      }
      LrtngStep st =
          detail::make_lrtng_step(t, next_center, metric, lambda_m, lambda_e, cfg.delta0, flow.f.value());
      st.metric_fallback = fallback;
      if (std::abs(local.F.determinant()) <= 1e-12) {
        out.diagnostics.push_back("t=" + std::to_string(t) + ": near-singular step gradient");
      }
      out.steps.push_back(std::move(st));
      center = std::move(next_center);
      f_interval = std::move(flow.f);
    } catch (const BlowupError& e) {
      out.blowup = true;
      out.blowup_time = t;
      out.message = e.what();
      return out;
    } catch (const InvalidInput& e) {
      // NaN reaching an interval constructor.
      out.blowup = true;
      out.blowup_time = t;
      out.message = e.what();
      return out;
    }
    t_prev = t;
  }
  return out;
}

struct AuditStepReport {
  double time = 0.0;
  std::size_t in_box = 0;
  std::size_t in_ellipsoid = 0;
  std::size_t in_ball = 0;
};

struct AuditReport {
  std::size_t trials = 0;
  std::vector<AuditStepReport> steps;

  std::size_t violations() const {
    std::size_t v = 0;
    for (const auto& s : steps) v += 3 * trials - s.in_box - s.in_ellipsoid - s.in_ball;
    return v;
  }
  std::size_t box_violations() const {
    std::size_t v = 0;
    for (const auto& s : steps) v += trials - s.in_box;
    return v;
  }
  bool sound() const { return violations() == 0; }
};

// Initial point `index` of an audit: even indices on the boundary of B₀, odd ones
// uniform in its interior.
inline Vec audit_initial_point(const Vec& x0, double delta0, const Metric& m0, std::uint64_t seed,
                               std::uint64_t index) {
  const auto n = x0.size();
  Vec z = sample_sphere_point(Vec::Zero(n), 1.0, seed, index);
  if (index % 2 == 1) {
    auto rng = sample_rng(~seed, index);
    const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    z *= std::pow(u, 1.0 / static_cast<double>(n));
  }
  return x0 + delta0 * (m0.factor_inverse() * z);
}

// Relative slack on set sizes covering the audit's own rounding and integration error.
inline constexpr double kAuditRelTol = 1e-9;

inline bool box_contains(const Box& b, const Vec& x, double rel_tol) {
  for (std::size_t i = 0; i < b.dim(); ++i) {
    const auto& iv = b.intervals[i];
    const double slack = rel_tol * iv.width();
    const double v = x(static_cast<Eigen::Index>(i));
    if (!(iv.lo() - slack <= v && v <= iv.hi() + slack)) return false;
  }
  return true;
}

// Integrates `trials` initial points of B₀ (at rtol = atol = 1e-12) through the step times
// of `tube` and counts containment in each step's box, ellipsoid and Euclidean ball.
inline AuditReport conservativeness_audit(const std::vector<LrtngStep>& tube, LrtngConfig cfg, std::size_t trials,
                                          std::uint64_t seed) {
  cfg.validate();
  cfg.point = IntegratorConfig::adaptive(1e-12, 1e-12);
  AuditReport rep;
  rep.trials = trials;
  if (tube.empty()) return rep;
  std::vector<double> times;
  for (std::size_t j = 1; j < tube.size(); ++j) times.push_back(tube[j].time);
  const std::size_t k = tube.size();
  std::vector<std::vector<unsigned char>> hits(trials, std::vector<unsigned char>(k, 0));
  const Metric m0 = cfg.initial_metric();
  parallel_for(trials, [&](std::size_t i) {
    const Vec x = audit_initial_point(cfg.x0, cfg.delta0, m0, seed, i);
    std::vector<Vec> path;
    path.reserve(k);
    path.push_back(x);
    try {
      for (auto& p : trajectory(*cfg.field, x, tube.front().time, times, cfg.point)) path.push_back(std::move(p));
    } catch (const Error&) {
      // A diverging trajectory is simply uncontained from that point on.
    }
    for (std::size_t j = 0; j < path.size(); ++j) {
      const auto& st = tube[j];
      hits[i][j] = static_cast<unsigned char>((box_contains(st.box, path[j], kAuditRelTol) ? 1 : 0) |
                                              (st.ellipsoid.contains(path[j], kAuditRelTol) ? 2 : 0) |
                                              (st.euclid_ball.contains(path[j], kAuditRelTol) ? 4 : 0));
    }
  });
  rep.steps.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    rep.steps[j].time = tube[j].time;
    for (std::size_t i = 0; i < trials; ++i) {
      rep.steps[j].in_box += hits[i][j] & 1;
      rep.steps[j].in_ellipsoid += (hits[i][j] >> 1) & 1;
      rep.steps[j].in_ball += (hits[i][j] >> 2) & 1;
    }
  }
  return rep;
}

}  // namespace reach
