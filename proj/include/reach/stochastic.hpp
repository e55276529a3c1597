#pragma once

// Statistical reachtubes. Samples on the surface of B₀ are propagated with their
// deformation gradients; each sample x carries a cap B(x, r_x) on the sphere within
// which distances provably (SLR) or with confidence 1 − γ (GoTube) stay below μ·m̄.
// Caps accumulate until 1 − ∏(1 − area fraction) reaches 1 − γ, and each step emits the
// Euclidean ball B(x_j, μ·m̄).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "reach/errors.hpp"
#include "reach/geometry.hpp"
#include "reach/integrator.hpp"
#include "reach/interval_integrator.hpp"
#include "reach/parallel.hpp"
#include "reach/special_functions.hpp"
#include "reach/vector_field.hpp"

namespace reach {

struct SampleRecord {
  Vec x0_sample;  // on the surface of B₀
  Vec chi;        // χ(t_j, x)
  Mat F;          // ∂χ(t_j, x)/∂x
  double lambda_x = 0.0;
  double dist = 0.0;
  double cap_radius = 0.0;
  bool visited = false;  // SLR: endpoint of a local ascent (list V), no product factor
  double h_hint = 0.0;
};

struct CapStatistics {
  std::vector<double> nu_samples;
  double nu_mean = 0.0;
  double nu_sd = 0.0;
  double delta_lambda = 0.0;
  std::size_t N = 0;
};

enum class Engine { gotube, slr };

inline std::string to_string(Engine e) { return e == Engine::gotube ? "gotube" : "slr"; }

struct StochasticConfig {
  VectorFieldPtr field;
  Vec x0;
  double delta0 = 0.0;
  double t0 = 0.0;
  double horizon = 0.0;
  double dt = 0.01;
  double mu = 1.1;
  double gamma = 0.05;
  std::size_t batch_size = 100;
  std::size_t max_samples = 20000;
  std::uint64_t seed = 0;
  Engine engine = Engine::gotube;
  IntegratorConfig point = IntegratorConfig::adaptive();
  IntegratorConfig interval = IntegratorConfig::fixed(0.01);
  // Local ascent of the distance on the sphere (SLR).
  double ascent_step = 0.05;  // × δ₀
  int ascent_max_steps = 500;

  void validate() const {
    if (!field) throw InvalidInput("stochastic: no model");
    if (static_cast<std::size_t>(x0.size()) != field->dim()) throw DimensionError("stochastic: x0 has wrong dimension");
    if (!(delta0 > 0.0)) throw InvalidInput("stochastic: delta0 must be positive");
    if (!(dt > 0.0) || !(dt <= horizon)) throw InvalidInput("stochastic: need 0 < dt <= T");
    if (!(mu > 1.0)) throw InvalidInput("stochastic: mu must exceed 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("stochastic: gamma must lie in (0, 1)");
    if (batch_size < 2) throw InvalidInput("stochastic: batch_size must be at least 2");
    if (max_samples < std::max<std::size_t>(3, batch_size)) {
      throw InvalidInput("stochastic: max_samples must be at least max(3, batch_size)");
    }
    point.validate();
    interval.validate();
  }
};

struct StochasticStep {
  double time = 0.0;
  Vec center;
  double radius = 0.0;  // μ·m̄
  double m_bar = 0.0;
  double achieved_confidence = 0.0;
  std::size_t samples_used = 0;
  double delta_lambda = 0.0;  // GoTube: Δλ; SLR: interval bound Λ
  double min_cap = 0.0;
  double max_cap = 0.0;
  std::vector<double> confidence_trace;  // p̄ after each round of cap recomputation
};

enum class RunStatus { ok, blowup, confidence_timeout };

inline std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok:
      return "ok";
    case RunStatus::blowup:
      return "blowup";
    case RunStatus::confidence_timeout:
      return "confidence_timeout";
  }
  return "unknown";
}

struct StochasticResult {
  std::vector<StochasticStep> steps;
  RunStatus status = RunStatus::ok;
  double failure_time = 0.0;
  std::string message;

  double mean_ball_volume() const {
    if (steps.empty()) return 0.0;
    double s = 0.0;
    for (const auto& st : steps) s += ball_volume(static_cast<int>(st.center.size()), st.radius);
    return s / static_cast<double>(steps.size());
  }
};

// ‖χ_x − χ_c‖_M.
inline double distance(const Vec& chi_x, const Vec& chi_center, const Metric& metric) {
  if (chi_x.size() != chi_center.size()) throw DimensionError("distance: dimension mismatch");
  return metric.norm(chi_x - chi_center);
}

// σ_max(A_range · F · A_domain⁻¹).
inline double local_lipschitz(const Mat& f, const Metric& range_metric, const Metric& domain_metric) {
  if (f.rows() != f.cols()) throw DimensionError("local_lipschitz: matrix must be square");
  if (!f.allFinite()) throw BlowupError("local_lipschitz: non-finite gradient");
  if (range_metric.is_identity() && domain_metric.is_identity()) return sigma_max(f);
  return sigma_max(range_metric.factor() * f * domain_metric.factor_inverse());
}

// ν statistics over consecutive pairs in draw order and the upper confidence bound
// Δλ = ν̄ + t*_{γ/2}(N − 2)·s(ν)/√(N − 1).
inline CapStatistics delta_lambda(const std::vector<SampleRecord>& records, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("delta_lambda: gamma must lie in (0, 1)");
  CapStatistics st;
  st.N = records.size();
  if (st.N < 3) throw InvalidInput("delta_lambda: need at least 3 samples");
  for (std::size_t i = 0; i + 1 < records.size(); ++i) {
    const double sep = (records[i].x0_sample - records[i + 1].x0_sample).norm();
    if (sep < 1e-14) continue;
    st.nu_samples.push_back(std::abs(records[i].lambda_x - records[i + 1].lambda_x) / sep);
  }
  if (st.nu_samples.empty()) throw DomainError("delta_lambda: all sample pairs coincide");
  const auto m = static_cast<double>(st.nu_samples.size());
  st.nu_mean = std::accumulate(st.nu_samples.begin(), st.nu_samples.end(), 0.0) / m;
  double ss = 0.0;
  for (double v : st.nu_samples) ss += (v - st.nu_mean) * (v - st.nu_mean);
  st.nu_sd = st.nu_samples.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
  const double t = student_t_quantile(0.5 * gamma, static_cast<int>(st.N) - 2);
  st.delta_lambda = st.nu_mean + t * st.nu_sd / std::sqrt(static_cast<double>(st.N) - 1.0);
  return st;
}

namespace detail {

inline double cap_slack(double mu, double m_bar, double dist) {
  const double bound = mu * m_bar;
  const double slack = bound - dist;
  if (slack < 0.0) {
    if (slack >= -1e-12 * std::max(1.0, std::abs(bound))) return 0.0;
    throw InvalidInput("cap radius: distance exceeds mu * m_bar");
  }
  return slack;
}

}  // namespace detail

// Positive root r of Δλ·r² + λ·r = μ·m̄ − d, written as 2s/(λ + √(λ² + 4Δλs)) so that
// Δλ → 0 reduces continuously to s/λ. Returns +∞ when λ = Δλ = 0 and s > 0.
inline double cap_radius_gotube(double lambda_x, double delta_lambda, double mu, double m_bar, double dist) {
  if (lambda_x < 0.0 || delta_lambda < 0.0) throw InvalidInput("cap_radius_gotube: negative Lipschitz quantity");
  const double s = detail::cap_slack(mu, m_bar, dist);
  if (s == 0.0) return 0.0;
  if (lambda_x == 0.0 && delta_lambda == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * s / (lambda_x + std::sqrt(lambda_x * lambda_x + 4.0 * delta_lambda * s));
}

// Deterministic safety radius (μ·m̄ − d)/Λ, floored at 0.
inline double safety_radius_slr(double lambda_sigma, double mu, double m_bar, double dist) {
  if (!(lambda_sigma > 0.0)) throw InvalidInput("safety_radius_slr: Lipschitz bound must be positive");
  return std::max(0.0, (mu * m_bar - dist) / lambda_sigma);
}

// 1 − ∏(1 − cap fraction), accumulated in log space.
inline double compute_probability(const std::vector<double>& cap_radii, int n, double delta0) {
  double log_miss = 0.0;
  for (double r : cap_radii) {
    const double frac = std::isinf(r) ? 1.0 : cap_surface_fraction(n, delta0, r);
    if (frac >= 1.0) return 1.0;
    log_miss += std::log1p(-frac);
  }
  return -std::expm1(log_miss);
}

// Gradient of d(x) = ‖χ(x) − χ(c)‖_M with respect to the initial point, projected onto
// the tangent space of the sphere (centered at sphere_center) at record.x0_sample.
inline Vec distance_gradient(const SampleRecord& record, const Vec& center_chi, const Vec& sphere_center,
                             const Metric& metric) {
  const Vec diff = record.chi - center_chi;
  const double d = metric.norm(diff);
  const auto n = diff.size();
  if (d == 0.0) return Vec::Zero(n);
  Vec g = record.F.transpose() * (metric.matrix() * diff) / d;
  const Vec radial = record.x0_sample - sphere_center;
  const double rn = radial.norm();
  if (rn > 0.0) {
    const Vec u = radial / rn;
    g -= g.dot(u) * u;
  }
  return g;
}

namespace detail {

inline void advance_record(const VectorField& f, SampleRecord& rec, const TimeSpan& span,
                           const IntegratorConfig& cfg) {
  AugmentedState s = integrate_augmented(f, rec.chi, rec.F, span, cfg, &rec.h_hint);
  rec.chi = std::move(s.x);
  rec.F = std::move(s.F);
}

inline SampleRecord fresh_record(const VectorField& f, const Vec& x, double t0, double t,
                                 const IntegratorConfig& cfg) {
  SampleRecord rec;
  rec.x0_sample = x;
  rec.chi = x;
  rec.F = Mat::Identity(x.size(), x.size());
  if (t > t0) advance_record(f, rec, {t0, t}, cfg);
  return rec;
}

inline void measure(std::vector<SampleRecord>& recs, const Vec& center, const Metric& euclid) {
  for (auto& r : recs) {
    if (!r.chi.allFinite()) throw BlowupError("sample state is not finite");
    r.dist = distance(r.chi, center, euclid);
    r.lambda_x = local_lipschitz(r.F, euclid, euclid);
  }
}

inline double sample_max(const std::vector<SampleRecord>& recs) {
  double m = 0.0;
  for (const auto& r : recs) m = std::max(m, r.dist);
  return m;
}

inline void cap_extent(const std::vector<SampleRecord>& recs, StochasticStep& st) {
  st.min_cap = std::numeric_limits<double>::infinity();
  st.max_cap = 0.0;
  for (const auto& r : recs) {
    st.min_cap = std::min(st.min_cap, r.cap_radius);
    st.max_cap = std::max(st.max_cap, r.cap_radius);
  }
  if (recs.empty()) st.min_cap = 0.0;
}

}  // namespace detail

// GoTube: statistical Lipschitz caps with a Student-t bound on the local variation of λ.
inline StochasticResult gotube_run(const StochasticConfig& cfg) {
  cfg.validate();
  const VectorField& f = *cfg.field;
  const auto n = static_cast<int>(cfg.x0.size());
  const Metric euclid = Metric::euclidean(n);
  StochasticResult out;

  std::vector<SampleRecord> recs;
  std::uint64_t next_index = 0;
  auto add_batch = [&](double t) {
    const std::size_t count = std::min(cfg.batch_size, cfg.max_samples - recs.size());
    const std::size_t base = recs.size();
    recs.resize(base + count);
    parallel_for(count, [&](std::size_t i) {
      const Vec x = sample_sphere_point(cfg.x0, cfg.delta0, cfg.seed, next_index + i);
      recs[base + i] = detail::fresh_record(f, x, cfg.t0, t, cfg.point);
    });
    next_index += count;
  };

  Vec center = cfg.x0;
  double t_prev = cfg.t0;
  double hint = 0.0;
  // Steps j = 1..k; B₀ itself is known exactly and carries no statistical content.
  for (double t : step_times(cfg.t0, cfg.horizon, cfg.dt)) {
    try {
      if (t > t_prev) {
        const TimeSpan span{t_prev, t};
        center = solve_ivp(f, center, span, cfg.point, &hint);
        parallel_for(recs.size(), [&](std::size_t i) { detail::advance_record(f, recs[i], span, cfg.point); });
      }
      while (recs.size() < std::max<std::size_t>(3, cfg.batch_size)) add_batch(t);

      StochasticStep st;
      st.time = t;
      st.center = center;
      for (;;) {
        detail::measure(recs, center, euclid);
        const double m_bar = detail::sample_max(recs);
        const CapStatistics cs = delta_lambda(recs, cfg.gamma);
        std::vector<double> radii(recs.size());
        for (std::size_t i = 0; i < recs.size(); ++i) {
          recs[i].cap_radius = cap_radius_gotube(recs[i].lambda_x, cs.delta_lambda, cfg.mu, m_bar, recs[i].dist);
          radii[i] = recs[i].cap_radius;
        }
        const double p = compute_probability(radii, n, cfg.delta0);
        st.m_bar = m_bar;
        st.radius = cfg.mu * m_bar;
        st.achieved_confidence = p;
        st.samples_used = recs.size();
        st.delta_lambda = cs.delta_lambda;
        st.confidence_trace.push_back(p);
        if (p >= 1.0 - cfg.gamma) break;
        if (recs.size() >= cfg.max_samples) {
          detail::cap_extent(recs, st);
          out.steps.push_back(std::move(st));
          out.status = RunStatus::confidence_timeout;
          out.failure_time = t;
          out.message = "sample budget exhausted at confidence " + std::to_string(p);
          return out;
        }
        add_batch(t);
      }
      detail::cap_extent(recs, st);
      out.steps.push_back(std::move(st));
    } catch (const BlowupError& e) {
      out.status = RunStatus::blowup;
      out.failure_time = t;
      out.message = e.what();
      return out;
    } catch (const HorizonError& e) {
      out.status = RunStatus::blowup;
      out.failure_time = t;
      out.message = e.what();
      return out;
    }
    t_prev = t;
  }
  return out;
}

namespace detail {

// Gradient ascent of the distance along the sphere from rec, with retraction to the
// sphere and step halving on failure. Returns the endpoint's record integrated to t.
inline SampleRecord ascend(const VectorField& f, const StochasticConfig& cfg, const SampleRecord& start,
                           const Vec& center_chi, double t) {
  const Metric euclid = Metric::euclidean(cfg.x0.size());
  SampleRecord cur = start;
  cur.dist = distance(cur.chi, center_chi, euclid);
  double step = cfg.ascent_step * cfg.delta0;
  const double min_step = 1e-6 * cfg.delta0;
  for (int it = 0; it < cfg.ascent_max_steps && step >= min_step; ++it) {
    const Vec g = distance_gradient(cur, center_chi, cfg.x0, euclid);
    const double gn = g.norm();
    const double scale = std::max(1.0, sigma_max(cur.F));
    if (gn < 1e-8 * scale) break;
    Vec y = cur.x0_sample + step * g / gn;
    y = cfg.x0 + cfg.delta0 * (y - cfg.x0) / (y - cfg.x0).norm();
    SampleRecord cand = fresh_record(f, y, cfg.t0, t, cfg.point);
    cand.dist = distance(cand.chi, center_chi, euclid);
    if (cand.dist > cur.dist) {
      cur = std::move(cand);
    } else {
      step *= 0.5;
    }
  }
  cur.visited = true;
  return cur;
}

}  // namespace detail

// SLR: deterministic safety caps from an interval bound Λ on the gradient over all of B₀,
// with a local ascent from each draw that falls outside the current caps.
inline StochasticResult slr_run(const StochasticConfig& cfg) {
  cfg.validate();
  const VectorField& f = *cfg.field;
  const auto n = static_cast<int>(cfg.x0.size());
  const Metric euclid = Metric::euclidean(n);
  StochasticResult out;

  IntervalFlow flow{IVector::around(cfg.x0, Vec::Constant(n, cfg.delta0)),
                    LohnerMatrix(IMatrix::identity(static_cast<std::size_t>(n)))};
  std::vector<SampleRecord> recs;
  std::uint64_t next_index = 0;

  auto covered = [&](const Vec& x) {
    return std::any_of(recs.begin(), recs.end(),
                       [&](const SampleRecord& r) { return (x - r.x0_sample).norm() <= r.cap_radius; });
  };

  Vec center = cfg.x0;
  double t_prev = cfg.t0;
  double hint = 0.0;
  for (double t : step_times(cfg.t0, cfg.horizon, cfg.dt)) {
    try {
      if (t > t_prev) {
        const TimeSpan span{t_prev, t};
        center = solve_ivp(f, center, span, cfg.point, &hint);
        flow = solve_interval_augmented(f, flow.x, flow.f, span, cfg.interval);
        for (auto& r : recs) detail::advance_record(f, r, span, cfg.point);
      }
      const double lambda = interval_norm_upper_bound(flow.f.weighted(euclid, euclid));
      if (!std::isfinite(lambda)) throw BlowupError("non-finite interval Lipschitz bound");

      StochasticStep st;
      st.time = t;
      st.center = center;
      st.delta_lambda = lambda;
      for (;;) {
        detail::measure(recs, center, euclid);
        const double m_bar = detail::sample_max(recs);
        std::vector<double> radii;
        for (auto& r : recs) {
          r.cap_radius = m_bar > 0.0 ? safety_radius_slr(lambda, cfg.mu, m_bar, r.dist) : 0.0;
          if (!r.visited) radii.push_back(r.cap_radius);
        }
        const double p = compute_probability(radii, n, cfg.delta0);
        st.m_bar = m_bar;
        st.radius = cfg.mu * m_bar;
        st.achieved_confidence = p;
        st.samples_used = recs.size();
        st.confidence_trace.push_back(p);
        if (!recs.empty() && p >= 1.0 - cfg.gamma) break;
        if (recs.size() >= cfg.max_samples) {
          detail::cap_extent(recs, st);
          out.steps.push_back(std::move(st));
          out.status = RunStatus::confidence_timeout;
          out.failure_time = t;
          out.message = "sample budget exhausted at confidence " + std::to_string(p);
          return out;
        }
        // Every draw joins U; only draws outside the current caps start a local ascent.
        const std::size_t count = std::min(cfg.batch_size, cfg.max_samples - recs.size());
        std::vector<Vec> drawn;
        std::vector<std::size_t> open;
        for (std::size_t k = 0; k < count; ++k) {
          drawn.push_back(sample_sphere_point(cfg.x0, cfg.delta0, cfg.seed, next_index++));
          if (!covered(drawn.back())) open.push_back(k);
        }
        open.resize(std::min(open.size(), cfg.max_samples - recs.size() - count));
        std::vector<SampleRecord> fresh(drawn.size());
        parallel_for(drawn.size(), [&](std::size_t i) { fresh[i] = detail::fresh_record(f, drawn[i], cfg.t0, t, cfg.point); });
        std::vector<SampleRecord> peaks(open.size());
        parallel_for(open.size(), [&](std::size_t i) { peaks[i] = detail::ascend(f, cfg, fresh[open[i]], center, t); });
        for (auto& r : fresh) recs.push_back(std::move(r));
        for (auto& r : peaks) recs.push_back(std::move(r));
      }
      detail::cap_extent(recs, st);
      out.steps.push_back(std::move(st));
    } catch (const BlowupError& e) {
      out.status = RunStatus::blowup;
      out.failure_time = t;
      out.message = e.what();
      return out;
    } catch (const HorizonError& e) {
      out.status = RunStatus::blowup;
      out.failure_time = t;
      out.message = e.what();
      return out;
    }
    t_prev = t;
  }
  return out;
}

inline StochasticResult stochastic_run(const StochasticConfig& cfg) {
  return cfg.engine == Engine::gotube ? gotube_run(cfg) : slr_run(cfg);
}

// Largest distance from the center image over `trials` fresh surface samples of B₀, per
// step of `tube`. Indices start at `first_index` so audits can avoid the engine's samples.
inline std::vector<double> fresh_sample_max_distance(const StochasticConfig& cfg,
                                                     const std::vector<StochasticStep>& tube, std::size_t trials,
                                                     std::uint64_t seed, std::uint64_t first_index = 0) {
  cfg.validate();
  std::vector<double> times;
  for (const auto& st : tube) times.push_back(st.time);
  std::vector<std::vector<double>> dist(trials, std::vector<double>(tube.size(), 0.0));
  const Metric euclid = Metric::euclidean(cfg.x0.size());
  parallel_for(trials, [&](std::size_t i) {
    const Vec x = sample_sphere_point(cfg.x0, cfg.delta0, seed, first_index + i);
    const std::vector<Vec> path = trajectory(*cfg.field, x, cfg.t0, times, cfg.point);
    for (std::size_t j = 0; j < tube.size(); ++j) dist[i][j] = distance(path[j], tube[j].center, euclid);
  });
  std::vector<double> out(tube.size(), 0.0);
  for (const auto& row : dist)
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = std::max(out[j], row[j]);
  return out;
}

}  // namespace reach
