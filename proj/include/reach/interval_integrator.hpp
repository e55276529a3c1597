#pragma once

// Validated integration of the state box and of the deformation gradient.
//
// One step of size h from a box [x]:
//   1. a-priori box B with [x] + [0,h]·f(B) ⊆ B (ε-inflation), so every trajectory
//      from [x] stays in B on [0,h];
//   2. step gradient Φ ∈ Σ_{k<4} hᵏ/k! [J]ᵏ + h⁴/24 [J]⁴ [P], [J] = ∂f/∂x(B),
//      [P] = I ± (e^{hL} − 1) bounding Φ(s) for s ∈ [0,h], L = ‖|[J]|‖∞;
//   3. mean-value state update χ(c) + Φ([x] − c), intersected with [x] + h·f(B).
// Gradients are carried in Q·[R] form between steps.

#include <cmath>
#include <string>
#include <utility>

#include "reach/errors.hpp"
#include "reach/integrator.hpp"
#include "reach/interval_matrix.hpp"
#include "reach/vector_field.hpp"

namespace reach {

struct StepEnclosure {
  IVector x_next;
  IMatrix phi;
  IVector apriori;
};

namespace detail {

inline constexpr int kMaxInflations = 20;
inline constexpr double kInflationFactor = 1.1;
inline constexpr double kInflationAbs = 1e-10;

inline IVector eval_checked(const VectorField& f, const IVector& b) {
  IVector out = f.interval_eval(b);
  if (!out.is_finite()) throw EnclosureFailure(f.name() + ": non-finite interval vector field");
  return out;
}

inline IVector inflate_box(const IVector& b) {
  IVector out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double m = b[i].mid();
    const double r = b[i].rad() * kInflationFactor + kInflationAbs;
    out[i] = Interval(add_down(m, -r), add_up(m, r));
  }
  return out;
}

inline IVector apriori_box(const VectorField& f, const IVector& x, double h) {
  const Interval span(0.0, h);
  IVector b = x + span * eval_checked(f, x);
  b = inflate_box(b);
  for (int k = 0; k <= kMaxInflations; ++k) {
    const IVector next = x + span * eval_checked(f, b);
    if (b.contains(next)) return next;
    b = inflate_box(next);
  }
  throw EnclosureFailure(f.name() + ": a-priori enclosure not validated after " + std::to_string(kMaxInflations) +
                         " inflations");
}

inline IMatrix step_gradient(const IMatrix& j, double h) {
  const std::size_t n = j.rows();
  double l = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s = add_up(s, j(r, c).mag());
    l = std::max(l, s);
  }
  const double eta = add_up(exp(Interval(h) * Interval(l)).hi(), -1.0);
  IMatrix p = IMatrix::identity(n);
  if (eta > 0.0) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) p(r, c) += Interval(-eta, eta);
  }
  const Interval hi(h);
  const IMatrix j2 = j * j;
  const IMatrix j3 = j * j2;
  const IMatrix rem = j * (j * (j * (j * p)));
  const Interval c2 = hi * hi / Interval(2.0);
  const Interval c3 = hi * hi * hi / Interval(6.0);
  const Interval c4 = hi * hi * hi * hi / Interval(24.0);
  IMatrix phi = IMatrix::identity(n) + hi * j + c2 * j2 + c3 * j3 + c4 * rem;
  if (!phi.is_finite()) throw EnclosureFailure("step gradient enclosure is not finite");
  return phi;
}

}  // namespace detail

// One validated step of length h from the box x.
inline StepEnclosure interval_step(const VectorField& f, const IVector& x, double h) {
  if (x.size() != f.dim()) throw DimensionError("interval_step: box dimension mismatch");
  if (!(h > 0.0)) throw InvalidInput("interval_step: step must be positive");
  try {
    StepEnclosure out;
    out.apriori = detail::apriori_box(f, x, h);
    const IMatrix j = f.interval_jacobian(out.apriori);
    if (!j.is_finite()) throw EnclosureFailure(f.name() + ": non-finite interval Jacobian");
    out.phi = detail::step_gradient(j, h);

    const IVector fb = detail::eval_checked(f, out.apriori);
    const Vec c = x.mid();
    const IVector ci = IVector::from(c);
    const Interval hi(h);
    const IVector center = ci + hi * detail::eval_checked(f, ci) + (hi * hi / Interval(2.0)) * (j * fb);
    const IVector mean_value = center + out.phi * (x - ci);
    out.x_next = intersect(mean_value, x + hi * fb);
    return out;
  } catch (const EnclosureFailure&) {
    throw;
  } catch (const InvalidInput& e) {
    // NaN endpoints or an empty intersection both mean the enclosure is lost.
    throw EnclosureFailure(std::string("interval step failed: ") + e.what());
  } catch (const DomainError& e) {
    throw EnclosureFailure(std::string("interval step failed: ") + e.what());
  }
}

struct IntervalFlow {
  IVector x;       // encloses {χ(t₁, x) : x ∈ X₀}
  LohnerMatrix f;  // encloses {∂χ(t₁, x)/∂x · G : x ∈ X₀, G ∈ F₀}
};

// Validated enclosure of the state and of the accumulated gradient over `span`,
// using fixed steps no longer than cfg.step.
inline IntervalFlow solve_interval_augmented(const VectorField& f, const IVector& x0, const LohnerMatrix& f0,
                                             const TimeSpan& span, const IntegratorConfig& cfg = {}) {
  cfg.validate();
  const std::size_t n = f.dim();
  if (x0.size() != n) throw DimensionError("solve_interval_augmented: X0 has wrong dimension");
  if (f0.factor().rows() != n || f0.factor().cols() != n) {
    throw DimensionError("solve_interval_augmented: F0 has wrong shape");
  }
  if (span.t1 < span.t0) throw InvalidInput("solve_interval_augmented: t1 must not precede t0");
  if (!x0.is_finite()) throw EnclosureFailure("solve_interval_augmented: non-finite initial box");

  IntervalFlow out{x0, f0};
  if (span.t1 == span.t0) return out;
  const auto steps = static_cast<long long>(std::max(1.0, std::ceil(span.length() / cfg.step - 1e-9)));
  if (steps > cfg.max_steps) throw HorizonError("solve_interval_augmented: step budget exceeded");
  const double h = span.length() / static_cast<double>(steps);

  // The state box is also tracked as χ([c]) + G·(X₀ − c) with G the accumulated
  // step gradient, which suffers far less wrapping than box-to-box stepping.
  const Vec c0 = x0.mid();
  const IVector dev = x0 - IVector::from(c0);
  IVector cbox = IVector::from(c0);
  LohnerMatrix flow(IMatrix::identity(n));
  for (long long s = 0; s < steps; ++s) {
    const StepEnclosure st = interval_step(f, out.x, h);
    const StepEnclosure sc = interval_step(f, cbox, h);
    flow.left_multiply(st.phi);
    out.f.left_multiply(st.phi);
    cbox = sc.x_next;
    const IVector lohner_x = cbox + IMatrix::from(flow.frame()) * (flow.factor() * dev);
    try {
      out.x = intersect(st.x_next, lohner_x);
    } catch (const InvalidInput& e) {
      throw EnclosureFailure(std::string("solve_interval_augmented: ") + e.what());
    }
    if (!out.x.is_finite() || !out.f.factor().is_finite()) {
      throw EnclosureFailure("solve_interval_augmented: non-finite enclosure");
    }
  }
  return out;
}

inline std::pair<IVector, IMatrix> solve_interval_augmented(const VectorField& f, const IVector& x0, const IMatrix& f0,
                                                            const TimeSpan& span, const IntegratorConfig& cfg = {}) {
  IntervalFlow r = solve_interval_augmented(f, x0, LohnerMatrix(f0), span, cfg);
  return {std::move(r.x), r.f.value()};
}

}  // namespace reach
