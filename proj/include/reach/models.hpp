#pragma once

// Benchmark vector fields and the name → model registry.
//
// Each model is written once, templated on the scalar type, and instantiated
// for double (integration) and Interval (validated enclosures).

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "reach/interval.hpp"
#include "reach/keyvalue.hpp"
#include "reach/vector_field.hpp"

namespace reach {

using ParamMap = std::map<std::string, double>;

namespace models {

using std::cos;
using std::exp;
using std::sin;
using std::tanh;

struct Brusselator {
  double a = 1.0;
  double b = 1.5;

  std::size_t dim() const { return 2; }

  template <class T>
  void rhs(const T* x, T* dx) const {
    const T x1sq = sqr(x[0]);
    dx[0] = a - (b + 1.0) * x[0] + x1sq * x[1];
    dx[1] = b * x[0] - x1sq * x[1];
  }

  template <class T>
  void jac(const T* x, T* j) const {
    const T two_x1x2 = 2.0 * x[0] * x[1];
    const T x1sq = sqr(x[0]);
    j[0] = -(b + 1.0) + two_x1x2;
    j[1] = x1sq;
    j[2] = b - two_x1x2;
    j[3] = -x1sq;
  }
};

struct VanDerPol {
  double mu = 1.0;

  std::size_t dim() const { return 2; }

  template <class T>
  void rhs(const T* x, T* dx) const {
    dx[0] = x[1];
    dx[1] = mu * (1.0 - sqr(x[0])) * x[1] - x[0];
  }

  template <class T>
  void jac(const T* x, T* j) const {
    j[0] = T(0.0);
    j[1] = T(1.0);
    j[2] = -2.0 * mu * x[0] * x[1] - 1.0;
    j[3] = mu * (1.0 - sqr(x[0]));
  }
};

// Planar unicycle with constant speed v. The turn rate is u, optionally with a
// feedback term −k·x₁³ steering back toward the x₁ = 0 line. For k > 0 the quantity
// sin x₃ + (k·x₁⁴/4 − u·x₁)/v is conserved, so x₁ stays bounded.
struct DubinsCar {
  double v = 1.0;
  double u = 0.0;
  double k = 0.0;

  std::size_t dim() const { return 3; }

  template <class T>
  void rhs(const T* x, T* dx) const {
    dx[0] = v * cos(x[2]);
    dx[1] = v * sin(x[2]);
    if (k == 0.0) {
      dx[2] = T(u);
    } else {
      dx[2] = u - k * pow3(x[0]);
    }
  }

  template <class T>
  void jac(const T* x, T* j) const {
    for (int i = 0; i < 9; ++i) j[i] = T(0.0);
    j[2] = -v * sin(x[2]);
    j[5] = v * cos(x[2]);
    if (k != 0.0) j[6] = -3.0 * k * sqr(x[0]);
  }

 private:
  static double pow3(double a) { return a * a * a; }
  static Interval pow3(const Interval& a) { return reach::pow(a, 3); }
};

// Two-variable cardiac cell (cubic excitable membrane with linear recovery).
struct CardiacCell {
  std::size_t dim() const { return 2; }

  template <class T>
  void rhs(const T* x, T* dx) const {
    dx[0] = -0.9 * sqr(x[0]) - pow(x[0], 3) - 0.9 * x[0] - x[1] + 1.0;
    dx[1] = x[0] - 2.0 * x[1];
  }

  template <class T>
  void jac(const T* x, T* j) const {
    j[0] = -1.8 * x[0] - 3.0 * sqr(x[0]) - 0.9;
    j[1] = T(-1.0);
    j[2] = T(1.0);
    j[3] = T(-2.0);
  }

 private:
  static double pow(double v, int n) { return std::pow(v, n); }
  static Interval pow(const Interval& v, int n) { return reach::pow(v, n); }
};

// Two-link robot arm under PD control (joint angles x₁, x₂; velocities x₃, x₄).
struct Robotarm {
  double m = 1.0;
  double ml = 1.0;
  double kp1 = 2.0;
  double kp2 = 1.0;
  double kd1 = 2.0;
  double kd2 = 1.0;
  double qd1 = 0.0;
  double qd2 = 0.0;

  std::size_t dim() const { return 4; }

  template <class T>
  void rhs(const T* x, T* dx) const {
    const T den = m * sqr(x[1]) + ml / 3.0;
    const T num = -2.0 * m * x[1] * x[2] * x[3] - kp1 * x[0] - kd1 * x[2] + kp1 * qd1;
    dx[0] = x[2];
    dx[1] = x[3];
    dx[2] = num / den;
    dx[3] = x[1] * sqr(x[2]) - kp2 / m * x[1] - kd2 / m * x[3] + kp2 / m * qd2;
  }

  template <class T>
  void jac(const T* x, T* j) const {
    const T den = m * sqr(x[1]) + ml / 3.0;
    const T num = -2.0 * m * x[1] * x[2] * x[3] - kp1 * x[0] - kd1 * x[2] + kp1 * qd1;
    for (int i = 0; i < 16; ++i) j[i] = T(0.0);
    j[2] = T(1.0);
    j[7] = T(1.0);
    j[8] = -kp1 / den;
    j[9] = (-2.0 * m * x[2] * x[3]) / den - num * (2.0 * m * x[1]) / sqr(den);
    j[10] = (-2.0 * m * x[1] * x[3] - kd1) / den;
    j[11] = (-2.0 * m * x[1] * x[2]) / den;
    j[13] = sqr(x[2]) - kp2 / m;
    j[14] = 2.0 * x[1] * x[2];
    j[15] = T(-kd2 / m);
  }
};

// Continuous-time RNN: ẋ = −x/τ + W·tanh(x) + b.
struct Ctrnn {
  Vec tau;
  Mat w;
  Vec b;

  std::size_t dim() const { return static_cast<std::size_t>(tau.size()); }

  template <class T>
  void rhs(const T* x, T* dx) const {
    const auto n = tau.size();
    std::vector<T> th(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) th[i] = tanh(x[i]);
    for (Eigen::Index i = 0; i < n; ++i) {
      T acc = x[i] * (-1.0 / tau(i)) + b(i);
      for (Eigen::Index k = 0; k < n; ++k) acc = acc + w(i, k) * th[k];
      dx[i] = acc;
    }
  }

  template <class T>
  void jac(const T* x, T* j) const {
    const auto n = tau.size();
    std::vector<T> dth(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) dth[k] = 1.0 - sqr(tanh(x[k]));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < n; ++k) {
        T e = w(i, k) * dth[k];
        if (i == k) e = e - 1.0 / tau(i);
        j[i * n + k] = e;
      }
    }
  }
};

// ẋ = A x + c.
struct Linear {
  Mat a;
  Vec c;

  std::size_t dim() const { return static_cast<std::size_t>(a.rows()); }

  template <class T>
  void rhs(const T* x, T* dx) const {
    const auto n = a.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      T acc = T(c(i));
      for (Eigen::Index k = 0; k < n; ++k) {
        if (a(i, k) != 0.0) acc = acc + a(i, k) * x[k];
      }
      dx[i] = acc;
    }
  }

  template <class T>
  void jac(const T*, T* j) const {
    const auto n = a.rows();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k) j[i * n + k] = T(a(i, k));
  }
};

}  // namespace models

inline VectorFieldPtr make_linear(const Mat& a, const Vec& c) {
  if (a.rows() != a.cols() || a.rows() == 0) throw DimensionError("linear: A must be square and non-empty");
  if (c.size() != a.rows()) throw DimensionError("linear: c must have dim entries");
  return make_field("linear", models::Linear{a, c});
}

inline VectorFieldPtr make_linear(const Mat& a) { return make_linear(a, Vec::Zero(a.rows())); }

inline VectorFieldPtr make_ctrnn(const Vec& tau, const Mat& w, const Vec& b) {
  const auto n = tau.size();
  if (n == 0) throw DimensionError("ctrnn: empty network");
  if (w.rows() != n || w.cols() != n || b.size() != n) throw DimensionError("ctrnn: W must be dim×dim and b of length dim");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(tau(i) > 0.0)) throw InvalidInput("ctrnn: time constants must be positive");
  }
  return make_field("ctrnn", models::Ctrnn{tau, w, b});
}

namespace detail {

inline Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

inline Mat to_mat_rowmajor(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v[static_cast<std::size_t>(i * cols + j)];
  return m;
}

inline void check_params(const std::string& model, const ParamMap& params, const std::set<std::string>& known) {
  for (const auto& [k, v] : params) {
    if (known.count(k) == 0) throw InvalidInput(model + ": unknown parameter '" + k + "'");
    if (!std::isfinite(v)) throw InvalidInput(model + ": parameter '" + k + "' is not finite");
  }
}

inline double param(const ParamMap& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace detail

// Weights for `ctrnn` (dim, tau, W, b) or `linear` (dim, A, c), as a key-value document.
inline VectorFieldPtr load_weights_model(const std::string& model, const KvDocument& doc) {
  const std::string root;
  const auto& src = doc.source();
  const long long dim = doc.integer(root, "dim");
  if (dim < 1) throw ParseError(src, doc.line_of(root, "dim"), "dim must be positive");
  auto sized = [&](const std::string& key, std::size_t expected) {
    auto v = doc.numbers(root, key);
    if (v.size() != expected) {
      throw ParseError(src, doc.line_of(root, key),
                       "'" + key + "' has " + std::to_string(v.size()) + " entries, expected " + std::to_string(expected));
    }
    return v;
  };
  const auto n = static_cast<std::size_t>(dim);
  const auto en = static_cast<Eigen::Index>(dim);
  if (model == "ctrnn") {
    const Vec tau = detail::to_vec(sized("tau", n));
    const Mat w = detail::to_mat_rowmajor(sized("W", n * n), en, en);
    const Vec b = detail::to_vec(sized("b", n));
    for (Eigen::Index i = 0; i < en; ++i) {
      if (!(tau(i) > 0.0)) throw ParseError(src, doc.line_of(root, "tau"), "time constants must be positive");
    }
    return make_ctrnn(tau, w, b);
  }
  if (model == "linear") {
    const Mat a = detail::to_mat_rowmajor(sized("A", n * n), en, en);
    const Vec c = doc.has(root, "c") ? detail::to_vec(sized("c", n)) : Vec::Zero(en);
    return make_linear(a, c);
  }
  throw InvalidInput("weights are only used by 'ctrnn' and 'linear', not '" + model + "'");
}

inline const std::vector<std::string>& registered_models() {
  static const std::vector<std::string> names = {"brusselator", "vanderpol", "dubins_car", "cardiac_cell",
                                                 "robotarm",    "ctrnn",     "linear"};
  return names;
}

// Look up a model by name. `weights_path` is required for ctrnn and linear.
inline VectorFieldPtr model_registry(const std::string& name, const ParamMap& params = {},
                                     const std::string& weights_path = {}) {
  using detail::check_params;
  using detail::param;
  if (name == "brusselator") {
    check_params(name, params, {"a", "b"});
    return make_field(name, models::Brusselator{param(params, "a", 1.0), param(params, "b", 1.5)});
  }
  if (name == "vanderpol") {
    check_params(name, params, {"mu"});
    return make_field(name, models::VanDerPol{param(params, "mu", 1.0)});
  }
  if (name == "dubins_car") {
    check_params(name, params, {"v", "u", "k"});
    return make_field(name, models::DubinsCar{param(params, "v", 1.0), param(params, "u", 0.0), param(params, "k", 0.0)});
  }
  if (name == "cardiac_cell") {
    check_params(name, params, {});
    return make_field(name, models::CardiacCell{});
  }
  if (name == "robotarm") {
    check_params(name, params, {"m", "ml", "kp1", "kp2", "kd1", "kd2", "qd1", "qd2"});
    models::Robotarm r;
    r.m = param(params, "m", r.m);
    r.ml = param(params, "ml", r.ml);
    r.kp1 = param(params, "kp1", r.kp1);
    r.kp2 = param(params, "kp2", r.kp2);
    r.kd1 = param(params, "kd1", r.kd1);
    r.kd2 = param(params, "kd2", r.kd2);
    r.qd1 = param(params, "qd1", r.qd1);
    r.qd2 = param(params, "qd2", r.qd2);
    if (!(r.m > 0.0) || !(r.ml > 0.0)) throw InvalidInput("robotarm: masses must be positive");
    return make_field(name, r);
  }
  if (name == "ctrnn" || name == "linear") {
    check_params(name, params, {});
    if (weights_path.empty()) throw InvalidInput(name + ": a weights file is required");
    return load_weights_model(name, KvDocument::load(weights_path));
  }
  throw InvalidInput("unknown model '" + name + "'");
}

}  // namespace reach
