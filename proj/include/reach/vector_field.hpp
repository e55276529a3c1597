#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>

#include "reach/interval_matrix.hpp"
#include "reach/linalg.hpp"

namespace reach {

// An autonomous ODE ẋ = f(x) with analytic Jacobian and interval extensions of both.
class VectorField {
 public:
  virtual ~VectorField() = default;

  virtual std::size_t dim() const = 0;
  virtual const std::string& name() const = 0;

  // dx ← f(x); both of length dim().
  virtual void eval(const double* x, double* dx) const = 0;
  // jac ← ∂f/∂x, row-major dim()×dim().
  virtual void jacobian(const double* x, double* jac) const = 0;

  virtual IVector interval_eval(const IVector& x) const = 0;
  virtual IMatrix interval_jacobian(const IVector& x) const = 0;

  Vec operator()(const Vec& x) const {
    check(x);
    Vec dx(x.size());
    eval(x.data(), dx.data());
    return dx;
  }

  Mat jacobian(const Vec& x) const {
    check(x);
    const auto n = static_cast<Eigen::Index>(dim());
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> j(n, n);
    jacobian(x.data(), j.data());
    return j;
  }

 private:
  void check(const Vec& x) const {
    if (static_cast<std::size_t>(x.size()) != dim()) throw DimensionError(name() + ": state dimension mismatch");
  }
};

using VectorFieldPtr = std::shared_ptr<const VectorField>;

// Adapts a model type providing
//   std::size_t dim() const;
//   template <class T> void rhs(const T* x, T* dx) const;
//   template <class T> void jac(const T* x, T* j) const;   // row-major
// so that one templated definition yields both point and interval evaluations.
template <class Model>
class ModelField final : public VectorField {
 public:
  ModelField(std::string name, Model model) : name_(std::move(name)), model_(std::move(model)) {}

  std::size_t dim() const override { return model_.dim(); }
  const std::string& name() const override { return name_; }
  const Model& model() const { return model_; }

  void eval(const double* x, double* dx) const override { model_.template rhs<double>(x, dx); }
  void jacobian(const double* x, double* jac) const override { model_.template jac<double>(x, jac); }
  using VectorField::jacobian;

  IVector interval_eval(const IVector& x) const override {
    const std::size_t n = dim();
    if (x.size() != n) throw DimensionError(name_ + ": interval state dimension mismatch");
    std::vector<Interval> in(x.begin(), x.end());
    std::vector<Interval> out(n, Interval(0.0));
    model_.template rhs<Interval>(in.data(), out.data());
    return IVector(std::move(out));
  }

  IMatrix interval_jacobian(const IVector& x) const override {
    const std::size_t n = dim();
    if (x.size() != n) throw DimensionError(name_ + ": interval state dimension mismatch");
    std::vector<Interval> in(x.begin(), x.end());
    std::vector<Interval> j(n * n, Interval(0.0));
    model_.template jac<Interval>(in.data(), j.data());
    IMatrix out(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) out(r, c) = j[r * n + c];
    return out;
  }

 private:
  std::string name_;
  Model model_;
};

template <class Model>
VectorFieldPtr make_field(std::string name, Model model) {
  return std::make_shared<ModelField<Model>>(std::move(name), std::move(model));
}

}  // namespace reach
