#pragma once

#include <span>

#include "gdlspg/core/dense.hpp"

namespace gdlspg {

// A map R^n -> R^m that can push tangent directions through itself exactly
// (forward mode). dirs is n x k; out_dirs is filled as m x k.
struct DifferentiableMap {
  virtual ~DifferentiableMap() = default;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual void eval(std::span<const double> x, std::span<double> out) const = 0;
  virtual void eval_tangents(std::span<const double> x, const DenseMatrix& dirs,
                             std::span<double> out, DenseMatrix& out_dirs) const = 0;
};

// Exact Jacobian: identity tangent directions pushed forward.
DenseMatrix jacobian(const DifferentiableMap& f, std::span<const double> x);

// Central-difference Jacobian, the independent check used by the tests.
DenseMatrix fd_jacobian(const DifferentiableMap& f, std::span<const double> x, double h = 1e-6);

}  // namespace gdlspg
