#include "gdlspg/core/diff.hpp"

#include <stdexcept>

namespace gdlspg {

DenseMatrix jacobian(const DifferentiableMap& f, std::span<const double> x) {
  if (x.size() != f.input_dim()) throw std::invalid_argument("jacobian: input size mismatch");
  const std::size_t n = f.input_dim(), m = f.output_dim();
  Vector out(m);
  DenseMatrix jac(m, n);
  f.eval_tangents(x, DenseMatrix::identity(n), out, jac);
  return jac;
}

DenseMatrix fd_jacobian(const DifferentiableMap& f, std::span<const double> x, double h) {
  if (x.size() != f.input_dim()) throw std::invalid_argument("fd_jacobian: input size mismatch");
  const std::size_t n = f.input_dim(), m = f.output_dim();
  DenseMatrix jac(m, n);
  Vector xp(x.begin(), x.end()), plus(m), minus(m);
  for (std::size_t j = 0; j < n; ++j) {
    const double xj = xp[j];
    xp[j] = xj + h;
    f.eval(xp, plus);
    xp[j] = xj - h;
    f.eval(xp, minus);
    xp[j] = xj;
    for (std::size_t i = 0; i < m; ++i) jac(i, j) = (plus[i] - minus[i]) / (2.0 * h);
  }
  return jac;
}

}  // namespace gdlspg
