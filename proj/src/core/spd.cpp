#include "gdlspg/core/spd.hpp"

#include <cmath>
#include <stdexcept>

namespace gdlspg {

namespace {

// lower-triangular Cholesky factor in place; false if a pivot is not positive
bool cholesky(DenseMatrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    double s = a(k, k);
    for (std::size_t j = 0; j < k; ++j) s -= a(k, j) * a(k, j);
    if (!(s > 0.0) || !std::isfinite(s)) return false;
    const double lkk = std::sqrt(s);
    a(k, k) = lkk;
    for (std::size_t i = k + 1; i < n; ++i) {
      double t = a(i, k);
      for (std::size_t j = 0; j < k; ++j) t -= a(i, j) * a(k, j);
      a(i, k) = t / lkk;
    }
  }
  return true;
}

Vector cholesky_solve(const DenseMatrix& l, const Vector& b) {
  const std::size_t n = l.rows();
  Vector y(b);
  for (std::size_t i = 0; i < n; ++i) {
    double s = y[i];
    for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * y[j];
    y[i] = s / l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= l(j, i) * y[j];
    y[i] = s / l(i, i);
  }
  return y;
}

}  // namespace

Vector solve_spd(const DenseMatrix& m, const Vector& rhs) {
  if (m.empty() || m.rows() != m.cols())
    throw std::invalid_argument("solve_spd: matrix must be square and non-empty");
  if (m.rows() != rhs.size()) throw std::invalid_argument("solve_spd: rhs size mismatch");
  const std::size_t n = m.rows();

  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += m(i, i);
  double jitter = 1e-10 * trace / static_cast<double>(n);

  double lambda = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    DenseMatrix l(m);
    if (lambda > 0.0)
      for (std::size_t i = 0; i < n; ++i) l(i, i) += lambda;
    if (cholesky(l)) {
      Vector x = cholesky_solve(l, rhs);
      // one step of iterative refinement against the system that was factored
      Vector r(rhs);
      for (std::size_t i = 0; i < n; ++i) {
        const double* mi = m.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += mi[j] * x[j];
        r[i] -= s + lambda * x[i];
      }
      const Vector dx = cholesky_solve(l, r);
      for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
      return x;
    }
    lambda = (lambda == 0.0) ? jitter : lambda * 10.0;
    if (lambda == 0.0) break;  // zero trace leaves nothing to escalate
  }
  throw std::runtime_error("solve_spd: matrix not positive definite, jitter retries exhausted");
}

}  // namespace gdlspg
