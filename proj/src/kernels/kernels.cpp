#include "gdlspg/kernels/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gdlspg::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void matmul_serial(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = out.row(i);
    for (std::size_t j = 0; j < m; ++j) oi[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      const double* bp = b.row(p);
      for (std::size_t j = 0; j < m; ++j) oi[j] += aip * bp[j];
    }
  }
}

void matmul_omp(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
#pragma omp parallel for schedule(static) if (n * k * m > 32768)
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = out.row(i);
    for (std::size_t j = 0; j < m; ++j) oi[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      const double* bp = b.row(p);
      for (std::size_t j = 0; j < m; ++j) oi[j] += aip * bp[j];
    }
  }
}

void matmul_tn_serial(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = out.row(i);
    for (std::size_t j = 0; j < m; ++j) oi[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double api = a(p, i);
      const double* bp = b.row(p);
      for (std::size_t j = 0; j < m; ++j) oi[j] += api * bp[j];
    }
  }
}

void matmul_tn_omp(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
#pragma omp parallel for schedule(static) if (n * k * m > 32768)
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = out.row(i);
    for (std::size_t j = 0; j < m; ++j) oi[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double api = a(p, i);
      const double* bp = b.row(p);
      for (std::size_t j = 0; j < m; ++j) oi[j] += api * bp[j];
    }
  }
}

void matvec_serial(const DenseMatrix& a, const double* x, double* y) {
  const std::size_t n = a.rows(), m = a.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += ai[j] * x[j];
    y[i] = s;
  }
}

void matvec_omp(const DenseMatrix& a, const double* x, double* y) {
  const std::size_t n = a.rows(), m = a.cols();
#pragma omp parallel for schedule(static) if (n * m > 65536)
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += ai[j] * x[j];
    y[i] = s;
  }
}

}  // namespace gdlspg::kernels
