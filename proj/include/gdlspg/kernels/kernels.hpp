#pragma once

#include <cstddef>

#include "gdlspg/core/dense.hpp"

// Hot loops, each with a serial reference twin. The parallel variants split
// work so that every output element is produced by exactly one thread with the
// same inner summation order as the serial code, so results are bitwise equal.
namespace gdlspg::kernels {

void matmul_serial(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
void matmul_omp(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

void matmul_tn_serial(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
void matmul_tn_omp(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

void matvec_serial(const DenseMatrix& a, const double* x, double* y);
void matvec_omp(const DenseMatrix& a, const double* x, double* y);

int max_threads();

}  // namespace gdlspg::kernels
