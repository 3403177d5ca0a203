#pragma once

#include "gdlspg/core/dense.hpp"

namespace gdlspg {

// Cholesky solve for symmetric positive definite systems. If factorization
// fails, a diagonal jitter of 1e-10 * trace/n is added and escalated tenfold,
// at most three times, before giving up.
Vector solve_spd(const DenseMatrix& m, const Vector& rhs);

}  // namespace gdlspg
