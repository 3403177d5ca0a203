#pragma once

#include "gdlspg/core/dense.hpp"

namespace gdlspg {

struct EigenDecomposition {
  Vector eigenvalues;        // ascending
  DenseMatrix eigenvectors;  // columns, ordered to match eigenvalues
};

// Dense symmetric eigensolver: Householder tridiagonalization followed by
// implicit QL with shifts. Input must be symmetric to 1e-12 relative; the
// result is a pure function of the input bytes.
EigenDecomposition symmetric_eig(const DenseMatrix& m);

}  // namespace gdlspg
