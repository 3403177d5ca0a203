#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gdlspg/core/dense.hpp"

namespace gdlspg {

struct PODBasis {
  DenseMatrix phi;         // N x M, orthonormal columns
  Vector singular_values;  // all min(N, n_snapshots) values, descending
};

// Truncated left singular vectors of the snapshot matrix via one-sided
// Jacobi rotations applied along the smaller dimension. Column signs are
// fixed so the largest-magnitude entry of each basis vector is positive.
PODBasis pod_basis(const std::vector<Vector>& snapshots, std::size_t m);

// sqrt(sum ||(I - phi phi^T) x^n||^2) / sqrt(sum ||x^n||^2)
double pod_reconstruction_error(const std::vector<Vector>& snapshots, const DenseMatrix& phi);

Vector pod_encode(const PODBasis& basis, std::span<const double> x);

void save_pod_basis(const std::string& path, const PODBasis& basis);
PODBasis load_pod_basis(const std::string& path);

}  // namespace gdlspg
