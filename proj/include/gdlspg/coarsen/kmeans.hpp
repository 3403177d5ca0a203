#pragma once

#include <vector>

#include "gdlspg/core/dense.hpp"
#include "gdlspg/core/rng.hpp"

namespace gdlspg {

struct KMeansResult {
  std::vector<int> assignment;  // per input row, in [0, k)
  DenseMatrix centroids;        // k x d
  int iterations = 0;
};

// Lloyd iterations with k-means++ seeding. Ties in the nearest-centroid test
// go to the lowest cluster id; a cluster that empties out is reseeded with the
// point farthest from its current centroid. Deterministic for a fixed seed.
KMeansResult kmeans(const DenseMatrix& points, int k, Rng& rng, int max_iter = 300);

namespace kernels {
// nearest centroid per point plus squared distance to it
void kmeans_assign_serial(const DenseMatrix& points, const DenseMatrix& centroids,
                          std::vector<int>& assignment, std::vector<double>& dist2);
void kmeans_assign_omp(const DenseMatrix& points, const DenseMatrix& centroids,
                       std::vector<int>& assignment, std::vector<double>& dist2);
}  // namespace kernels

}  // namespace gdlspg
