#include "gdlspg/coarsen/kmeans.hpp"

#include <limits>
#include <stdexcept>

namespace gdlspg {

namespace kernels {

namespace {
inline double dist2_row(const DenseMatrix& a, std::size_t i, const DenseMatrix& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double d = a(i, k) - b(j, k);
    s += d * d;
  }
  return s;
}
}  // namespace

void kmeans_assign_serial(const DenseMatrix& points, const DenseMatrix& centroids,
                          std::vector<int>& assignment, std::vector<double>& dist2) {
  const std::size_t n = points.rows(), k = centroids.rows();
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double bd = dist2_row(points, i, centroids, 0);
    for (std::size_t c = 1; c < k; ++c) {
      const double d = dist2_row(points, i, centroids, c);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(c);
      }
    }
    assignment[i] = best;
    dist2[i] = bd;
  }
}

void kmeans_assign_omp(const DenseMatrix& points, const DenseMatrix& centroids,
                       std::vector<int>& assignment, std::vector<double>& dist2) {
  const std::size_t n = points.rows(), k = centroids.rows();
#pragma omp parallel for schedule(static) if (n * k > 4096)
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double bd = dist2_row(points, i, centroids, 0);
    for (std::size_t c = 1; c < k; ++c) {
      const double d = dist2_row(points, i, centroids, c);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(c);
      }
    }
    assignment[i] = best;
    dist2[i] = bd;
  }
}

}  // namespace kernels

KMeansResult kmeans(const DenseMatrix& points, int k, Rng& rng, int max_iter) {
  const std::size_t n = points.rows(), d = points.cols();
  if (k < 1) throw std::invalid_argument("kmeans: k must be positive");
  if (static_cast<std::size_t>(k) > n) throw std::invalid_argument("kmeans: more clusters than points");

  KMeansResult res;
  res.centroids = DenseMatrix(k, d);
  auto set_centroid = [&](int c, std::size_t i) {
    for (std::size_t j = 0; j < d; ++j) res.centroids(c, j) = points(i, j);
  };

  // k-means++ seeding: squared-distance weighted draws from the raw stream
  std::vector<double> d2(n, 0.0);
  set_centroid(0, rng.below(n));
  for (std::size_t i = 0; i < n; ++i) d2[i] = kernels::dist2_row(points, i, res.centroids, 0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick;
    if (total > 0.0) {
      const double t = rng.next_double() * total;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum > t) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);  // every point already coincides with a centroid
    }
    set_centroid(c, pick);
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], kernels::dist2_row(points, i, res.centroids, c));
  }

  res.assignment.assign(n, -1);
  std::vector<int> prev(n, -1);
  std::vector<std::size_t> counts(k);
  for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
    kernels::kmeans_assign_omp(points, res.centroids, res.assignment, d2);

    counts.assign(k, 0);
    for (int a : res.assignment) ++counts[a];
    bool repaired = false;
    std::vector<char> moved(n, 0);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = n;
      double best = -1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (!moved[i] && counts[res.assignment[i]] > 1 && d2[i] > best) {
          best = d2[i];
          far = i;
        }
      if (far == n) throw std::runtime_error("kmeans: cannot repair empty cluster");
      --counts[res.assignment[far]];
      res.assignment[far] = c;
      ++counts[c];
      moved[far] = 1;
      repaired = true;
    }

    if (!repaired && res.assignment == prev) break;
    prev = res.assignment;

    res.centroids.fill(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = res.assignment[i];
      for (std::size_t j = 0; j < d; ++j) res.centroids(c, j) += points(i, j);
    }
    for (int c = 0; c < k; ++c)
      for (std::size_t j = 0; j < d; ++j) res.centroids(c, j) /= static_cast<double>(counts[c]);
  }
  return res;
}

}  // namespace gdlspg
