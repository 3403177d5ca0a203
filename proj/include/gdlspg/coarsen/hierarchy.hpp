#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdlspg/core/dense.hpp"
#include "gdlspg/core/rng.hpp"
#include "gdlspg/mesh/graph.hpp"

namespace gdlspg {

// Mean-pool map onto coarse nodes: row j of apply(x) is the average of the
// x-rows listed in members[j]. members partition the fine node set.
struct AssignmentMatrix {
  std::size_t n_fine = 0;
  std::vector<std::vector<int>> members;

  DenseMatrix apply(const DenseMatrix& x) const;
  bool empty() const { return members.empty(); }
};

AssignmentMatrix assignment_from_labels(std::span<const int> labels, int k);

// Sum over clusters of (boundary edge count / cluster size) / 2. Clusters must
// all be non-empty.
double ratio_cut(const Graph& g, std::span<const int> labels, int k);

struct SpectralCoarsenResult {
  std::vector<int> labels;
  AssignmentMatrix pool;
  DenseMatrix features;  // spectral embedding rows that were clustered
  double ratio_cut_value = 0.0;
  int kmeans_iterations = 0;
};

// One coarsening step: graph Laplacian, the n_next-1 smallest-eigenvalue
// eigenvectors excluding the very smallest, k-means on their rows.
SpectralCoarsenResult spectral_coarsen_level(const Graph& g, std::size_t n_next, Rng& rng);

// Affine per-dimension map of coarse positions onto the previous level's
// bounding box; a dimension with zero extent lands on the box midpoint.
DenseMatrix rescale(const DenseMatrix& coarse_pos, const DenseMatrix& prev_pos);

struct HierarchyLevel {
  Graph graph;
  double radius = 0.0;
  AssignmentMatrix pool;        // onto the next level; empty on the last
  double ratio_cut_value = -1.0;  // diagnostic for the split below this level
  std::size_t isolated = 0;
};

struct Hierarchy {
  std::vector<HierarchyLevel> levels;
  std::size_t level_count() const { return levels.size(); }
};

// sizes are the strictly decreasing coarse node counts (level 0 is pos0);
// radii has one entry per level including level 0.
Hierarchy build_hierarchy(const DenseMatrix& pos0, const std::vector<std::size_t>& sizes,
                          const std::vector<double>& radii, std::uint64_t seed);

// Radius heuristics: about 7 neighbors per node on a line of given span,
// about 9 per node on a domain of given area.
double line_graph_radius(double span, std::size_t n);
double disk_graph_radius(std::size_t n, double area = 1.0);

void save_hierarchy(const Hierarchy& h, const std::string& path);
Hierarchy load_hierarchy(const std::string& path);
std::uint64_t hierarchy_digest(const Hierarchy& h);

}  // namespace gdlspg
