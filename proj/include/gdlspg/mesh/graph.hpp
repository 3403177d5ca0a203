#pragma once

#include <span>
#include <utility>
#include <vector>

#include "gdlspg/core/dense.hpp"
#include "gdlspg/mesh/mesh.hpp"

namespace gdlspg {

struct Graph {
  DenseMatrix pos;                         // N x d node positions
  std::vector<std::pair<int, int>> edges;  // first < second, lexicographically sorted
  std::vector<std::vector<int>> adj;       // ascending neighbor lists

  std::size_t node_count() const { return pos.rows(); }
};

// Connects every pair of nodes within distance r (inclusive). Nodes with no
// neighbor stay isolated; callers can inspect isolated_count.
Graph radius_graph(const DenseMatrix& pos, double r);
std::size_t isolated_count(const Graph& g);

// Graph over the cell centers of a mesh.
Graph mesh_center_graph(const Mesh& m, double r);

// State vector <-> node feature matrix (nodes are rows, features interleaved
// per node in the vector layout).
DenseMatrix matricize(std::span<const double> state, std::size_t n_nodes, std::size_t nq);
Vector vectorize(const DenseMatrix& x);

// Per-feature min/max frozen from the training set.
struct ScaleStats {
  Vector mins, maxs;
};

ScaleStats compute_scale_stats(std::span<const Vector> states, std::size_t nq);

// Maps feature j to (x - min_j) / (max_j - min_j); constant features go to 0.
void scale_inplace(DenseMatrix& x, const ScaleStats& s);
// Inverse map; constant features go back to min_j.
void inv_scale_inplace(DenseMatrix& x, const ScaleStats& s);

namespace kernels {
// neighbor lists restricted to j > i; flattening them yields the edge set
void radius_scan_serial(const DenseMatrix& pos, double r, std::vector<std::vector<int>>& above);
void radius_scan_omp(const DenseMatrix& pos, double r, std::vector<std::vector<int>>& above);
}  // namespace kernels

}  // namespace gdlspg
