#include "gdlspg/mesh/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gdlspg {

namespace kernels {

namespace {
inline bool within(const DenseMatrix& pos, std::size_t i, std::size_t j, double r2) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < pos.cols(); ++k) {
    const double d = pos(i, k) - pos(j, k);
    d2 += d * d;
  }
  return d2 <= r2;
}
}  // namespace

void radius_scan_serial(const DenseMatrix& pos, double r, std::vector<std::vector<int>>& above) {
  const std::size_t n = pos.rows();
  const double r2 = r * r;
  above.assign(n, {});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (within(pos, i, j, r2)) above[i].push_back(static_cast<int>(j));
}

void radius_scan_omp(const DenseMatrix& pos, double r, std::vector<std::vector<int>>& above) {
  const std::size_t n = pos.rows();
  const double r2 = r * r;
  above.assign(n, {});
#pragma omp parallel for schedule(dynamic, 64) if (n > 512)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (within(pos, i, j, r2)) above[i].push_back(static_cast<int>(j));
}

}  // namespace kernels

Graph radius_graph(const DenseMatrix& pos, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("radius_graph: radius must be non-negative");
  Graph g;
  g.pos = pos;
  std::vector<std::vector<int>> above;
  kernels::radius_scan_omp(pos, r, above);

  const std::size_t n = pos.rows();
  g.adj.assign(n, {});
  for (std::size_t i = 0; i < n; ++i)
    for (int j : above[i]) {
      g.edges.emplace_back(static_cast<int>(i), j);
      g.adj[i].push_back(j);
      g.adj[j].push_back(static_cast<int>(i));
    }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

std::size_t isolated_count(const Graph& g) {
  std::size_t n = 0;
  for (const auto& a : g.adj)
    if (a.empty()) ++n;
  return n;
}

Graph mesh_center_graph(const Mesh& m, double r) {
  DenseMatrix pos(m.cell_count(), 2);
  for (std::size_t i = 0; i < m.cell_count(); ++i) {
    pos(i, 0) = m.centers[i][0];
    pos(i, 1) = m.centers[i][1];
  }
  return radius_graph(pos, r);
}

DenseMatrix matricize(std::span<const double> state, std::size_t n_nodes, std::size_t nq) {
  if (state.size() != n_nodes * nq) throw std::invalid_argument("matricize: size mismatch");
  DenseMatrix x(n_nodes, nq);
  std::copy(state.begin(), state.end(), x.data().begin());
  return x;
}

Vector vectorize(const DenseMatrix& x) { return x.data(); }

ScaleStats compute_scale_stats(std::span<const Vector> states, std::size_t nq) {
  if (states.empty()) throw std::invalid_argument("compute_scale_stats: no states");
  ScaleStats s;
  s.mins.assign(nq, std::numeric_limits<double>::infinity());
  s.maxs.assign(nq, -std::numeric_limits<double>::infinity());
  for (const Vector& st : states) {
    if (st.size() % nq != 0) throw std::invalid_argument("compute_scale_stats: state size mismatch");
    for (std::size_t i = 0; i < st.size(); ++i) {
      const std::size_t q = i % nq;
      s.mins[q] = std::min(s.mins[q], st[i]);
      s.maxs[q] = std::max(s.maxs[q], st[i]);
    }
  }
  return s;
}

void scale_inplace(DenseMatrix& x, const ScaleStats& s) {
  if (x.cols() != s.mins.size()) throw std::invalid_argument("scale: feature count mismatch");
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const double span = s.maxs[j] - s.mins[j];
    for (std::size_t i = 0; i < x.rows(); ++i)
      x(i, j) = span > 0.0 ? (x(i, j) - s.mins[j]) / span : 0.0;
  }
}

void inv_scale_inplace(DenseMatrix& x, const ScaleStats& s) {
  if (x.cols() != s.mins.size()) throw std::invalid_argument("inv_scale: feature count mismatch");
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const double span = s.maxs[j] - s.mins[j];
    for (std::size_t i = 0; i < x.rows(); ++i)
      x(i, j) = span > 0.0 ? x(i, j) * span + s.mins[j] : s.mins[j];
  }
}

}  // namespace gdlspg
