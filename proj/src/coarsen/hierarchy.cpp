#include "gdlspg/coarsen/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gdlspg/coarsen/kmeans.hpp"
#include "gdlspg/core/eig.hpp"
#include "gdlspg/io/binio.hpp"

namespace gdlspg {

DenseMatrix AssignmentMatrix::apply(const DenseMatrix& x) const {
  if (x.rows() != n_fine) throw std::invalid_argument("AssignmentMatrix: row count mismatch");
  DenseMatrix out(members.size(), x.cols());
  for (std::size_t j = 0; j < members.size(); ++j) {
    for (int m : members[j])
      for (std::size_t c = 0; c < x.cols(); ++c) out(j, c) += x(m, c);
    const double w = 1.0 / static_cast<double>(members[j].size());
    for (std::size_t c = 0; c < x.cols(); ++c) out(j, c) *= w;
  }
  return out;
}

AssignmentMatrix assignment_from_labels(std::span<const int> labels, int k) {
  AssignmentMatrix s;
  s.n_fine = labels.size();
  s.members.assign(k, {});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || c >= k) throw std::invalid_argument("assignment_from_labels: label out of range");
    s.members[c].push_back(static_cast<int>(i));
  }
  for (const auto& m : s.members)
    if (m.empty()) throw std::invalid_argument("assignment_from_labels: empty cluster");
  return s;
}

double ratio_cut(const Graph& g, std::span<const int> labels, int k) {
  if (labels.size() != g.node_count()) throw std::invalid_argument("ratio_cut: label count mismatch");
  std::vector<std::size_t> size(k, 0), boundary(k, 0);
  for (int l : labels) {
    if (l < 0 || l >= k) throw std::invalid_argument("ratio_cut: label out of range");
    ++size[l];
  }
  for (const auto& [a, b] : g.edges)
    if (labels[a] != labels[b]) {
      ++boundary[labels[a]];
      ++boundary[labels[b]];
    }
  double sum = 0.0;
  for (int c = 0; c < k; ++c) {
    if (size[c] == 0) throw std::invalid_argument("ratio_cut: empty cluster");
    sum += static_cast<double>(boundary[c]) / static_cast<double>(size[c]);
  }
  return 0.5 * sum;
}

SpectralCoarsenResult spectral_coarsen_level(const Graph& g, std::size_t n_next, Rng& rng) {
  const std::size_t n = g.node_count();
  if (n_next < 1 || n_next >= n)
    throw std::invalid_argument("spectral_coarsen_level: need 1 <= n_next < n");

  SpectralCoarsenResult res;
  if (n_next == 1) {
    res.labels.assign(n, 0);
  } else {
    DenseMatrix lap(n, n);
    for (const auto& [a, b] : g.edges) {
      lap(a, b) -= 1.0;
      lap(b, a) -= 1.0;
      lap(a, a) += 1.0;
      lap(b, b) += 1.0;
    }
    const EigenDecomposition ed = symmetric_eig(lap);

    // embedding: the n_next-1 smallest eigenvectors, skipping the smallest
    res.features = DenseMatrix(n, n_next - 1);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n_next - 1; ++j) res.features(i, j) = ed.eigenvectors(i, j + 1);

    const KMeansResult km = kmeans(res.features, static_cast<int>(n_next), rng);
    res.labels = km.assignment;
    res.kmeans_iterations = km.iterations;
  }
  res.pool = assignment_from_labels(res.labels, static_cast<int>(n_next));
  res.ratio_cut_value = ratio_cut(g, res.labels, static_cast<int>(n_next));
  return res;
}

DenseMatrix rescale(const DenseMatrix& coarse_pos, const DenseMatrix& prev_pos) {
  if (coarse_pos.cols() != prev_pos.cols()) throw std::invalid_argument("rescale: dim mismatch");
  DenseMatrix out = coarse_pos;
  for (std::size_t d = 0; d < coarse_pos.cols(); ++d) {
    double clo = coarse_pos(0, d), chi = clo, plo = prev_pos(0, d), phi = plo;
    for (std::size_t i = 1; i < coarse_pos.rows(); ++i) {
      clo = std::min(clo, coarse_pos(i, d));
      chi = std::max(chi, coarse_pos(i, d));
    }
    for (std::size_t i = 1; i < prev_pos.rows(); ++i) {
      plo = std::min(plo, prev_pos(i, d));
      phi = std::max(phi, prev_pos(i, d));
    }
    if (chi > clo) {
      const double f = (phi - plo) / (chi - clo);
      for (std::size_t i = 0; i < out.rows(); ++i) out(i, d) = plo + (out(i, d) - clo) * f;
    } else {
      for (std::size_t i = 0; i < out.rows(); ++i) out(i, d) = 0.5 * (plo + phi);
    }
  }
  return out;
}

Hierarchy build_hierarchy(const DenseMatrix& pos0, const std::vector<std::size_t>& sizes,
                          const std::vector<double>& radii, std::uint64_t seed) {
  if (radii.size() != sizes.size() + 1)
    throw std::invalid_argument("build_hierarchy: need one radius per level");
  std::size_t prev = pos0.rows();
  for (std::size_t s : sizes) {
    if (s >= prev) throw std::invalid_argument("build_hierarchy: sizes must strictly decrease");
    prev = s;
  }

  Rng rng(seed);
  Hierarchy h;
  h.levels.reserve(sizes.size() + 1);
  {
    HierarchyLevel l0;
    l0.graph = radius_graph(pos0, radii[0]);
    l0.radius = radii[0];
    l0.isolated = isolated_count(l0.graph);
    h.levels.push_back(std::move(l0));
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    HierarchyLevel& fine = h.levels.back();
    SpectralCoarsenResult sc = spectral_coarsen_level(fine.graph, sizes[i], rng);
    fine.pool = std::move(sc.pool);
    fine.ratio_cut_value = sc.ratio_cut_value;

    HierarchyLevel next;
    const DenseMatrix pos = rescale(fine.pool.apply(fine.graph.pos), fine.graph.pos);
    next.graph = radius_graph(pos, radii[i + 1]);
    next.radius = radii[i + 1];
    next.isolated = isolated_count(next.graph);
    h.levels.push_back(std::move(next));
  }
  return h;
}

double line_graph_radius(double span, std::size_t n) {
  return span * 7.0 / (2.0 * static_cast<double>(n));
}

double disk_graph_radius(std::size_t n, double area) {
  return std::sqrt(9.0 * area / (3.14159265358979323846 * static_cast<double>(n)));
}

namespace {

constexpr std::uint32_t kHierarchyMagic = 0x59484447;  // "GDHY"
constexpr std::uint32_t kHierarchyVersion = 1;

void serialize(const Hierarchy& h, ByteSink& sink) {
  sink.u32(kHierarchyMagic);
  sink.u32(kHierarchyVersion);
  sink.u64(h.levels.size());
  for (const auto& l : h.levels) {
    sink.u64(l.graph.pos.rows());
    sink.u64(l.graph.pos.cols());
    sink.f64s(l.graph.pos.data());
    sink.f64(l.radius);
    sink.f64(l.ratio_cut_value);
    sink.u64(l.isolated);
    sink.u64(l.graph.edges.size());
    for (const auto& [a, b] : l.graph.edges) {
      sink.i64(a);
      sink.i64(b);
    }
    // pooling map in sparse triplet form
    std::size_t nnz = 0;
    for (const auto& m : l.pool.members) nnz += m.size();
    sink.u64(l.pool.members.size());
    sink.u64(nnz);
    for (std::size_t r = 0; r < l.pool.members.size(); ++r) {
      const double w = 1.0 / static_cast<double>(l.pool.members[r].size());
      for (int c : l.pool.members[r]) {
        sink.i64(static_cast<std::int64_t>(r));
        sink.i64(c);
        sink.f64(w);
      }
    }
  }
}

}  // namespace

void save_hierarchy(const Hierarchy& h, const std::string& path) {
  ByteSink sink;
  serialize(h, sink);
  atomic_write_bytes(path, sink.bytes());
}

Hierarchy load_hierarchy(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  ByteSource src(bytes);
  if (src.u32() != kHierarchyMagic) throw std::runtime_error(path + ": not a hierarchy file");
  if (src.u32() != kHierarchyVersion) throw std::runtime_error(path + ": unsupported hierarchy version");

  Hierarchy h;
  const std::uint64_t n_levels = src.u64();
  for (std::uint64_t li = 0; li < n_levels; ++li) {
    HierarchyLevel l;
    const std::uint64_t rows = src.u64();
    const std::uint64_t cols = src.u64();
    const Vector pos = src.f64s();
    if (pos.size() != rows * cols) throw std::runtime_error(path + ": corrupt position block");
    l.graph.pos = DenseMatrix(rows, cols);
    l.graph.pos.data() = pos;
    l.radius = src.f64();
    l.ratio_cut_value = src.f64();
    l.isolated = src.u64();
    const std::uint64_t n_edges = src.u64();
    l.graph.adj.assign(rows, {});
    for (std::uint64_t e = 0; e < n_edges; ++e) {
      const int a = static_cast<int>(src.i64());
      const int b = static_cast<int>(src.i64());
      if (a < 0 || b < 0 || a >= static_cast<int>(rows) || b >= static_cast<int>(rows))
        throw std::runtime_error(path + ": edge endpoint out of range");
      l.graph.edges.emplace_back(a, b);
      l.graph.adj[a].push_back(b);
      l.graph.adj[b].push_back(a);
    }
    for (auto& adj : l.graph.adj) std::sort(adj.begin(), adj.end());

    const std::uint64_t n_coarse = src.u64();
    const std::uint64_t nnz = src.u64();
    l.pool.n_fine = rows;
    l.pool.members.assign(n_coarse, {});
    for (std::uint64_t t = 0; t < nnz; ++t) {
      const auto r = src.i64();
      const auto c = src.i64();
      src.f64();  // weight is implied by the row size
      if (r < 0 || r >= static_cast<std::int64_t>(n_coarse) || c < 0 ||
          c >= static_cast<std::int64_t>(rows))
        throw std::runtime_error(path + ": pooling triplet out of range");
      l.pool.members[r].push_back(static_cast<int>(c));
    }
    h.levels.push_back(std::move(l));
  }
  if (!src.exhausted()) throw std::runtime_error(path + ": trailing bytes");
  return h;
}

std::uint64_t hierarchy_digest(const Hierarchy& h) {
  ByteSink sink;
  serialize(h, sink);
  return sink.digest();
}

}  // namespace gdlspg
