#include "gdlspg/mesh/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "gdlspg/io/binio.hpp"

namespace gdlspg {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double signed_area(const std::array<double, 2>& a, const std::array<double, 2>& b,
                   const std::array<double, 2>& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

// shared quad-grid builder; promoted quads get a center vertex and 4 triangles
Mesh quad_grid(int nx, int ny, double lx, double ly, const std::vector<char>& promote) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("quad grid: nx and ny must be positive");
  std::vector<std::array<double, 2>> verts;
  verts.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  const double dx = lx / nx, dy = ly / ny;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) verts.push_back({i * dx, j * dy});
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  std::vector<std::array<int, 3>> cells;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      if (!promote.empty() && promote[static_cast<std::size_t>(j) * nx + i]) {
        const int m = static_cast<int>(verts.size());
        verts.push_back({(i + 0.5) * dx, (j + 0.5) * dy});
        cells.push_back({a, b, m});
        cells.push_back({b, c, m});
        cells.push_back({c, d, m});
        cells.push_back({d, a, m});
      } else {
        cells.push_back({a, b, c});
        cells.push_back({a, c, d});
      }
    }

  std::vector<std::array<int, 3>> segs;
  for (int i = 0; i < nx; ++i) {
    segs.push_back({vid(i, 0), vid(i + 1, 0), 2});    // bottom
    segs.push_back({vid(i, ny), vid(i + 1, ny), 3});  // top
  }
  for (int j = 0; j < ny; ++j) {
    segs.push_back({vid(0, j), vid(0, j + 1), 0});     // left
    segs.push_back({vid(nx, j), vid(nx, j + 1), 1});   // right
  }
  return make_mesh(std::move(verts), std::move(cells), segs, {"left", "right", "bottom", "top"});
}

}  // namespace

int Mesh::tag_id(const std::string& name) const {
  for (std::size_t i = 0; i < tag_names.size(); ++i)
    if (tag_names[i] == name) return static_cast<int>(i);
  return -1;
}

Mesh make_mesh(std::vector<std::array<double, 2>> vertices, std::vector<std::array<int, 3>> cells,
               const std::vector<std::array<int, 3>>& boundary_segments,
               std::vector<std::string> tag_names) {
  Mesh m;
  m.vertices = std::move(vertices);
  m.cells = std::move(cells);
  m.tag_names = std::move(tag_names);
  const int nv = static_cast<int>(m.vertices.size());

  m.centers.resize(m.cells.size());
  m.areas.resize(m.cells.size());
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    auto& tri = m.cells[c];
    for (int v : tri)
      if (v < 0 || v >= nv) throw std::invalid_argument("make_mesh: vertex id out of range");
    double a = signed_area(m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]);
    if (a < 0.0) {  // enforce counter-clockwise orientation
      std::swap(tri[1], tri[2]);
      a = -a;
    }
    if (!(a > 0.0)) throw std::invalid_argument("make_mesh: degenerate triangle");
    m.areas[c] = a;
    m.centers[c] = {(m.vertices[tri[0]][0] + m.vertices[tri[1]][0] + m.vertices[tri[2]][0]) / 3.0,
                    (m.vertices[tri[0]][1] + m.vertices[tri[1]][1] + m.vertices[tri[2]][1]) / 3.0};
  }

  std::unordered_map<std::uint64_t, int> face_of;
  face_of.reserve(m.cells.size() * 2);
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    const auto& tri = m.cells[c];
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e], b = tri[(e + 1) % 3];
      const auto [it, fresh] = face_of.try_emplace(edge_key(a, b), static_cast<int>(m.faces.size()));
      if (fresh) {
        Face f;
        f.v0 = a;
        f.v1 = b;
        f.left = static_cast<int>(c);
        m.faces.push_back(f);
      } else {
        Face& f = m.faces[it->second];
        if (f.right != -1) throw std::invalid_argument("make_mesh: face shared by more than two cells");
        f.right = static_cast<int>(c);
      }
    }
  }

  std::unordered_map<std::uint64_t, int> seg_tag;
  for (const auto& s : boundary_segments) {
    if (s[2] < 0 || s[2] >= static_cast<int>(m.tag_names.size()))
      throw std::invalid_argument("make_mesh: boundary tag id out of range");
    seg_tag[edge_key(s[0], s[1])] = s[2];
  }

  m.cell_faces.resize(m.cells.size());
  for (std::size_t fi = 0; fi < m.faces.size(); ++fi) {
    Face& f = m.faces[fi];
    const auto& p = m.vertices[f.v0];
    const auto& q = m.vertices[f.v1];
    const double tx = q[0] - p[0], ty = q[1] - p[1];
    f.length = std::hypot(tx, ty);
    f.nx = ty / f.length;
    f.ny = -tx / f.length;
    const double mx = 0.5 * (p[0] + q[0]) - m.centers[f.left][0];
    const double my = 0.5 * (p[1] + q[1]) - m.centers[f.left][1];
    if (f.nx * mx + f.ny * my < 0.0) {
      f.nx = -f.nx;
      f.ny = -f.ny;
    }

    if (f.right == -1) {
      const auto it = seg_tag.find(edge_key(f.v0, f.v1));
      if (it == seg_tag.end()) throw std::invalid_argument("make_mesh: untagged boundary face");
      f.tag = it->second;
    } else if (seg_tag.count(edge_key(f.v0, f.v1))) {
      throw std::invalid_argument("make_mesh: boundary segment matches an interior face");
    }

    m.cell_faces[f.left].push_back(static_cast<int>(fi));
    if (f.right != -1) m.cell_faces[f.right].push_back(static_cast<int>(fi));
  }
  for (auto& cf : m.cell_faces)
    if (cf.size() != 3) throw std::invalid_argument("make_mesh: cell without three faces");
  return m;
}

Mesh square_tri_mesh(int n) { return quad_grid(n, n, 1.0, 1.0, {}); }

Mesh strip_mesh(int nx, int ny, double lx, double ly) { return quad_grid(nx, ny, lx, ly, {}); }

Mesh square_tri_mesh_with_count(int target) {
  if (target < 8 || target % 2 != 0)
    throw std::invalid_argument("square_tri_mesh_with_count: target must be even and >= 8");
  int n = static_cast<int>(std::sqrt(target / 2.0));
  while (2 * n * n > target) --n;
  const int n_quads = n * n;
  const int n_promote = (target - 2 * n_quads) / 2;
  if (n_promote > n_quads)
    throw std::invalid_argument("square_tri_mesh_with_count: target out of reach");

  std::vector<char> promote(n_quads, 0);
  if (n_promote > 0) {
    const int stride = n_quads / n_promote;
    for (int k = 0; k < n_promote; ++k) promote[static_cast<std::size_t>(k) * stride] = 1;
  }
  return quad_grid(n, n, 1.0, 1.0, promote);
}

Mesh cylinder_sector_mesh(int nr, int ntheta, double r_in, double r_out) {
  if (nr < 1 || ntheta < 1 || !(r_in > 0.0) || !(r_out > r_in))
    throw std::invalid_argument("cylinder_sector_mesh: bad parameters");
  const double pi = 3.14159265358979323846;
  std::vector<std::array<double, 2>> verts;
  for (int t = 0; t <= ntheta; ++t)
    for (int k = 0; k <= nr; ++k) {
      const double r = r_in + (r_out - r_in) * k / nr;
      const double th = 0.5 * pi + pi * t / ntheta;  // upstream half, facing -x
      verts.push_back({r * std::cos(th), r * std::sin(th)});
    }
  auto vid = [nr](int k, int t) { return t * (nr + 1) + k; };

  std::vector<std::array<int, 3>> cells;
  for (int t = 0; t < ntheta; ++t)
    for (int k = 0; k < nr; ++k) {
      const int a = vid(k, t), b = vid(k + 1, t), c = vid(k + 1, t + 1), d = vid(k, t + 1);
      cells.push_back({a, b, c});
      cells.push_back({a, c, d});
    }

  std::vector<std::array<int, 3>> segs;
  for (int t = 0; t < ntheta; ++t) {
    segs.push_back({vid(0, t), vid(0, t + 1), 0});    // wall on the cylinder
    segs.push_back({vid(nr, t), vid(nr, t + 1), 1});  // inflow on the outer arc
  }
  for (int k = 0; k < nr; ++k) {
    segs.push_back({vid(k, 0), vid(k + 1, 0), 2});            // outflow cuts
    segs.push_back({vid(k, ntheta), vid(k + 1, ntheta), 2});
  }
  return make_mesh(std::move(verts), std::move(cells), segs, {"wall", "inflow", "outflow"});
}

std::uint64_t mesh_digest(const Mesh& m) {
  ByteSink sink;
  sink.u64(m.vertices.size());
  for (const auto& v : m.vertices) {
    sink.f64(v[0]);
    sink.f64(v[1]);
  }
  sink.u64(m.cells.size());
  for (const auto& c : m.cells)
    for (int v : c) sink.i64(v);
  sink.u64(m.tag_names.size());
  for (const auto& n : m.tag_names) sink.str(n);
  for (const auto& f : m.faces)
    if (f.right == -1) {
      sink.i64(f.v0);
      sink.i64(f.v1);
      sink.i64(f.tag);
    }
  return sink.digest();
}

}  // namespace gdlspg
