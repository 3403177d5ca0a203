#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace gdlspg {

struct Face {
  int v0 = -1, v1 = -1;       // vertex ids
  int left = -1, right = -1;  // cell ids; right == -1 on the boundary
  double nx = 0.0, ny = 0.0;  // unit normal pointing out of `left`
  double length = 0.0;
  int tag = -1;  // boundary tag id; -1 for interior faces
};

// 2D triangulated finite volume mesh. Triangles are counter-clockwise, every
// interior face is shared by exactly two cells, every boundary face is tagged.
struct Mesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<Face> faces;
  std::vector<std::array<double, 2>> centers;  // cell centroids
  std::vector<double> areas;
  std::vector<std::vector<int>> cell_faces;  // per cell, ascending face ids
  std::vector<std::string> tag_names;        // boundary tag id -> name

  std::size_t cell_count() const { return cells.size(); }
  int tag_id(const std::string& name) const;
};

// Builds derived data (faces, centers, areas) from vertices/cells plus the
// tagged boundary segments, validating the mesh invariants along the way.
Mesh make_mesh(std::vector<std::array<double, 2>> vertices, std::vector<std::array<int, 3>> cells,
               const std::vector<std::array<int, 3>>& boundary_segments,  // v0, v1, tag id
               std::vector<std::string> tag_names);

// Unit square, n x n quads each split along the diagonal: 2n^2 cells.
// Boundary tags: left, right, bottom, top.
Mesh square_tri_mesh(int n);

// Rectangle [0,lx] x [0,ly] as nx x ny quads split into triangles.
Mesh strip_mesh(int nx, int ny, double lx, double ly);

// Unit square with an exact triangle count: starts from the largest n x n quad
// grid with 2n^2 <= target and promotes evenly spread quads to four-triangle
// fans (two extra cells each). target must be even and >= 8.
Mesh square_tri_mesh_with_count(int target);

// Annular sector upstream of a cylinder (the leading-edge region): nr x ntheta
// polar quads between radii r_in and r_out over the angle range facing -x,
// split into 2*nr*ntheta triangles. Tags: wall (inner arc), inflow (outer
// arc), outflow (the two straight cuts).
Mesh cylinder_sector_mesh(int nr, int ntheta, double r_in, double r_out);

// Digest of the mesh geometry and tags, used to bind snapshot files to the
// mesh they were computed on.
std::uint64_t mesh_digest(const Mesh& m);

}  // namespace gdlspg
