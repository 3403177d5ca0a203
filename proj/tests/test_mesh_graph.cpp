#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gdlspg/core/rng.hpp"
#include "gdlspg/mesh/gmsh.hpp"
#include "gdlspg/mesh/graph.hpp"
#include "gdlspg/mesh/mesh.hpp"

using namespace gdlspg;

namespace {

void check_mesh_invariants(const Mesh& m, double expected_area) {
  double total = 0.0;
  for (double a : m.areas) {
    CHECK(a > 0.0);
    total += a;
  }
  CHECK(total == doctest::Approx(expected_area).epsilon(1e-12));

  for (const auto& f : m.faces) {
    CHECK(std::abs(std::hypot(f.nx, f.ny) - 1.0) < 1e-12);
    CHECK(f.left >= 0);
    if (f.right == -1) CHECK(f.tag >= 0);
    // normal points from the left cell towards the face
    const double mx = 0.5 * (m.vertices[f.v0][0] + m.vertices[f.v1][0]);
    const double my = 0.5 * (m.vertices[f.v0][1] + m.vertices[f.v1][1]);
    CHECK(f.nx * (mx - m.centers[f.left][0]) + f.ny * (my - m.centers[f.left][1]) > 0.0);
  }
  for (const auto& cf : m.cell_faces) CHECK(cf.size() == 3);
}

}  // namespace

TEST_CASE("square mesh basics") {
  const Mesh m = square_tri_mesh(2);
  CHECK(m.cell_count() == 8);
  check_mesh_invariants(m, 1.0);

  std::size_t boundary = 0;
  for (const auto& f : m.faces)
    if (f.right == -1) ++boundary;
  CHECK(boundary == 8);
  CHECK(m.tag_id("left") == 0);
  CHECK(m.tag_id("top") == 3);
  CHECK(m.tag_id("nope") == -1);
}

TEST_CASE("meshes with exact cell counts") {
  const Mesh riemann = square_tri_mesh_with_count(4328);
  CHECK(riemann.cell_count() == 4328);
  check_mesh_invariants(riemann, 1.0);

  const Mesh bow = cylinder_sector_mesh(34, 61, 0.5, 2.0);
  CHECK(bow.cell_count() == 4148);
  CHECK(bow.tag_id("wall") == 0);
  CHECK(bow.tag_id("inflow") == 1);
  CHECK(bow.tag_id("outflow") == 2);
  // triangulated annulus area is slightly under the smooth half-annulus
  double total = 0.0;
  for (double a : bow.areas) {
    CHECK(a > 0.0);
    total += a;
  }
  const double exact = 0.5 * 3.14159265358979323846 * (2.0 * 2.0 - 0.5 * 0.5);
  CHECK(total < exact);
  CHECK(total > 0.99 * exact);

  const Mesh strip = strip_mesh(100, 1, 1.0, 0.01);
  CHECK(strip.cell_count() == 200);
  check_mesh_invariants(strip, 0.01);
}

TEST_CASE("mesh digest changes with geometry") {
  const Mesh a = square_tri_mesh(3);
  Mesh b = square_tri_mesh(3);
  CHECK(mesh_digest(a) == mesh_digest(b));
  b.vertices[0][0] += 1e-9;
  CHECK(mesh_digest(a) != mesh_digest(b));
}

TEST_CASE("make_mesh rejects broken input") {
  // two triangles sharing an edge, one vertex id out of range
  CHECK_THROWS_AS(make_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 5}}, {}, {}),
                  std::invalid_argument);
  // untagged boundary
  CHECK_THROWS_AS(make_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {}, {}),
                  std::invalid_argument);
  // degenerate triangle
  CHECK_THROWS_AS(make_mesh({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}},
                            {{{0, 1, 0}}, {{1, 2, 0}}, {{0, 2, 0}}}, {"b"}),
                  std::invalid_argument);
}

TEST_CASE("radius graph on a 1d line") {
  DenseMatrix pos(3, 1);
  pos(0, 0) = 0.0;
  pos(1, 0) = 1.0;
  pos(2, 0) = 2.0;

  const Graph g = radius_graph(pos, 1.0);
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0] == std::pair<int, int>(0, 1));
  CHECK(g.edges[1] == std::pair<int, int>(1, 2));
  CHECK(isolated_count(g) == 0);

  const Graph none = radius_graph(pos, 0.5);
  CHECK(none.edges.empty());
  CHECK(isolated_count(none) == 3);

  // coincident nodes are connected even at radius zero
  DenseMatrix dup(2, 1);
  dup(0, 0) = 3.0;
  dup(1, 0) = 3.0;
  CHECK(radius_graph(dup, 0.0).edges.size() == 1);
}

TEST_CASE("radius graph properties and kernel twins") {
  Rng rng(11);
  DenseMatrix pos(60, 2);
  for (auto& v : pos.data()) v = rng.uniform(0.0, 1.0);
  const double r = 0.25;

  const Graph g = radius_graph(pos, r);
  for (std::size_t e = 1; e < g.edges.size(); ++e) CHECK(g.edges[e - 1] < g.edges[e]);
  for (const auto& [a, b] : g.edges) {
    CHECK(a < b);
    const double dx = pos(a, 0) - pos(b, 0), dy = pos(a, 1) - pos(b, 1);
    CHECK(dx * dx + dy * dy <= r * r);
  }
  std::size_t deg = 0;
  for (const auto& a : g.adj) deg += a.size();
  CHECK(deg == 2 * g.edges.size());

  std::vector<std::vector<int>> s1, s2;
  kernels::radius_scan_serial(pos, r, s1);
  kernels::radius_scan_omp(pos, r, s2);
  CHECK(s1 == s2);
}

TEST_CASE("matricize and scaling") {
  const Vector state = {1.0, 10.0, 2.0, 20.0, 3.0, 30.0};
  const DenseMatrix x = matricize(state, 3, 2);
  CHECK(x(0, 0) == 1.0);
  CHECK(x(0, 1) == 10.0);
  CHECK(x(2, 1) == 30.0);
  CHECK(vectorize(x) == state);

  const ScaleStats s = compute_scale_stats(std::vector<Vector>{state}, 2);
  CHECK(s.mins == Vector{1.0, 10.0});
  CHECK(s.maxs == Vector{3.0, 30.0});

  DenseMatrix y = x;
  scale_inplace(y, s);
  CHECK(y(0, 0) == 0.0);
  CHECK(y(1, 0) == 0.5);
  CHECK(y(2, 1) == 1.0);
  inv_scale_inplace(y, s);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(y(i, j) == doctest::Approx(x(i, j)).epsilon(1e-14));

  // constant feature: scale sends it to 0, inverse brings back the min
  ScaleStats flat{{5.0}, {5.0}};
  DenseMatrix z(2, 1, 5.0);
  scale_inplace(z, flat);
  CHECK(z(0, 0) == 0.0);
  inv_scale_inplace(z, flat);
  CHECK(z(0, 0) == 5.0);
}

TEST_CASE("gmsh 2.2 round trip") {
  const Mesh m = square_tri_mesh(3);
  const std::string path = "roundtrip.msh";
  write_gmsh22(m, path);
  const Mesh p = parse_gmsh_file(path);

  REQUIRE(p.cell_count() == m.cell_count());
  REQUIRE(p.vertices.size() == m.vertices.size());
  CHECK(p.tag_names == m.tag_names);
  CHECK(mesh_digest(p) == mesh_digest(m));
  std::remove(path.c_str());
}

TEST_CASE("gmsh 4.1 sample") {
  // unit square split into two triangles, all sides in one physical group
  const char* msh = R"($MeshFormat
4.1 0 8
$EndMeshFormat
$PhysicalNames
2
1 5 "rim"
2 6 "domain"
$EndPhysicalNames
$Entities
0 4 1 0
1 0 0 0 1 0 0 1 5 2 1 -2
2 1 0 0 1 1 0 1 5 2 2 -3
3 0 1 0 1 1 0 1 5 2 3 -4
4 0 0 0 0 1 0 1 5 2 4 -1
1 0 0 0 1 1 0 1 6 4 1 2 3 4
$EndEntities
$Nodes
2 4 1 4
1 1 0 2
1
2
0 0 0
1 0 0
1 3 0 2
3
4
1 1 0
0 1 0
$EndNodes
$Elements
5 6 1 6
1 1 1 1
1 1 2
1 2 1 1
2 2 3
1 3 1 1
3 3 4
1 4 1 1
4 4 1
2 1 2 2
5 1 2 3
6 1 3 4
$EndElements
)";
  std::istringstream in(msh);
  const Mesh m = parse_gmsh(in);
  CHECK(m.cell_count() == 2);
  CHECK(m.vertices.size() == 4);
  REQUIRE(m.tag_names.size() == 1);
  CHECK(m.tag_names[0] == "rim");
  std::size_t boundary = 0;
  for (const auto& f : m.faces)
    if (f.right == -1) {
      CHECK(f.tag == 0);
      ++boundary;
    }
  CHECK(boundary == 4);
}

TEST_CASE("gmsh parse failures carry line info") {
  std::istringstream notmsh("$MeshFormat\n4.1 1 8\n$EndMeshFormat\n");
  CHECK_THROWS_WITH_AS(parse_gmsh(notmsh), doctest::Contains("binary"), std::runtime_error);

  // quad element type is rejected
  const char* quad = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
1
1 3 2 1 1 1 2 3 4
$EndElements
)";
  std::istringstream in(quad);
  CHECK_THROWS_WITH_AS(parse_gmsh(in), doctest::Contains("unsupported element type 3"),
                       std::runtime_error);

  std::istringstream truncated("$MeshFormat\n2.2 0 8\n");
  CHECK_THROWS_AS(parse_gmsh(truncated), std::runtime_error);
}
