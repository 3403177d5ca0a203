#pragma once

#include <iosfwd>
#include <string>

#include "gdlspg/mesh/mesh.hpp"

namespace gdlspg {

// Reads ASCII Gmsh MSH files, versions 2.2 and 4.1. Triangles become cells;
// physically-named line elements tag the boundary; points are skipped; any
// other element type is an error. Parse failures report the line number.
Mesh parse_gmsh(std::istream& in, const std::string& origin = "<stream>");
Mesh parse_gmsh_file(const std::string& path);

// Writes MSH 2.2 ASCII with the boundary tags as dim-1 physical names.
void write_gmsh22(const Mesh& m, const std::string& path);

}  // namespace gdlspg
