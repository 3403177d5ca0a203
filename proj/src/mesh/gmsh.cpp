#include "gdlspg/mesh/gmsh.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "gdlspg/io/binio.hpp"

namespace gdlspg {

namespace {

class LineReader {
public:
  LineReader(std::istream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error(origin_ + ":" + std::to_string(lineno_) + ": gmsh parse: " + msg);
  }

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) fail("unexpected end of file");
    ++lineno_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  bool next_if_any(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++lineno_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  template <typename... T>
  void parse(const std::string& line, T&... out) {
    std::istringstream ss(line);
    ((ss >> out), ...);
    if (ss.fail()) fail("malformed line: '" + line + "'");
  }

private:
  std::istream& in_;
  std::string origin_;
  int lineno_ = 0;
};

struct RawData {
  std::unordered_map<long long, int> node_index;           // gmsh tag -> dense id
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> cells;
  std::vector<std::array<int, 3>> segments;                // v0, v1, physical id
  std::map<int, std::string> phys_names_dim1;              // physical id -> name
};

int node_of(LineReader& r, const RawData& d, long long tag) {
  const auto it = d.node_index.find(tag);
  if (it == d.node_index.end()) r.fail("element references unknown node " + std::to_string(tag));
  return it->second;
}

void parse_physical_names(LineReader& r, RawData& d) {
  int n = 0;
  r.parse(r.next(), n);
  for (int i = 0; i < n; ++i) {
    const std::string line = r.next();
    int dim = 0, id = 0;
    std::istringstream ss(line);
    ss >> dim >> id;
    std::string name;
    std::getline(ss, name);
    if (ss.fail()) r.fail("malformed physical name: '" + line + "'");
    const auto a = name.find('"');
    const auto b = name.rfind('"');
    if (a == std::string::npos || b <= a) r.fail("physical name must be quoted: '" + line + "'");
    if (dim == 1) d.phys_names_dim1[id] = name.substr(a + 1, b - a - 1);
  }
  if (r.next() != "$EndPhysicalNames") r.fail("expected $EndPhysicalNames");
}

void parse_v2(LineReader& r, RawData& d) {
  std::string line;
  while (r.next_if_any(line)) {
    if (line == "$PhysicalNames") {
      parse_physical_names(r, d);
    } else if (line == "$Nodes") {
      long long n = 0;
      r.parse(r.next(), n);
      for (long long i = 0; i < n; ++i) {
        long long tag;
        double x, y, z;
        r.parse(r.next(), tag, x, y, z);
        d.node_index[tag] = static_cast<int>(d.vertices.size());
        d.vertices.push_back({x, y});
      }
      if (r.next() != "$EndNodes") r.fail("expected $EndNodes");
    } else if (line == "$Elements") {
      long long n = 0;
      r.parse(r.next(), n);
      for (long long i = 0; i < n; ++i) {
        const std::string el = r.next();
        std::istringstream ss(el);
        long long id;
        int type, ntags;
        ss >> id >> type >> ntags;
        std::vector<int> tags(ntags);
        for (int& t : tags) ss >> t;
        if (ss.fail()) r.fail("malformed element: '" + el + "'");
        if (type == 15) continue;  // point
        if (type == 1) {
          long long a, b;
          ss >> a >> b;
          if (ss.fail()) r.fail("malformed line element: '" + el + "'");
          if (!tags.empty() && tags[0] > 0)
            d.segments.push_back({node_of(r, d, a), node_of(r, d, b), tags[0]});
        } else if (type == 2) {
          long long a, b, c;
          ss >> a >> b >> c;
          if (ss.fail()) r.fail("malformed triangle: '" + el + "'");
          d.cells.push_back({node_of(r, d, a), node_of(r, d, b), node_of(r, d, c)});
        } else {
          r.fail("unsupported element type " + std::to_string(type));
        }
      }
      if (r.next() != "$EndElements") r.fail("expected $EndElements");
    }
    // unknown sections are skipped up to their matching $End marker
    else if (!line.empty() && line[0] == '$' && line.rfind("$End", 0) != 0) {
      const std::string end = "$End" + line.substr(1);
      while (r.next() != end) {
      }
    }
  }
}

void parse_v41(LineReader& r, RawData& d) {
  std::unordered_map<int, int> curve_phys;  // curve entity tag -> physical id
  std::string line;
  while (r.next_if_any(line)) {
    if (line == "$PhysicalNames") {
      parse_physical_names(r, d);
    } else if (line == "$Entities") {
      long long np, nc, ns, nv;
      r.parse(r.next(), np, nc, ns, nv);
      for (long long i = 0; i < np; ++i) r.next();
      for (long long i = 0; i < nc; ++i) {
        const std::string el = r.next();
        std::istringstream ss(el);
        int tag;
        double bb;
        ss >> tag;
        for (int k = 0; k < 6; ++k) ss >> bb;
        long long nphys;
        ss >> nphys;
        if (ss.fail()) r.fail("malformed curve entity: '" + el + "'");
        if (nphys > 0) {
          int phys;
          ss >> phys;
          curve_phys[tag] = phys;
        }
      }
      for (long long i = 0; i < ns + nv; ++i) r.next();
      if (r.next() != "$EndEntities") r.fail("expected $EndEntities");
    } else if (line == "$Nodes") {
      long long nblocks, nnodes, mn, mx;
      r.parse(r.next(), nblocks, nnodes, mn, mx);
      for (long long b = 0; b < nblocks; ++b) {
        int dim, etag, parametric;
        long long nin;
        r.parse(r.next(), dim, etag, parametric, nin);
        std::vector<long long> tags(nin);
        for (auto& t : tags) r.parse(r.next(), t);
        for (long long k = 0; k < nin; ++k) {
          double x, y, z;
          r.parse(r.next(), x, y, z);
          d.node_index[tags[k]] = static_cast<int>(d.vertices.size());
          d.vertices.push_back({x, y});
        }
      }
      if (r.next() != "$EndNodes") r.fail("expected $EndNodes");
    } else if (line == "$Elements") {
      long long nblocks, nelems, mn, mx;
      r.parse(r.next(), nblocks, nelems, mn, mx);
      for (long long b = 0; b < nblocks; ++b) {
        int dim, etag, type;
        long long nin;
        r.parse(r.next(), dim, etag, type, nin);
        for (long long k = 0; k < nin; ++k) {
          const std::string el = r.next();
          std::istringstream ss(el);
          long long id;
          ss >> id;
          if (type == 15) continue;
          if (type == 1) {
            long long a, bb;
            ss >> a >> bb;
            if (ss.fail()) r.fail("malformed line element: '" + el + "'");
            const auto it = curve_phys.find(etag);
            if (it != curve_phys.end())
              d.segments.push_back({node_of(r, d, a), node_of(r, d, bb), it->second});
          } else if (type == 2) {
            long long a, bb, c;
            ss >> a >> bb >> c;
            if (ss.fail()) r.fail("malformed triangle: '" + el + "'");
            d.cells.push_back({node_of(r, d, a), node_of(r, d, bb), node_of(r, d, c)});
          } else {
            r.fail("unsupported element type " + std::to_string(type));
          }
        }
      }
      if (r.next() != "$EndElements") r.fail("expected $EndElements");
    } else if (!line.empty() && line[0] == '$' && line.rfind("$End", 0) != 0) {
      const std::string end = "$End" + line.substr(1);
      while (r.next() != end) {
      }
    }
  }
}

}  // namespace

Mesh parse_gmsh(std::istream& in, const std::string& origin) {
  LineReader r(in, origin);
  if (r.next() != "$MeshFormat") r.fail("expected $MeshFormat");
  double version = 0.0;
  int file_type = 0, data_size = 0;
  r.parse(r.next(), version, file_type, data_size);
  if (file_type != 0) r.fail("binary MSH files are not supported");
  if (r.next() != "$EndMeshFormat") r.fail("expected $EndMeshFormat");

  RawData d;
  if (version >= 2.1 && version < 3.0) {
    parse_v2(r, d);
  } else if (version >= 4.0 && version < 5.0) {
    parse_v41(r, d);
  } else {
    r.fail("unsupported MSH version");
  }
  if (d.cells.empty()) r.fail("no triangles found");

  // physical ids become tag ids in ascending-id order
  std::unordered_map<int, int> phys_to_tag;
  std::vector<std::string> names;
  for (const auto& [id, name] : d.phys_names_dim1) {
    phys_to_tag[id] = static_cast<int>(names.size());
    names.push_back(name);
  }
  for (auto& s : d.segments) {
    const auto it = phys_to_tag.find(s[2]);
    if (it == phys_to_tag.end())
      throw std::runtime_error(origin + ": gmsh parse: boundary line references physical id " +
                               std::to_string(s[2]) + " with no physical name");
    s[2] = it->second;
  }
  return make_mesh(std::move(d.vertices), std::move(d.cells), d.segments, std::move(names));
}

Mesh parse_gmsh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_gmsh(in, path);
}

void write_gmsh22(const Mesh& m, const std::string& path) {
  std::ostringstream out;
  out.precision(17);
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";

  const int domain_id = static_cast<int>(m.tag_names.size()) + 1;
  out << "$PhysicalNames\n" << m.tag_names.size() + 1 << "\n";
  for (std::size_t i = 0; i < m.tag_names.size(); ++i)
    out << "1 " << i + 1 << " \"" << m.tag_names[i] << "\"\n";
  out << "2 " << domain_id << " \"domain\"\n$EndPhysicalNames\n";

  out << "$Nodes\n" << m.vertices.size() << "\n";
  for (std::size_t i = 0; i < m.vertices.size(); ++i)
    out << i + 1 << " " << m.vertices[i][0] << " " << m.vertices[i][1] << " 0\n";
  out << "$EndNodes\n";

  std::size_t n_bnd = 0;
  for (const auto& f : m.faces)
    if (f.right == -1) ++n_bnd;
  out << "$Elements\n" << n_bnd + m.cells.size() << "\n";
  long long eid = 1;
  for (const auto& f : m.faces)
    if (f.right == -1)
      out << eid++ << " 1 2 " << f.tag + 1 << " " << f.tag + 1 << " " << f.v0 + 1 << " "
          << f.v1 + 1 << "\n";
  for (const auto& c : m.cells)
    out << eid++ << " 2 2 " << domain_id << " " << domain_id << " " << c[0] + 1 << " " << c[1] + 1
        << " " << c[2] + 1 << "\n";
  out << "$EndElements\n";

  atomic_write_text(path, out.str());
}

}  // namespace gdlspg
