#include "advreal/geometry/obj_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "advreal/core/errors.hpp"

namespace advreal::geometry {
namespace {

// Resolves a 1-based (or negative, relative) OBJ index.
int resolve_index(long raw, std::size_t count, std::size_t line_no) {
  long idx = raw > 0 ? raw - 1 : static_cast<long>(count) + raw;
  if (raw == 0 || idx < 0 || idx >= static_cast<long>(count)) {
    throw DomainError("obj line " + std::to_string(line_no) + ": index out of range");
  }
  return static_cast<int>(idx);
}

}  // namespace

GarmentMesh read_obj(std::istream& in, AdjacencyWeighting weighting) {
  GarmentMesh mesh;
  std::vector<Vec2> texcoords;
  std::vector<int> uv_of_vertex;
  bool uv_consistent = true;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x = 0, y = 0, z = 0;
      if (!(ls >> x >> y >> z)) throw DomainError("obj line " + std::to_string(line_no) + ": malformed vertex");
      mesh.vertices.emplace_back(x, y, z);
      uv_of_vertex.push_back(-1);
    } else if (tag == "vt") {
      double u = 0, v = 0;
      if (!(ls >> u >> v)) throw DomainError("obj line " + std::to_string(line_no) + ": malformed texcoord");
      texcoords.emplace_back(u, v);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string token;
      while (ls >> token) {
        const auto slash = token.find('/');
        const int vi = resolve_index(std::stol(token.substr(0, slash)), mesh.vertices.size(), line_no);
        if (slash != std::string::npos && slash + 1 < token.size() && token[slash + 1] != '/') {
          const auto rest = token.substr(slash + 1);
          const int ti = resolve_index(std::stol(rest.substr(0, rest.find('/'))), texcoords.size(), line_no);
          if (uv_of_vertex[vi] >= 0 && uv_of_vertex[vi] != ti) uv_consistent = false;
          uv_of_vertex[vi] = ti;
        } else {
          uv_consistent = false;
        }
        poly.push_back(vi);
      }
      if (poly.size() < 3) throw DomainError("obj line " + std::to_string(line_no) + ": face with < 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  if (mesh.vertices.empty()) throw DomainError("empty mesh");
  if (uv_consistent && !texcoords.empty()) {
    mesh.uv.resize(mesh.vertices.size(), Vec2::Zero());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      if (uv_of_vertex[i] >= 0) mesh.uv[i] = texcoords[uv_of_vertex[i]];
    }
  }
  derive_edges_from_faces(mesh, weighting);
  mesh.validate();
  return mesh;
}

GarmentMesh read_obj(const std::filesystem::path& path, AdjacencyWeighting weighting) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_obj(in, weighting);
}

void write_obj(std::ostream& out, const GarmentMesh& mesh) {
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.uv) out << "vt " << t.x() << ' ' << t.y() << '\n';
  const bool with_uv = !mesh.uv.empty();
  for (const auto& f : mesh.faces) {
    out << 'f';
    for (int k = 0; k < 3; ++k) {
      out << ' ' << f[k] + 1;
      if (with_uv) out << '/' << f[k] + 1;
    }
    out << '\n';
  }
}

void write_obj(const std::filesystem::path& path, const GarmentMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_obj(out, mesh);
}

}  // namespace advreal::geometry
