#include "foldopt/error.hpp"
#include "foldopt/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace foldopt {

void write_obj(std::ostream& out, const TriangleMesh& mesh) {
  char buf[128];
  for (const Vec3& p : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out << buf;
  }
  for (const Triangle& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

TriangleMesh read_obj(std::istream& in) {
  TriangleMesh mesh;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) throw InputError("obj line " + std::to_string(line_no) + ": bad vertex");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      long a, b, c;
      if (!(ss >> a >> b >> c) || a < 1 || b < 1 || c < 1)
        throw InputError("obj line " + std::to_string(line_no) + ": bad face");
      std::string extra;
      if (ss >> extra) throw InputError("obj line " + std::to_string(line_no) + ": only triangles are supported");
      mesh.triangles.push_back({static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1),
                                static_cast<std::size_t>(c - 1)});
    } else {
      throw InputError("obj line " + std::to_string(line_no) + ": unsupported record '" + tag + "'");
    }
  }
  mesh.rest_vertices = mesh.vertices;
  mesh.two_sided = has_two_sided_layout(mesh.vertices, mesh.triangles);
  mesh.validate();
  return mesh;
}

void save_obj(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  write_obj(out, mesh);
}

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  return read_obj(in);
}

}  // namespace foldopt
