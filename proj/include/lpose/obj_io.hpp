#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lpose/errors.hpp"
#include "lpose/geometry.hpp"

namespace lpose {

namespace detail {

// Vertex index of an OBJ face element: the part before any '/'.
// OBJ indices are 1-based; negative (relative) indices are not supported.
inline int parse_face_index(const std::string& token, int vertex_count, int line_no) {
  const std::string head = token.substr(0, token.find('/'));
  int idx = 0;
  const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
  if (ec != std::errc{} || ptr != head.data() + head.size())
    throw ParseError("obj: bad face index '" + token + "'", line_no);
  if (idx < 1 || idx > vertex_count)
    throw ParseError("obj: face index " + std::to_string(idx) + " out of range [1, " +
                         std::to_string(vertex_count) + "]",
                     line_no);
  return idx - 1;
}

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

// ASCII OBJ reader for `v x y z` and triangular `f i j k` lines.
// Face elements may carry texture/normal suffixes (`f i/t/n ...`); only the
// vertex index is kept. Lines starting with any other keyword are ignored.
// Non-triangular faces and out-of-range indices raise ParseError with the
// offending line number.
inline TriMesh load_obj(std::istream& in) {
  TriMesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z()))
        throw ParseError("obj: vertex needs three coordinates", line_no);
      mesh.vertices.push_back(p);
    } else if (key == "f") {
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (tokens.size() != 3)
        throw ParseError("obj: only triangular faces are supported, got " +
                             std::to_string(tokens.size()) + " vertices",
                         line_no);
      const int n = static_cast<int>(mesh.vertices.size());
      mesh.faces.push_back({detail::parse_face_index(tokens[0], n, line_no),
                            detail::parse_face_index(tokens[1], n, line_no),
                            detail::parse_face_index(tokens[2], n, line_no)});
    }
    // comments, vt/vn/usemtl/... : ignored
  }
  return mesh;
}

inline TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshLoadError("cannot open mesh file: " + path);
  return load_obj(in);
}

// Writes vertices with shortest round-trip formatting so a load/save cycle
// is bit-exact on coordinates.
inline void save_obj(std::ostream& out, const TriMesh& mesh) {
  for (const auto& v : mesh.vertices)
    out << "v " << detail::format_double(v.x()) << ' ' << detail::format_double(v.y())
        << ' ' << detail::format_double(v.z()) << '\n';
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

inline void save_obj(const std::string& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshLoadError("cannot open for writing: " + path);
  save_obj(out, mesh);
}

}  // namespace lpose
