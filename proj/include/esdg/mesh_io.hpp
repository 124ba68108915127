#pragma once

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "esdg/error.hpp"
#include "esdg/mesh.hpp"

namespace esdg {

// Text format:
//   esdg-mesh v1 N=<degree> elements=<E>
//   (N+1)^2 lines "x y" per element, xi index fastest, 17 significant digits
//   faces
//   <left_elem> <left_side> <right_elem> <right_side> <reversed 0|1>
//   <left_elem> <left_side> BOUNDARY <tag>

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_mesh(const Mesh& mesh, std::ostream& os) {
  os << "esdg-mesh v1 N=" << mesh.degree << " elements=" << mesh.num_elements()
     << '\n';
  for (const auto& g : mesh.elements) {
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      os << format_double(g.x[k]) << ' ' << format_double(g.y[k]) << '\n';
    }
  }
  os << "faces\n";
  for (const auto& f : mesh.faces) {
    if (f.is_boundary()) {
      os << f.left_elem << ' ' << f.left_side << " BOUNDARY " << f.tag << '\n';
    } else {
      os << f.left_elem << ' ' << f.left_side << ' ' << f.right_elem << ' '
         << f.right_side << ' ' << (f.reversed ? 1 : 0) << '\n';
    }
  }
}

inline void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open mesh file for writing: " + path);
  write_mesh(mesh, os);
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline int parse_int(std::string_view s, int line, const char* what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, std::string("expected integer ") + what + ", got '" +
                               std::string(s) + "'");
  }
  return v;
}

inline double parse_double(std::string_view s, int line) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) {
    throw ParseError(line, "expected floating-point value, got '" + tmp + "'");
  }
  return v;
}

inline int parse_keyed(std::string_view token, std::string_view key, int line) {
  if (token.substr(0, key.size()) != key) {
    throw ParseError(line, "expected '" + std::string(key) + "<int>' in header");
  }
  return parse_int(token.substr(key.size()), line, key.data());
}

}  // namespace detail

inline Mesh read_mesh(std::istream& is) {
  std::string text;
  int line_no = 0;
  auto next_line = [&](std::string& out) -> bool {
    while (std::getline(is, out)) {
      ++line_no;
      if (!detail::split_ws(out).empty()) return true;
    }
    return false;
  };
  if (!next_line(text)) throw ParseError(1, "empty mesh file");
  auto head = detail::split_ws(text);
  if (head.size() != 4 || head[0] != "esdg-mesh" || head[1] != "v1") {
    throw ParseError(line_no, "malformed header, expected 'esdg-mesh v1 N=<d> elements=<E>'");
  }
  const int degree = detail::parse_keyed(head[2], "N=", line_no);
  const int num_elements = detail::parse_keyed(head[3], "elements=", line_no);
  if (degree < kMinDegree || degree > kMaxDegree) {
    throw ParseError(line_no, "degree out of range");
  }
  if (num_elements < 1) throw ParseError(line_no, "element count must be positive");
  const auto ref = reference_operators(degree);
  const int nv = ref->volume_size();

  Mesh mesh;
  mesh.degree = degree;
  mesh.elements.reserve(num_elements);
  for (int e = 0; e < num_elements; ++e) {
    std::vector<double> x(nv), y(nv);
    for (int k = 0; k < nv; ++k) {
      if (!next_line(text)) {
        throw ParseError(line_no + 1, "unexpected end of file in element " + std::to_string(e));
      }
      auto tok = detail::split_ws(text);
      if (tok.size() != 2) {
        throw ParseError(line_no, tok.size() == 1 && tok[0] == "faces"
                                      ? "element count mismatch: fewer coordinate blocks than declared"
                                      : "expected 'x y'");
      }
      x[k] = detail::parse_double(tok[0], line_no);
      y[k] = detail::parse_double(tok[1], line_no);
    }
    try {
      mesh.elements.push_back(compute_geometry(std::move(x), std::move(y), *ref, e));
    } catch (const GeometryError& err) {
      throw ParseError(line_no, err.what());
    }
  }
  if (!next_line(text) || detail::split_ws(text) != std::vector<std::string_view>{"faces"}) {
    throw ParseError(line_no, "expected 'faces' section (element count mismatch?)");
  }
  std::vector<int> face_lines;
  while (next_line(text)) {
    auto tok = detail::split_ws(text);
    Face f;
    if (tok.size() == 4 && tok[2] == "BOUNDARY") {
      f.left_elem = detail::parse_int(tok[0], line_no, "element");
      f.left_side = detail::parse_int(tok[1], line_no, "side");
      f.tag = detail::parse_int(tok[3], line_no, "boundary tag");
      if (f.tag < 0) throw ParseError(line_no, "boundary tag must be non-negative");
    } else if (tok.size() == 5) {
      f.left_elem = detail::parse_int(tok[0], line_no, "element");
      f.left_side = detail::parse_int(tok[1], line_no, "side");
      f.right_elem = detail::parse_int(tok[2], line_no, "element");
      f.right_side = detail::parse_int(tok[3], line_no, "side");
      const int rev = detail::parse_int(tok[4], line_no, "reversal flag");
      if (rev != 0 && rev != 1) throw ParseError(line_no, "reversal flag must be 0 or 1");
      f.reversed = rev == 1;
      if (f.right_elem < 0 || f.right_elem >= num_elements) {
        throw ParseError(line_no, "element index out of range");
      }
    } else {
      throw ParseError(line_no, "malformed face line");
    }
    if (f.left_elem < 0 || f.left_elem >= num_elements) {
      throw ParseError(line_no, "element index out of range");
    }
    if (f.left_side < 0 || f.left_side > 3 || (!f.is_boundary() && (f.right_side < 0 || f.right_side > 3))) {
      throw ParseError(line_no, "side index must be in [0, 3]");
    }
    mesh.faces.push_back(f);
    face_lines.push_back(line_no);
  }
  try {
    mesh.finalize();
  } catch (const GeometryError& err) {
    // Point face errors at the offending face line.
    int where = line_no;
    const std::string msg = err.what();
    for (std::string_view prefix : {"face ", "boundary face "}) {
      if (msg.rfind(prefix, 0) == 0) {
        const std::size_t fi = std::strtoul(msg.c_str() + prefix.size(), nullptr, 10);
        if (fi < face_lines.size()) where = face_lines[fi];
      }
    }
    throw ParseError(where, msg);
  }
  return mesh;
}

inline Mesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open mesh file: " + path);
  return read_mesh(is);
}

}  // namespace esdg
