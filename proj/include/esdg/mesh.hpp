#pragma once

#include <array>
#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "esdg/error.hpp"
#include "esdg/refops.hpp"

namespace esdg {

/// Element sides in reference space: xi = -1, xi = +1, eta = -1, eta = +1.
enum Side : int { kXiMin = 0, kXiMax = 1, kEtaMin = 2, kEtaMax = 3 };

/// Boundary tags assigned by the structured builders.
enum BoundaryTag : int { kTagLeft = 0, kTagRight = 1, kTagBottom = 2, kTagTop = 3 };

/// Volume node index of LGL node (i, j), xi index fastest.
inline int node_index(int i, int j, int degree) { return i + (degree + 1) * j; }

/// Volume node index of the q-th node on `side`, ordered by increasing
/// tangential reference coordinate.
inline int face_node(int side, int q, int degree) {
  switch (side) {
    case kXiMin: return node_index(0, q, degree);
    case kXiMax: return node_index(degree, q, degree);
    case kEtaMin: return node_index(q, 0, degree);
    default: return node_index(q, degree, degree);
  }
}

/// Outward normal scaled by the surface measure (J G^-T n_hat).
struct ScaledNormal {
  double nx = 0.0;
  double ny = 0.0;
  double measure() const { return std::hypot(nx, ny); }
};

struct ElementGeometry {
  int degree = 0;
  std::vector<double> x, y;
  std::vector<double> x_xi, x_eta, y_xi, y_eta;
  std::vector<double> jac;
  std::array<std::vector<ScaledNormal>, 4> normals;
  double h_e = 0.0;
  double area = 0.0;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
};

/// Metric terms, Jacobian, scaled normals and length scale from nodal
/// coordinates of a Q_N mapping.
inline ElementGeometry compute_geometry(std::vector<double> x, std::vector<double> y,
                                        const ReferenceOperators& ref,
                                        int element_id = -1) {
  const int n = ref.degree;
  const int np = ref.size();
  const int nv = np * np;
  if (static_cast<int>(x.size()) != nv || static_cast<int>(y.size()) != nv) {
    throw GeometryError("element " + std::to_string(element_id) +
                        ": expected " + std::to_string(nv) + " nodes");
  }
  for (int k = 0; k < nv; ++k) {
    if (!std::isfinite(x[k]) || !std::isfinite(y[k])) {
      throw GeometryError("element " + std::to_string(element_id) +
                          ": non-finite coordinate");
    }
  }
  ElementGeometry g;
  g.degree = n;
  g.x = std::move(x);
  g.y = std::move(y);
  g.x_xi.assign(nv, 0.0);
  g.x_eta.assign(nv, 0.0);
  g.y_xi.assign(nv, 0.0);
  g.y_eta.assign(nv, 0.0);
  g.jac.assign(nv, 0.0);
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) {
      const int idx = node_index(i, j, n);
      for (int k = 0; k < np; ++k) {
        const int along_xi = node_index(k, j, n);
        const int along_eta = node_index(i, k, n);
        g.x_xi[idx] += ref.d(i, k) * g.x[along_xi];
        g.y_xi[idx] += ref.d(i, k) * g.y[along_xi];
        g.x_eta[idx] += ref.d(j, k) * g.x[along_eta];
        g.y_eta[idx] += ref.d(j, k) * g.y[along_eta];
      }
      g.jac[idx] = g.x_xi[idx] * g.y_eta[idx] - g.x_eta[idx] * g.y_xi[idx];
      if (!(g.jac[idx] > 0.0)) {
        throw GeometryError("element " + std::to_string(element_id) +
                            ": non-positive Jacobian " +
                            std::to_string(g.jac[idx]) + " at node (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
  for (int side = 0; side < 4; ++side) {
    auto& ns = g.normals[side];
    ns.resize(np);
    for (int q = 0; q < np; ++q) {
      const int idx = face_node(side, q, n);
      switch (side) {
        case kXiMin: ns[q] = {-g.y_eta[idx], g.x_eta[idx]}; break;
        case kXiMax: ns[q] = {g.y_eta[idx], -g.x_eta[idx]}; break;
        case kEtaMin: ns[q] = {g.y_xi[idx], -g.x_xi[idx]}; break;
        default: ns[q] = {-g.y_xi[idx], g.x_xi[idx]}; break;
      }
    }
  }
  double area = 0.0, cx = 0.0, cy = 0.0;
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) {
      const int idx = node_index(i, j, n);
      const double wj = ref.weights[i] * ref.weights[j] * g.jac[idx];
      area += wj;
      cx += wj * g.x[idx];
      cy += wj * g.y[idx];
    }
  }
  g.area = area;
  g.centroid_x = cx / area;
  g.centroid_y = cy / area;
  // Inscribed-radius proxy: centroid distance to the nearest face chord.
  double h = std::numeric_limits<double>::infinity();
  for (int side = 0; side < 4; ++side) {
    const int a = face_node(side, 0, n);
    const int b = face_node(side, n, n);
    const double tx = g.x[b] - g.x[a];
    const double ty = g.y[b] - g.y[a];
    const double len = std::hypot(tx, ty);
    if (len == 0.0) {
      throw GeometryError("element " + std::to_string(element_id) +
                          ": collapsed face " + std::to_string(side));
    }
    const double dist =
        std::abs(tx * (g.centroid_y - g.y[a]) - ty * (g.centroid_x - g.x[a])) / len;
    h = std::min(h, dist);
  }
  g.h_e = h;
  return g;
}

/// Conforming face between two element sides, or a boundary side.
struct Face {
  int left_elem = -1;
  int left_side = 0;
  int right_elem = -1;  // -1 on the boundary
  int right_side = 0;
  bool reversed = false;  // right node q pairs with left node N - q
  int tag = -1;           // boundary tag, -1 for interior faces

  bool is_boundary() const { return right_elem < 0; }
};

/// Which face sits on an element side, and whether the element is its left.
struct FaceRef {
  int face = -1;
  bool is_left = true;
};

struct Mesh {
  int degree = 0;
  std::vector<ElementGeometry> elements;
  std::vector<Face> faces;
  std::vector<std::array<FaceRef, 4>> element_faces;

  int num_elements() const { return static_cast<int>(elements.size()); }

  /// Right-hand node index on a face matching left node q.
  int partner_node(const Face& f, int q) const { return f.reversed ? degree - q : q; }

  /// Builds element_faces and checks conformity. Shared traces may differ by a
  /// constant translation (periodic identification).
  void finalize() {
    const int ne = num_elements();
    element_faces.assign(ne, {});
    std::vector<std::array<int, 4>> count(ne, {0, 0, 0, 0});
    auto claim = [&](int elem, int side, int face, bool left) {
      if (elem < 0 || elem >= ne || side < 0 || side > 3) {
        throw GeometryError("face " + std::to_string(face) +
                            " references invalid element/side");
      }
      if (count[elem][side]++ != 0) {
        throw GeometryError("element " + std::to_string(elem) + " side " +
                            std::to_string(side) + " has more than one face");
      }
      element_faces[elem][side] = {face, left};
    };
    for (int fi = 0; fi < static_cast<int>(faces.size()); ++fi) {
      const Face& f = faces[fi];
      claim(f.left_elem, f.left_side, fi, true);
      if (!f.is_boundary()) {
        claim(f.right_elem, f.right_side, fi, false);
        check_conforming(fi);
      } else if (f.tag < 0) {
        throw GeometryError("boundary face " + std::to_string(fi) + " has no tag");
      }
    }
    for (int e = 0; e < ne; ++e) {
      for (int s = 0; s < 4; ++s) {
        if (count[e][s] != 1) {
          throw GeometryError("element " + std::to_string(e) + " side " +
                              std::to_string(s) + " has no face");
        }
      }
    }
  }

  /// True when every element is an axis-aligned rectangle (affine, diagonal
  /// metric).
  bool is_axis_aligned_affine() const {
    for (const auto& g : elements) {
      const double scale = std::max(std::abs(g.x_xi[0]), std::abs(g.y_eta[0]));
      const double tol = 1e-13 * std::max(1.0, scale);
      for (std::size_t k = 0; k < g.jac.size(); ++k) {
        if (std::abs(g.x_eta[k]) > tol || std::abs(g.y_xi[k]) > tol ||
            std::abs(g.x_xi[k] - g.x_xi[0]) > tol ||
            std::abs(g.y_eta[k] - g.y_eta[0]) > tol) {
          return false;
        }
      }
    }
    return true;
  }

 private:
  void check_conforming(int fi) const {
    const Face& f = faces[fi];
    const auto& gl = elements[f.left_elem];
    const auto& gr = elements[f.right_elem];
    double ox = 0.0, oy = 0.0;
    for (int q = 0; q <= degree; ++q) {
      const int il = face_node(f.left_side, q, degree);
      const int ir = face_node(f.right_side, partner_node(f, q), degree);
      const double dx = gr.x[ir] - gl.x[il];
      const double dy = gr.y[ir] - gl.y[il];
      if (q == 0) {
        ox = dx;
        oy = dy;
      }
      const double scale = std::max({1.0, std::abs(gl.x[il]), std::abs(gl.y[il])});
      if (std::abs(dx - ox) > 1e-12 * scale || std::abs(dy - oy) > 1e-12 * scale) {
        throw GeometryError("face " + std::to_string(fi) +
                            ": non-conforming traces between elements " +
                            std::to_string(f.left_elem) + " and " +
                            std::to_string(f.right_elem));
      }
      const ScaledNormal nl = gl.normals[f.left_side][q];
      const ScaledNormal nr = gr.normals[f.right_side][partner_node(f, q)];
      const double nscale = std::max(1.0, nl.measure());
      if (std::abs(nl.nx + nr.nx) > 1e-12 * nscale ||
          std::abs(nl.ny + nr.ny) > 1e-12 * nscale) {
        throw GeometryError("face " + std::to_string(fi) +
                            ": scaled normals do not match");
      }
    }
  }
};

struct Rect {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

using PointMap = std::function<std::pair<double, double>(double, double)>;

/// Structured nx-by-ny grid on `domain` with nodes placed by `map` applied to
/// the Cartesian LGL nodes (a Q_N interpolant of the map).
inline Mesh build_mapped(int nx, int ny, const Rect& domain, int degree,
                         bool periodic_x, bool periodic_y, const PointMap& map) {
  if (nx < 1 || ny < 1) throw ConfigError("mesh needs at least one element per direction");
  if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0)) {
    throw GeometryError("degenerate rectangle");
  }
  const auto ref = reference_operators(degree);
  const int np = degree + 1;
  const double dx = (domain.x1 - domain.x0) / nx;
  const double dy = (domain.y1 - domain.y0) / ny;
  Mesh mesh;
  mesh.degree = degree;
  mesh.elements.reserve(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      std::vector<double> x(np * np), y(np * np);
      for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) {
          const double xc = domain.x0 + (ix + 0.5 * (ref->nodes[i] + 1.0)) * dx;
          const double yc = domain.y0 + (iy + 0.5 * (ref->nodes[j] + 1.0)) * dy;
          const auto [xm, ym] = map(xc, yc);
          x[node_index(i, j, degree)] = xm;
          y[node_index(i, j, degree)] = ym;
        }
      }
      mesh.elements.push_back(
          compute_geometry(std::move(x), std::move(y), *ref, ix + nx * iy));
    }
  }
  auto id = [nx](int ix, int iy) { return ix + nx * iy; };
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      if (ix == 0 && !periodic_x) {
        mesh.faces.push_back({id(ix, iy), kXiMin, -1, 0, false, kTagLeft});
      }
      if (ix + 1 < nx) {
        mesh.faces.push_back({id(ix, iy), kXiMax, id(ix + 1, iy), kXiMin, false, -1});
      } else if (periodic_x) {
        mesh.faces.push_back({id(ix, iy), kXiMax, id(0, iy), kXiMin, false, -1});
      } else {
        mesh.faces.push_back({id(ix, iy), kXiMax, -1, 0, false, kTagRight});
      }
    }
  }
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      if (iy == 0 && !periodic_y) {
        mesh.faces.push_back({id(ix, iy), kEtaMin, -1, 0, false, kTagBottom});
      }
      if (iy + 1 < ny) {
        mesh.faces.push_back({id(ix, iy), kEtaMax, id(ix, iy + 1), kEtaMin, false, -1});
      } else if (periodic_y) {
        mesh.faces.push_back({id(ix, iy), kEtaMax, id(ix, 0), kEtaMin, false, -1});
      } else {
        mesh.faces.push_back({id(ix, iy), kEtaMax, -1, 0, false, kTagTop});
      }
    }
  }
  mesh.finalize();
  return mesh;
}

inline Mesh build_cartesian(int nx, int ny, const Rect& domain, int degree,
                            bool periodic_x = false, bool periodic_y = false) {
  return build_mapped(nx, ny, domain, degree, periodic_x, periodic_y,
                      [](double x, double y) { return std::pair{x, y}; });
}

/// Amplitudes of the sinusoidal perturbation x' = x + ax sin(a pi x) cos(a pi y),
/// y' = y + ay cos(a pi x) sin(a pi y).
struct SinusoidalWarp {
  double alpha = 1.5;
  double amp_x = 0.05;
  double amp_y = 0.10;
};

inline Mesh build_sinusoidal(int m, double lo, double hi, int degree,
                             SinusoidalWarp warp = {}, bool periodic = true) {
  if (m < 2) throw ConfigError("sinusoidal mesh needs M >= 2");
  const double pi = std::acos(-1.0);
  const double a = warp.alpha * pi;
  return build_mapped(m, m, {lo, hi, lo, hi}, degree, periodic, periodic,
                      [=](double x, double y) {
                        return std::pair{
                            x + warp.amp_x * std::sin(a * x) * std::cos(a * y),
                            y + warp.amp_y * std::cos(a * x) * std::sin(a * y)};
                      });
}

/// Largest absolute residual of the two discrete metric identities
/// sum_p D(q2,p) y_xi(q1,p) = sum_p D(q1,p) y_eta(p,q2) (and same for x).
inline double metric_identity_residual(const ElementGeometry& g,
                                       const ReferenceOperators& ref) {
  const int n = ref.degree;
  const int np = ref.size();
  double worst = 0.0;
  for (int q2 = 0; q2 < np; ++q2) {
    for (int q1 = 0; q1 < np; ++q1) {
      double ry = 0.0, rx = 0.0;
      for (int p = 0; p < np; ++p) {
        ry += ref.d(q2, p) * g.y_xi[node_index(q1, p, n)] -
              ref.d(q1, p) * g.y_eta[node_index(p, q2, n)];
        rx += ref.d(q2, p) * g.x_xi[node_index(q1, p, n)] -
              ref.d(q1, p) * g.x_eta[node_index(p, q2, n)];
      }
      worst = std::max({worst, std::abs(ry), std::abs(rx)});
    }
  }
  return worst;
}

}  // namespace esdg
