#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "esdg/cases.hpp"
#include "esdg/field.hpp"
#include "esdg/mesh.hpp"
#include "esdg/parallel.hpp"
#include "esdg/physics.hpp"
#include "esdg/refops.hpp"

namespace esdg {

enum class FluxChoice { kLlf, kEc };
enum class VolumeForm { kEntropyStable, kStandard };

/// Contravariant fluxes (f~, g~) at one node from the pointwise metric terms.
inline std::pair<Vec4, Vec4> contravariant_flux(const ElementGeometry& g, int node,
                                                const FluxPair& flux) {
  std::pair<Vec4, Vec4> out;
  for (int k = 0; k < 4; ++k) {
    out.first[k] = g.y_eta[node] * flux.f[k] - g.x_eta[node] * flux.g[k];
    out.second[k] = -g.y_xi[node] * flux.f[k] + g.x_xi[node] * flux.g[k];
  }
  return out;
}

namespace detail {

inline void check_element_states(ElementSolution u, const char* where) {
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!is_admissible(u[k])) {
      throw AdmissibilityError(std::string(where) + ": inadmissible state at node " +
                               std::to_string(k) + " (rho=" + std::to_string(u[k].rho()) +
                               ", p=" + std::to_string(pressure(u[k])) + ")");
    }
  }
}

}  // namespace detail

/// Split-form volume term with entropy-conservative two-point fluxes and
/// arithmetic-mean metrics:
///   out(p1,p2) = 2 sum_i D(p1,i) f~#((i,p1),p2) + 2 sum_j D(p2,j) g~#(p1,(j,p2)).
/// Not divided by J and not multiplied by quadrature weights. Each
/// two-point flux is evaluated once per node pair.
inline void volume_residual_es(ElementSolution u, const ElementGeometry& g,
                               const ReferenceOperators& ref, std::span<State> out) {
  const int n = ref.degree;
  const int np = ref.size();
  const int nv = np * np;
  detail::check_element_states(u, "volume_residual_es");
  thread_local std::vector<EcNode> nodes;
  nodes.resize(nv);
  for (int k = 0; k < nv; ++k) {
    nodes[k] = EcNode::from(u[k]);
    out[k] = State{};
  }
  for (int k = 0; k < nv; ++k) {
    const auto [ft, gt] = contravariant_flux(g, k, physical_flux_unchecked(u[k]));
    const int i = k % np;
    const int j = k / np;
    const double dxi = 2.0 * ref.d(i, i);
    const double deta = 2.0 * ref.d(j, j);
    for (int c = 0; c < 4; ++c) out[k][c] += dxi * ft[c] + deta * gt[c];
  }
  // xi lines
  for (int j = 0; j < np; ++j) {
    for (int p = 0; p < np; ++p) {
      const int a = node_index(p, j, n);
      for (int i = p + 1; i < np; ++i) {
        const int b = node_index(i, j, n);
        const FluxPair fl = ec_flux(nodes[a], nodes[b]);
        const double ye = 0.5 * (g.y_eta[a] + g.y_eta[b]);
        const double xe = 0.5 * (g.x_eta[a] + g.x_eta[b]);
        const double dab = 2.0 * ref.d(p, i);
        const double dba = 2.0 * ref.d(i, p);
        for (int c = 0; c < 4; ++c) {
          const double ft = ye * fl.f[c] - xe * fl.g[c];
          out[a][c] += dab * ft;
          out[b][c] += dba * ft;
        }
      }
    }
  }
  // eta lines
  for (int i = 0; i < np; ++i) {
    for (int p = 0; p < np; ++p) {
      const int a = node_index(i, p, n);
      for (int j = p + 1; j < np; ++j) {
        const int b = node_index(i, j, n);
        const FluxPair fl = ec_flux(nodes[a], nodes[b]);
        const double yx = 0.5 * (g.y_xi[a] + g.y_xi[b]);
        const double xx = 0.5 * (g.x_xi[a] + g.x_xi[b]);
        const double dab = 2.0 * ref.d(p, j);
        const double dba = 2.0 * ref.d(j, p);
        for (int c = 0; c < 4; ++c) {
          const double gt = -yx * fl.f[c] + xx * fl.g[c];
          out[a][c] += dab * gt;
          out[b][c] += dba * gt;
        }
      }
    }
  }
}

/// Collocation volume term sum_i D(p1,i) f~(i,p2) + sum_j D(p2,j) g~(p1,j) of the
/// baseline strong-form scheme. Same scaling contract as volume_residual_es.
inline void volume_residual_standard(ElementSolution u, const ElementGeometry& g,
                                     const ReferenceOperators& ref,
                                     std::span<State> out) {
  const int n = ref.degree;
  const int np = ref.size();
  const int nv = np * np;
  detail::check_element_states(u, "volume_residual_standard");
  thread_local std::vector<Vec4> ft, gt;
  ft.resize(nv);
  gt.resize(nv);
  for (int k = 0; k < nv; ++k) {
    std::tie(ft[k], gt[k]) = contravariant_flux(g, k, physical_flux_unchecked(u[k]));
  }
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) {
      const int idx = node_index(i, j, n);
      State acc{};
      for (int m = 0; m < np; ++m) {
        const Vec4& fa = ft[node_index(m, j, n)];
        const Vec4& ga = gt[node_index(i, m, n)];
        for (int c = 0; c < 4; ++c) acc[c] += ref.d(i, m) * fa[c] + ref.d(j, m) * ga[c];
      }
      out[idx] = acc;
    }
  }
}

/// Interface numerical fluxes F* . n~ per face node, oriented by the left
/// element's scaled outward normal and indexed in the left element's order.
struct FaceFluxes {
  int nodes_per_face = 0;
  std::vector<Vec4> values;

  const Vec4& at(int face, int q) const {
    return values[static_cast<std::size_t>(face) * nodes_per_face + q];
  }
  Vec4& at(int face, int q) {
    return values[static_cast<std::size_t>(face) * nodes_per_face + q];
  }
};

inline void interface_fluxes(const FieldState& field, const Mesh& mesh, FluxChoice choice,
                             const BoundaryConditions& bcs, FaceFluxes& out) {
  const int np = mesh.degree + 1;
  const int nf = static_cast<int>(mesh.faces.size());
  out.nodes_per_face = np;
  out.values.resize(static_cast<std::size_t>(nf) * np);
  parallel_for(nf, [&](int fi) {
    const Face& f = mesh.faces[fi];
    const auto& gl = mesh.elements[f.left_elem];
    for (int q = 0; q < np; ++q) {
      const int il = face_node(f.left_side, q, mesh.degree);
      const State& ul = field.at(f.left_elem, il);
      const ScaledNormal sn = gl.normals[f.left_side][q];
      const double m = sn.measure();
      const double nx = sn.nx / m;
      const double ny = sn.ny / m;
      State ur;
      if (f.is_boundary()) {
        ur = ghost_state(bcs.at(f.tag), ul, nx, ny, gl.x[il], gl.y[il], field.t);
      } else {
        ur = field.at(f.right_elem,
                      face_node(f.right_side, mesh.partner_node(f, q), mesh.degree));
      }
      Vec4 flux = choice == FluxChoice::kLlf ? llf_flux(ul, ur, nx, ny)
                                             : ec_normal_flux(ul, ur, nx, ny);
      for (double& v : flux) v *= m;
      out.at(fi, q) = flux;
    }
  });
}

inline FaceFluxes interface_fluxes(const FieldState& field, const Mesh& mesh,
                                   FluxChoice choice, const BoundaryConditions& bcs) {
  FaceFluxes out;
  interface_fluxes(field, mesh, choice, bcs, out);
  return out;
}

/// F* . n~_out on `side` of element e at the element's own face node q.
inline Vec4 outward_interface_flux(const Mesh& mesh, const FaceFluxes& fluxes, int e,
                                   int side, int q) {
  const FaceRef ref = mesh.element_faces[e][side];
  if (ref.is_left) return fluxes.at(ref.face, q);
  const Face& f = mesh.faces[ref.face];
  Vec4 v = fluxes.at(ref.face, mesh.partner_node(f, q));
  for (double& c : v) c = -c;
  return v;
}

/// Adds the boundary-row terms -(F(U) . n~ - F* . n~) / w_end of one element
/// (same scaling contract as the volume terms).
inline void surface_residual_element(ElementSolution u, int e, const Mesh& mesh,
                                     const ReferenceOperators& ref,
                                     const FaceFluxes& fluxes, std::span<State> out) {
  const int np = ref.size();
  const double inv_w_end = 1.0 / ref.weights[0];
  const auto& g = mesh.elements[e];
  for (int side = 0; side < 4; ++side) {
    for (int q = 0; q < np; ++q) {
      const int idx = face_node(side, q, ref.degree);
      const ScaledNormal sn = g.normals[side][q];
      const Vec4 own = normal_flux(u[idx], sn.nx, sn.ny);
      const Vec4 star = outward_interface_flux(mesh, fluxes, e, side, q);
      for (int c = 0; c < 4; ++c) out[idx][c] -= (own[c] - star[c]) * inv_w_end;
    }
  }
}

inline void surface_residual(const FieldState& field, const Mesh& mesh,
                             const ReferenceOperators& ref, const FaceFluxes& fluxes,
                             FieldState& out) {
  parallel_for(mesh.num_elements(), [&](int e) {
    surface_residual_element(field.element(e), e, mesh, ref, fluxes, out.element(e));
  });
}

struct SpatialConfig {
  FluxChoice flux = FluxChoice::kLlf;
  VolumeForm volume = VolumeForm::kEntropyStable;
};

/// Semidiscrete operator dU/dt = L(U). Holds the face-flux buffer between
/// calls; otherwise stateless.
class DgOperator {
 public:
  DgOperator(const Mesh& mesh, BoundaryConditions bcs, SpatialConfig config = {})
      : mesh_(&mesh),
        ref_(reference_operators(mesh.degree)),
        bcs_(std::move(bcs)),
        config_(config) {}

  const Mesh& mesh() const { return *mesh_; }
  const ReferenceOperators& ref() const { return *ref_; }
  const BoundaryConditions& bcs() const { return bcs_; }
  const SpatialConfig& config() const { return config_; }
  void set_config(SpatialConfig c) { config_ = c; }
  const FaceFluxes& last_face_fluxes() const { return fluxes_; }

  /// dU/dt at every node.
  void operator()(const FieldState& u, FieldState& dudt) {
    const Mesh& mesh = *mesh_;
    const ReferenceOperators& ref = *ref_;
    dudt.nodes_per_element = u.nodes_per_element;
    dudt.nodal.resize(u.nodal.size());
    dudt.t = u.t;
    interface_fluxes(u, mesh, config_.flux, bcs_, fluxes_);
    parallel_for(mesh.num_elements(), [&](int e) {
      auto out = dudt.element(e);
      const auto elem = u.element(e);
      const auto& g = mesh.elements[e];
      if (config_.volume == VolumeForm::kEntropyStable) {
        volume_residual_es(elem, g, ref, out);
      } else {
        volume_residual_standard(elem, g, ref, out);
      }
      surface_residual_element(elem, e, mesh, ref, fluxes_, out);
      for (std::size_t k = 0; k < out.size(); ++k) {
        const double s = -1.0 / g.jac[k];
        out[k] *= s;
      }
    });
  }

 private:
  const Mesh* mesh_;
  std::shared_ptr<const ReferenceOperators> ref_;
  BoundaryConditions bcs_;
  SpatialConfig config_;
  FaceFluxes fluxes_;
};

inline FieldState residual(const FieldState& field, const Mesh& mesh,
                           const BoundaryConditions& bcs, SpatialConfig config = {}) {
  DgOperator op(mesh, bcs, config);
  FieldState out;
  op(field, out);
  return out;
}

}  // namespace esdg
