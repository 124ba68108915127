#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "esdg/dgsem.hpp"
#include "esdg/error.hpp"
#include "esdg/field.hpp"
#include "esdg/parallel.hpp"

namespace esdg {

namespace detail {

/// Sum of per-element contributions in element order (deterministic for any
/// worker count).
template <class T, class Fn>
T ordered_sum(int n, T zero, Fn&& fn) {
  std::vector<T> parts(n, zero);
  parallel_for(n, [&](int e) { parts[e] = fn(e); });
  T total = zero;
  for (const T& p : parts) total += p;
  return total;
}

inline double node_weight(const ReferenceOperators& ref, const ElementGeometry& g, int i,
                          int j) {
  return ref.weights[i] * ref.weights[j] * g.jac[node_index(i, j, ref.degree)];
}

}  // namespace detail

/// I_eta = sum_e sum_nodes w w J eta(U).
inline double total_entropy(const FieldState& field, const Mesh& mesh) {
  const auto ref = reference_operators(mesh.degree);
  const int np = ref->size();
  return detail::ordered_sum(mesh.num_elements(), 0.0, [&](int e) {
    const auto& g = mesh.elements[e];
    double s = 0.0;
    for (int j = 0; j < np; ++j) {
      for (int i = 0; i < np; ++i) {
        s += detail::node_weight(*ref, g, i, j) *
             entropy_pair(field.at(e, node_index(i, j, mesh.degree))).eta;
      }
    }
    return s;
  });
}

/// sum w w J U per conserved component.
inline Vec4 conservation_totals(const FieldState& field, const Mesh& mesh) {
  const auto ref = reference_operators(mesh.degree);
  const int np = ref->size();
  State total = detail::ordered_sum(mesh.num_elements(), State{}, [&](int e) {
    const auto& g = mesh.elements[e];
    State s{};
    for (int j = 0; j < np; ++j) {
      for (int i = 0; i < np; ++i) {
        s += detail::node_weight(*ref, g, i, j) * field.at(e, node_index(i, j, mesh.degree));
      }
    }
    return s;
  });
  return total.q;
}

inline double domain_area(const Mesh& mesh) {
  const auto ref = reference_operators(mesh.degree);
  const int np = ref->size();
  return detail::ordered_sum(mesh.num_elements(), 0.0, [&](int e) {
    double s = 0.0;
    for (int j = 0; j < np; ++j) {
      for (int i = 0; i < np; ++i) s += detail::node_weight(*ref, mesh.elements[e], i, j);
    }
    return s;
  });
}

/// Discrete L2 error per conserved component against exact(x, y).
inline Vec4 l2_error(const FieldState& field, const std::function<State(double, double)>& exact,
                     const Mesh& mesh) {
  const auto ref = reference_operators(mesh.degree);
  const int np = ref->size();
  State sq = detail::ordered_sum(mesh.num_elements(), State{}, [&](int e) {
    const auto& g = mesh.elements[e];
    State s{};
    for (int j = 0; j < np; ++j) {
      for (int i = 0; i < np; ++i) {
        const int idx = node_index(i, j, mesh.degree);
        const State d = field.at(e, idx) - exact(g.x[idx], g.y[idx]);
        const double w = detail::node_weight(*ref, g, i, j);
        for (int c = 0; c < 4; ++c) s[c] += w * d[c] * d[c];
      }
    }
    return s;
  });
  Vec4 out;
  for (int c = 0; c < 4; ++c) out[c] = std::sqrt(sq[c]);
  return out;
}

/// log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for consecutive pairs.
inline std::vector<double> observed_orders(const std::vector<double>& errors,
                                           const std::vector<double>& hs) {
  if (errors.size() != hs.size()) {
    throw ConfigError("observed_orders: errors and hs differ in length");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]));
  }
  return out;
}

struct FieldExtrema {
  double min_rho = std::numeric_limits<double>::infinity();
  double min_p = std::numeric_limits<double>::infinity();
  double max_rho = -std::numeric_limits<double>::infinity();
  bool finite = true;
};

inline FieldExtrema field_extrema(const FieldState& field) {
  FieldExtrema x;
  for (const State& s : field.nodal) {
    for (double v : s.q) x.finite = x.finite && std::isfinite(v);
    x.min_rho = std::min(x.min_rho, s.rho());
    x.max_rho = std::max(x.max_rho, s.rho());
    x.min_p = std::min(x.min_p, pressure(s));
  }
  return x;
}

/// sum w w J V . dU/dt over one element.
inline double element_entropy_production(ElementSolution u, ElementSolution dudt,
                                         const ElementGeometry& g,
                                         const ReferenceOperators& ref) {
  const int np = ref.size();
  double s = 0.0;
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) {
      const int idx = node_index(i, j, ref.degree);
      const EntropyVars v = entropy_variables(u[idx]);
      double dot = 0.0;
      for (int c = 0; c < 4; ++c) dot += v.v[c] * dudt[idx][c];
      s += detail::node_weight(ref, g, i, j) * dot;
    }
  }
  return s;
}

/// d I_eta / dt of the semidiscretization: sum_e sum w w J V . dU/dt.
inline double entropy_production(const FieldState& field, const FieldState& dudt,
                                 const Mesh& mesh) {
  const auto ref = reference_operators(mesh.degree);
  return detail::ordered_sum(mesh.num_elements(), 0.0, [&](int e) {
    return element_entropy_production(field.element(e), dudt.element(e), mesh.elements[e],
                                      *ref);
  });
}

/// Boundary entropy flux of one element:
///   -sum_sides sum_q w_q ( V . F*.n~_out - psi . n~_out ),  psi = (rho u, rho v).
inline double element_entropy_boundary_flux(ElementSolution u, int e, const Mesh& mesh,
                                            const ReferenceOperators& ref,
                                            const FaceFluxes& fluxes) {
  const int np = ref.size();
  const auto& g = mesh.elements[e];
  double s = 0.0;
  for (int side = 0; side < 4; ++side) {
    for (int q = 0; q < np; ++q) {
      const int idx = face_node(side, q, ref.degree);
      const EntropyVars v = entropy_variables(u[idx]);
      const Vec4 star = outward_interface_flux(mesh, fluxes, e, side, q);
      const ScaledNormal sn = g.normals[side][q];
      double vf = 0.0;
      for (int c = 0; c < 4; ++c) vf += v.v[c] * star[c];
      const double psi_n = u[idx].mx() * sn.nx + u[idx].my() * sn.ny;
      s -= ref.weights[q] * (vf - psi_n);
    }
  }
  return s;
}

/// |LHS - RHS| of the single-element entropy balance: the production
/// sum w w J V . dU/dt against the element's boundary entropy flux. Zero
/// (to round-off) whenever the volume term uses an entropy-conservative
/// two-point flux, independently of the interface flux.
inline double entropy_balance_residual(const FieldState& field, const FieldState& dudt, int e,
                                       const Mesh& mesh, const FaceFluxes& fluxes) {
  const auto ref = reference_operators(mesh.degree);
  const double lhs =
      element_entropy_production(field.element(e), dudt.element(e), mesh.elements[e], *ref);
  const double rhs = element_entropy_boundary_flux(field.element(e), e, mesh, *ref, fluxes);
  return std::abs(lhs - rhs);
}

}  // namespace esdg
