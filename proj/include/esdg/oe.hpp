#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "esdg/error.hpp"
#include "esdg/field.hpp"
#include "esdg/mesh.hpp"
#include "esdg/parallel.hpp"
#include "esdg/refops.hpp"

namespace esdg {

enum class OeMode { kCartesian, kCurvilinear, kOff };

inline constexpr double kOeDefaultScale = 0.2;
inline constexpr double kOeDefaultThreshold = 0.02;

// ---------------------------------------------------------------------------
// Tensor Legendre basis ordered by level max(a, b): level k occupies basis
// indices [k^2, (k+1)^2), so the first (m+1)^2 functions span Q_m.

struct ModeIndex {
  int a;
  int b;
};

inline std::vector<ModeIndex> level_ordered_modes(int degree) {
  std::vector<ModeIndex> modes;
  for (int k = 0; k <= degree; ++k) {
    for (int b = 0; b < k; ++b) modes.push_back({k, b});
    for (int a = 0; a <= k; ++a) modes.push_back({a, k});
  }
  return modes;
}

/// 1D Legendre Vandermonde V(i, a) = P_a(x_i) on the LGL nodes.
inline Eigen::MatrixXd legendre_vandermonde(const ReferenceOperators& ref) {
  const int np = ref.size();
  Eigen::MatrixXd v(np, np);
  for (int i = 0; i < np; ++i) {
    for (int a = 0; a < np; ++a) v(i, a) = legendre(a, ref.nodes[i]).p;
  }
  return v;
}

/// L2 projections P^0..P^N on one element under the J-weighted LGL inner
/// product. With G = L L^T the level-ordered Gram matrix, the functions
/// psi = L^-1 phi are orthonormal and nested, so
///   P^m u = sum_{alpha < (m+1)^2} (u, psi_alpha) psi_alpha.
struct ProjectionHierarchy {
  int degree = 0;
  Eigen::MatrixXd analysis;   // coefficients (u, psi_alpha) from nodal values
  Eigen::MatrixXd synthesis;  // nodal values of psi_alpha (columns)

  static ProjectionHierarchy build(const ElementGeometry& g, const ReferenceOperators& ref,
                                   int element_id = -1) {
    const int n = ref.degree;
    const int np = ref.size();
    const int nv = np * np;
    const auto modes = level_ordered_modes(n);
    const Eigen::MatrixXd v1 = legendre_vandermonde(ref);
    Eigen::MatrixXd phi(nv, nv);  // phi(node, mode)
    Eigen::VectorXd wj(nv);
    for (int j = 0; j < np; ++j) {
      for (int i = 0; i < np; ++i) {
        const int idx = node_index(i, j, n);
        wj(idx) = ref.weights[i] * ref.weights[j] * g.jac[idx];
        for (int m = 0; m < nv; ++m) phi(idx, m) = v1(i, modes[m].a) * v1(j, modes[m].b);
      }
    }
    const Eigen::MatrixXd gram = phi.transpose() * wj.asDiagonal() * phi;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw GeometryError("element " + std::to_string(element_id) +
                          ": singular projection Gram matrix");
    }
    const Eigen::MatrixXd l = llt.matrixL();
    ProjectionHierarchy h;
    h.degree = n;
    // analysis = L^-1 phi^T W, synthesis = phi L^-T
    h.analysis = l.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd(phi.transpose() * wj.asDiagonal()));
    h.synthesis = l.triangularView<Eigen::Lower>()
                      .solve(Eigen::MatrixXd(phi.transpose()))
                      .transpose();
    return h;
  }

  /// P^m u at the nodes (m clamped to [0, N]).
  Eigen::VectorXd project(const Eigen::VectorXd& u, int m) const {
    m = std::clamp(m, 0, degree);
    const int count = (m + 1) * (m + 1);
    const Eigen::VectorXd c = analysis * u;
    return synthesis.leftCols(count) * c.head(count);
  }
};

/// u = u0 + sum_k delta_k with u0 = P^0 u constant and delta_k = P^k u - P^{k-1} u.
struct ProjectionDecomposition {
  double u0 = 0.0;
  std::vector<Eigen::VectorXd> deltas;  // deltas[k - 1] for k = 1..N
};

inline ProjectionDecomposition projection_decompose(const Eigen::VectorXd& u,
                                                    const ProjectionHierarchy& h) {
  const Eigen::VectorXd c = h.analysis * u;
  ProjectionDecomposition out;
  out.u0 = (h.synthesis.col(0) * c(0))(0);
  for (int k = 1; k <= h.degree; ++k) {
    const int begin = k * k;
    const int count = (k + 1) * (k + 1) - begin;
    out.deltas.push_back(h.synthesis.middleCols(begin, count) * c.segment(begin, count));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Damping coefficients and indicator

/// sigma_m^(f) per face and level, delta_m per level, indicator I = sum_f sigma_0.
struct DampingData {
  std::array<std::vector<double>, 4> sigmas;
  std::vector<double> deltas;
  double indicator = 0.0;
  double beta = 0.0;
  double h_e = 0.0;
};

namespace detail {

/// Multi-indices (a, b) of physical derivatives d^a/dx^a d^b/dy^b included in
/// the jump sums: all |alpha| <= N (curvilinear) or the coordinate-aligned
/// ones (cartesian; the zeroth derivative appears once).
inline std::vector<ModeIndex> derivative_indices(int degree, OeMode mode) {
  std::vector<ModeIndex> out{{0, 0}};
  if (mode == OeMode::kCartesian) {
    for (int n = 1; n <= degree; ++n) {
      out.push_back({n, 0});
      out.push_back({0, n});
    }
  } else {
    for (int order = 1; order <= degree; ++order) {
      for (int b = 0; b <= order; ++b) out.push_back({order - b, b});
    }
  }
  return out;
}

/// Physical x- and y-derivatives of a nodal field through the inverse metric.
inline void physical_gradient(std::span<const double> u, const ElementGeometry& g,
                              const ReferenceOperators& ref, std::span<double> dx,
                              std::span<double> dy) {
  const int n = ref.degree;
  const int np = ref.size();
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) {
      double u_xi = 0.0, u_eta = 0.0;
      for (int k = 0; k < np; ++k) {
        u_xi += ref.d(i, k) * u[node_index(k, j, n)];
        u_eta += ref.d(j, k) * u[node_index(i, k, n)];
      }
      const int idx = node_index(i, j, n);
      const double inv_j = 1.0 / g.jac[idx];
      dx[idx] = (g.y_eta[idx] * u_xi - g.y_xi[idx] * u_eta) * inv_j;
      dy[idx] = (-g.x_eta[idx] * u_xi + g.x_xi[idx] * u_eta) * inv_j;
    }
  }
}

/// Face traces of every derivative in `alphas` for all four components:
/// layout [side][q][alpha][component].
inline void derivative_traces(ElementSolution u, const ElementGeometry& g,
                              const ReferenceOperators& ref,
                              const std::vector<ModeIndex>& alphas,
                              std::vector<double>& out) {
  const int n = ref.degree;
  const int np = ref.size();
  const int nv = np * np;
  const int na = static_cast<int>(alphas.size());
  out.assign(static_cast<std::size_t>(4) * np * na * 4, 0.0);
  // x-derivatives d^a/dx^a for a = 0..N, then y-derivatives of each.
  std::vector<std::vector<double>> xd(np, std::vector<double>(nv));
  std::vector<double> scratch(nv), cur(nv), next(nv);
  for (int c = 0; c < 4; ++c) {
    for (int k = 0; k < nv; ++k) xd[0][k] = u[k][c];
    for (int a = 1; a <= n; ++a) physical_gradient(xd[a - 1], g, ref, xd[a], scratch);
    for (int ai = 0; ai < na; ++ai) {
      const ModeIndex al = alphas[ai];
      cur = xd[al.a];
      for (int b = 0; b < al.b; ++b) {
        physical_gradient(cur, g, ref, scratch, next);
        std::swap(cur, next);
      }
      for (int side = 0; side < 4; ++side) {
        for (int q = 0; q < np; ++q) {
          out[((static_cast<std::size_t>(side) * np + q) * na + ai) * 4 + c] =
              cur[face_node(side, q, n)];
        }
      }
    }
  }
}

inline double factorial(int m) {
  double f = 1.0;
  for (int k = 2; k <= m; ++k) f *= k;
  return f;
}

/// Per-component normalization ||U - Ubar||_inf on the element; zero marks the
/// "U equals its mean" branch.
inline std::array<double, 4> deviation_norms(ElementSolution u, const State& mean) {
  std::array<double, 4> dev{}, mag{};
  for (const State& s : u) {
    for (int c = 0; c < 4; ++c) {
      dev[c] = std::max(dev[c], std::abs(s[c] - mean[c]));
      mag[c] = std::max(mag[c], std::abs(s[c]));
    }
  }
  for (int c = 0; c < 4; ++c) {
    if (dev[c] <= 1e-12 * std::max(1.0, mag[c])) dev[c] = 0.0;
  }
  return dev;
}

}  // namespace detail

/// Oscillation-eliminating filter with shock-indicator gating.
class OscillationEliminator {
 public:
  struct Stats {
    int flagged = 0;
    double seconds = 0.0;
  };

  OscillationEliminator(const Mesh& mesh, OeMode mode)
      : mesh_(&mesh), ref_(reference_operators(mesh.degree)), mode_(mode) {
    alphas_ = detail::derivative_indices(
        mesh.degree, mode == OeMode::kOff ? OeMode::kCurvilinear : mode);
    vander_ = legendre_vandermonde(*ref_);
    vander_inv_ = vander_.inverse();
    if (mode == OeMode::kCurvilinear) {
      hierarchies_.resize(mesh.num_elements());
      parallel_for(mesh.num_elements(), [&](int e) {
        hierarchies_[e] = ProjectionHierarchy::build(mesh.elements[e], *ref_, e);
      });
    }
  }

  OeMode mode() const { return mode_; }
  const ProjectionHierarchy& hierarchy(int e) const { return hierarchies_.at(e); }

  /// Per-component ||U - U_bar||_inf over the whole domain (U_bar the
  /// J-weighted domain mean); the Cartesian normalization.
  std::array<double, 4> global_deviation(const FieldState& field) const {
    const int np = ref_->size();
    State sum{};
    double area = 0.0;
    for (int e = 0; e < mesh_->num_elements(); ++e) {
      const auto& g = mesh_->elements[e];
      for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) {
          const int idx = node_index(i, j, mesh_->degree);
          const double w = ref_->weights[i] * ref_->weights[j] * g.jac[idx];
          area += w;
          sum += w * field.at(e, idx);
        }
      }
    }
    const State mean = (1.0 / area) * sum;
    std::array<double, 4> dev{};
    for (const State& s : field.nodal) {
      for (int c = 0; c < 4; ++c) dev[c] = std::max(dev[c], std::abs(s[c] - mean[c]));
    }
    return dev;
  }

  /// I^(e) = sum_f sigma_0^(f) from zeroth-order face jumps.
  double shock_indicator(const FieldState& field, int e) const {
    if (mode_ == OeMode::kCartesian) {
      const auto global = global_deviation(field);
      return shock_indicator(field, e, &global);
    }
    return shock_indicator(field, e, nullptr);
  }

  /// Indicator of every element.
  std::vector<double> indicators(const FieldState& field) const {
    std::array<double, 4> global{};
    const std::array<double, 4>* gptr = nullptr;
    if (mode_ == OeMode::kCartesian) {
      global = global_deviation(field);
      gptr = &global;
    }
    std::vector<double> out(mesh_->num_elements());
    parallel_for(mesh_->num_elements(), [&](int e) { out[e] = shock_indicator(field, e, gptr); });
    return out;
  }

  /// As above with a precomputed domain normalization (Cartesian mode).
  double shock_indicator(const FieldState& field, int e,
                         const std::array<double, 4>* global) const {
    const auto& g = mesh_->elements[e];
    const auto u = field.element(e);
    const auto dev = denominators(u, g, global);
    const int np = ref_->size();
    const double scale = 1.0 / (2.0 * (2.0 * mesh_->degree - 1.0));
    double total = 0.0;
    for (int side = 0; side < 4; ++side) {
      const FaceRef fr = mesh_->element_faces[e][side];
      const Face& f = mesh_->faces[fr.face];
      if (f.is_boundary()) continue;
      const int nb = fr.is_left ? f.right_elem : f.left_elem;
      const int nb_side = fr.is_left ? f.right_side : f.left_side;
      double sigma = 0.0;
      for (int c = 0; c < 4; ++c) {
        if (dev[c] == 0.0) continue;
        double num = 0.0, den = 0.0;
        for (int q = 0; q < np; ++q) {
          const double w = ref_->weights[q] * g.normals[side][q].measure();
          const int own = face_node(side, q, mesh_->degree);
          const int other = face_node(nb_side, mesh_->partner_node(f, q), mesh_->degree);
          num += w * std::abs(field.at(nb, other)[c] - u[own][c]);
          den += w;
        }
        sigma = std::max(sigma, scale * (num / den) / dev[c]);
      }
      total += sigma;
    }
    return total;
  }

  /// Full damping data of element e (all levels), evaluated from `field`.
  DampingData damping(const FieldState& field, int e) const {
    std::array<double, 4> global{};
    if (mode_ == OeMode::kCartesian) global = global_deviation(field);
    std::vector<double> own;
    detail::derivative_traces(field.element(e), mesh_->elements[e], *ref_, alphas_, own);
    std::array<std::vector<double>, 4> nb;
    for (int side = 0; side < 4; ++side) {
      const FaceRef fr = mesh_->element_faces[e][side];
      const Face& f = mesh_->faces[fr.face];
      if (f.is_boundary()) continue;
      const int other = fr.is_left ? f.right_elem : f.left_elem;
      detail::derivative_traces(field.element(other), mesh_->elements[other], *ref_, alphas_,
                                nb[side]);
    }
    return damping_from_traces(field, e, own, nb,
                               mode_ == OeMode::kCartesian ? &global : nullptr);
  }

  /// In-place selective filter: elements with I > threshold are replaced by
  /// u0 + sum_k exp(-scale dt sum_{m<=k} delta_m) delta_k component-wise.
  Stats apply(FieldState& field, double dt, double scale, double threshold) {
    Stats stats;
    if (mode_ == OeMode::kOff) return stats;
    const auto start = std::chrono::steady_clock::now();
    const Mesh& mesh = *mesh_;
    const int ne = mesh.num_elements();
    std::array<double, 4> global{};
    const std::array<double, 4>* gptr = nullptr;
    if (mode_ == OeMode::kCartesian) {
      global = global_deviation(field);
      gptr = &global;
    }
    indicators_.resize(ne);
    parallel_for(ne, [&](int e) { indicators_[e] = shock_indicator(field, e, gptr); });
    flagged_.assign(ne, 0);
    needed_.assign(ne, 0);
    for (int e = 0; e < ne; ++e) {
      if (indicators_[e] > threshold) {
        flagged_[e] = 1;
        ++stats.flagged;
        needed_[e] = 1;
        for (const FaceRef& fr : mesh.element_faces[e]) {
          const Face& f = mesh.faces[fr.face];
          if (!f.is_boundary()) needed_[fr.is_left ? f.right_elem : f.left_elem] = 1;
        }
      }
    }
    if (stats.flagged > 0) {
      traces_.resize(ne);
      parallel_for(ne, [&](int e) {
        if (needed_[e]) {
          detail::derivative_traces(field.element(e), mesh.elements[e], *ref_, alphas_,
                                    traces_[e]);
        }
      });
      deltas_.resize(ne);
      parallel_for(ne, [&](int e) {
        if (!flagged_[e]) return;
        std::array<std::vector<double>, 4> nb;
        for (int side = 0; side < 4; ++side) {
          const FaceRef fr = mesh.element_faces[e][side];
          const Face& f = mesh.faces[fr.face];
          if (!f.is_boundary()) nb[side] = traces_[fr.is_left ? f.right_elem : f.left_elem];
        }
        deltas_[e] = damping_from_traces(field, e, traces_[e], nb, gptr).deltas;
      });
      parallel_for(ne, [&](int e) {
        if (flagged_[e]) damp_element(field.element(e), e, deltas_[e], scale * dt);
      });
    }
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return stats;
  }

  const std::vector<double>& last_indicators() const { return indicators_; }

  /// Applies exp(-tau sum_{m<=k} delta_m) to level k of every component.
  void damp_element(MutableElementSolution u, int e, const std::vector<double>& deltas,
                    double tau) const {
    const int n = ref_->degree;
    std::vector<double> factor(n + 1, 1.0);
    double cum = 0.0;
    for (int k = 0; k <= n; ++k) {
      cum += deltas[k];
      factor[k] = k == 0 ? 1.0 : std::exp(-tau * cum);
    }
    if (mode_ == OeMode::kCartesian) {
      damp_modal(u, factor);
    } else {
      damp_projection(u, hierarchies_.at(e), factor);
    }
  }

  /// Legendre modal path (axis-aligned affine elements).
  void damp_modal(MutableElementSolution u, const std::vector<double>& factor) const {
    const int np = ref_->size();
    Eigen::MatrixXd nodal(np, np), modal(np, np);
    for (int c = 0; c < 4; ++c) {
      for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) nodal(i, j) = u[node_index(i, j, np - 1)][c];
      }
      modal = vander_inv_ * nodal * vander_inv_.transpose();
      for (int b = 0; b < np; ++b) {
        for (int a = 0; a < np; ++a) modal(a, b) *= factor[std::max(a, b)];
      }
      nodal = vander_ * modal * vander_.transpose();
      for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) u[node_index(i, j, np - 1)][c] = nodal(i, j);
      }
    }
  }

  /// Projection-difference path (general curvilinear elements).
  static void damp_projection(MutableElementSolution u, const ProjectionHierarchy& h,
                              const std::vector<double>& factor) {
    const int nv = static_cast<int>(u.size());
    Eigen::VectorXd col(nv);
    for (int c = 0; c < 4; ++c) {
      for (int k = 0; k < nv; ++k) col(k) = u[k][c];
      Eigen::VectorXd coeff = h.analysis * col;
      for (int level = 1; level <= h.degree; ++level) {
        const int begin = level * level;
        const int count = (level + 1) * (level + 1) - begin;
        coeff.segment(begin, count) *= factor[level];
      }
      col = h.synthesis * coeff;
      for (int k = 0; k < nv; ++k) u[k][c] = col(k);
    }
  }

 private:
  /// Element-wise "U = U_bar" test, then the normalization: the element norm,
  /// or the domain norm when `global` is given.
  std::array<double, 4> denominators(ElementSolution u, const ElementGeometry& g,
                                     const std::array<double, 4>* global) const {
    auto dev = detail::deviation_norms(u, cell_average(u, g, *ref_));
    if (global) {
      for (int c = 0; c < 4; ++c) {
        if (dev[c] != 0.0) dev[c] = (*global)[c];
      }
    }
    return dev;
  }

  DampingData damping_from_traces(const FieldState& field, int e,
                                  const std::vector<double>& own,
                                  const std::array<std::vector<double>, 4>& nb,
                                  const std::array<double, 4>* global) const {
    const Mesh& mesh = *mesh_;
    const int n = mesh.degree;
    const int np = n + 1;
    const int na = static_cast<int>(alphas_.size());
    const auto& g = mesh.elements[e];
    const auto u = field.element(e);
    const State mean = cell_average(u, g, *ref_);
    const auto dev = denominators(u, g, global);

    DampingData d;
    d.h_e = g.h_e;
    {
      // beta_e = |u_bar| + c_bar from J-weighted averages of nodal u, v, c.
      double area = 0.0, ub = 0.0, vb = 0.0, cb = 0.0;
      for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) {
          const int idx = node_index(i, j, n);
          const double w = ref_->weights[i] * ref_->weights[j] * g.jac[idx];
          const State& s = u[idx].rho() > 0.0 ? u[idx] : mean;
          const Primitive p = to_primitive(s);
          area += w;
          ub += w * p.u;
          vb += w * p.v;
          cb += w * std::sqrt(kGamma * std::max(p.p, 0.0) / p.rho);
        }
      }
      d.beta = std::hypot(ub / area, vb / area) + cb / area;
    }
    d.deltas.assign(np, 0.0);
    for (int side = 0; side < 4; ++side) {
      d.sigmas[side].assign(np, 0.0);
      const FaceRef fr = mesh.element_faces[e][side];
      const Face& f = mesh.faces[fr.face];
      if (f.is_boundary()) continue;
      // Face-averaged |jump| per derivative and component.
      std::vector<double> avg(static_cast<std::size_t>(na) * 4, 0.0);
      double den = 0.0;
      for (int q = 0; q < np; ++q) {
        const double w = ref_->weights[q] * g.normals[side][q].measure();
        den += w;
        const int qn = mesh.partner_node(f, q);
        const int nb_side = fr.is_left ? f.right_side : f.left_side;
        for (int ai = 0; ai < na; ++ai) {
          for (int c = 0; c < 4; ++c) {
            const double mine = own[((static_cast<std::size_t>(side) * np + q) * na + ai) * 4 + c];
            const double theirs =
                nb[side][((static_cast<std::size_t>(nb_side) * np + qn) * na + ai) * 4 + c];
            avg[ai * 4 + c] += w * std::abs(theirs - mine);
          }
        }
      }
      for (double& a : avg) a /= den;
      for (int m = 0; m <= n; ++m) {
        const double pre = (2.0 * m + 1.0) * std::pow(g.h_e, m) /
                           (2.0 * (2.0 * n - 1.0) * detail::factorial(m));
        double sigma = 0.0;
        for (int c = 0; c < 4; ++c) {
          if (dev[c] == 0.0) continue;
          double sum = 0.0;
          for (int ai = 0; ai < na; ++ai) {
            if (alphas_[ai].a + alphas_[ai].b <= m) sum += avg[ai * 4 + c];
          }
          sigma = std::max(sigma, pre * sum / dev[c]);
        }
        d.sigmas[side][m] = sigma;
      }
    }
    for (int m = 0; m <= n; ++m) {
      double s = 0.0;
      for (int side = 0; side < 4; ++side) s += d.sigmas[side][m];
      d.deltas[m] = d.beta / g.h_e * s;
    }
    for (int side = 0; side < 4; ++side) d.indicator += d.sigmas[side][0];
    return d;
  }

  const Mesh* mesh_;
  std::shared_ptr<const ReferenceOperators> ref_;
  OeMode mode_;
  std::vector<ModeIndex> alphas_;
  Eigen::MatrixXd vander_, vander_inv_;
  std::vector<ProjectionHierarchy> hierarchies_;
  std::vector<double> indicators_;
  std::vector<char> flagged_, needed_;
  std::vector<std::vector<double>> traces_;
  std::vector<std::vector<double>> deltas_;
};

}  // namespace esdg
