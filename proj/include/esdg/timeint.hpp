#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "esdg/dgsem.hpp"
#include "esdg/diag.hpp"
#include "esdg/error.hpp"
#include "esdg/limiter.hpp"
#include "esdg/oe.hpp"

namespace esdg {

/// Shu-Osher form of SSP-RK3: stage k is a_k u^n + b_k (u^(k-1) + c_k dt L(u^(k-1))).
struct SspRk3Tableau {
  static constexpr std::array<double, 3> a{0.0, 0.75, 1.0 / 3.0};
  static constexpr std::array<double, 3> b{1.0, 0.25, 2.0 / 3.0};
};
static_assert(SspRk3Tableau::a[1] + SspRk3Tableau::b[1] == 1.0);
static_assert(SspRk3Tableau::a[2] + SspRk3Tableau::b[2] == 1.0);

/// One SSP-RK3 step for any vector-space value type; `post` runs after each stage.
template <class T, class Rhs, class Post>
T ssp_rk3(const T& u, double dt, Rhs&& rhs, Post&& post) {
  T stage = u;
  for (int k = 0; k < 3; ++k) {
    T next = stage + dt * rhs(stage);
    if (k > 0) next = SspRk3Tableau::a[k] * u + SspRk3Tableau::b[k] * next;
    post(next);
    stage = next;
  }
  return stage;
}

template <class T, class Rhs>
T ssp_rk3(const T& u, double dt, Rhs&& rhs) {
  return ssp_rk3(u, dt, std::forward<Rhs>(rhs), [](T&) {});
}

inline double default_cfl(int degree) { return 0.5 / (2.0 * degree + 1.0); }

/// dt = K min_e h_e / max_nodes(|u| + c).
inline double compute_dt(const FieldState& field, const Mesh& mesh, double cfl) {
  double dt = std::numeric_limits<double>::infinity();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    double speed = 0.0;
    for (const State& s : field.element(e)) {
      const Primitive w = to_primitive(s);
      const double c = std::sqrt(kGamma * w.p / w.rho);
      const double v = std::hypot(w.u, w.v) + c;
      if (!std::isfinite(v) || !(w.rho > 0.0) || !(w.p > 0.0)) {
        throw AdmissibilityError("compute_dt: non-finite wave speed in element " +
                                 std::to_string(e));
      }
      speed = std::max(speed, v);
    }
    dt = std::min(dt, cfl * mesh.elements[e].h_e / speed);
  }
  return dt;
}

struct StepConfig {
  double cfl = -1.0;  // <= 0 selects the default 0.5 / (2N + 1)
  double oe_scale = kOeDefaultScale;
  double threshold = kOeDefaultThreshold;
  OeMode oe_mode = OeMode::kCartesian;
  bool limiter = true;
  LimiterParams limiter_params;
  bool track_entropy = true;
};

struct StepReport {
  double t = 0.0;
  double dt = 0.0;
  double flagged_fraction = 0.0;
  double min_rho = 0.0;
  double min_p = 0.0;
  double entropy = 0.0;
  double oe_seconds = 0.0;
};

/// SSP-RK3 with the OE filter and positivity limiter after every stage.
class Integrator {
 public:
  Integrator(const Mesh& mesh, BoundaryConditions bcs, SpatialConfig spatial,
             StepConfig config)
      : mesh_(&mesh),
        op_(mesh, std::move(bcs), spatial),
        oe_(mesh, config.oe_mode),
        config_(config) {
    if (config_.cfl <= 0.0) config_.cfl = default_cfl(mesh.degree);
  }

  const StepConfig& config() const { return config_; }
  DgOperator& op() { return op_; }
  OscillationEliminator& oe() { return oe_; }
  double total_oe_seconds() const { return oe_seconds_; }

  double stable_dt(const FieldState& u) const { return compute_dt(u, *mesh_, config_.cfl); }

  /// Advances u by dt in place.
  StepReport step(FieldState& u, double dt) {
    StepReport report;
    report.dt = dt;
    const double t0 = u.t;
    int flagged_last = 0;
    for (int k = 0; k < 3; ++k) {
      const FieldState& src = k == 0 ? u : stage_;
      op_(src, rhs_);
      FieldState& dst = k == 0 ? stage_ : next_;
      dst.nodes_per_element = src.nodes_per_element;
      dst.nodal.resize(src.nodal.size());
      const double a = SspRk3Tableau::a[k];
      const double b = SspRk3Tableau::b[k];
      for (std::size_t n = 0; n < src.nodal.size(); ++n) {
        const State euler = src.nodal[n] + dt * rhs_.nodal[n];
        dst.nodal[n] = k == 0 ? euler : a * u.nodal[n] + b * euler;
      }
      dst.t = k == 0 ? t0 + dt : (k == 1 ? t0 + 0.5 * dt : t0 + dt);
      const auto stats = oe_.apply(dst, dt, config_.oe_scale, config_.threshold);
      oe_seconds_ += stats.seconds;
      report.oe_seconds += stats.seconds;
      flagged_last = stats.flagged;
      if (config_.limiter) {
        try {
          limit_field(dst, *mesh_, config_.limiter_params);
        } catch (const AdmissibilityError& err) {
          throw AdmissibilityError("stage " + std::to_string(k + 1) + ": " + err.what());
        }
      }
      if (k > 0) std::swap(stage_, next_);
    }
    std::swap(u.nodal, stage_.nodal);
    u.t = t0 + dt;
    const FieldExtrema ext = field_extrema(u);
    report.t = u.t;
    report.min_rho = ext.min_rho;
    report.min_p = ext.min_p;
    report.flagged_fraction =
        static_cast<double>(flagged_last) / std::max(1, mesh_->num_elements());
    if (config_.track_entropy) report.entropy = total_entropy(u, *mesh_);
    return report;
  }

 private:
  const Mesh* mesh_;
  DgOperator op_;
  OscillationEliminator oe_;
  StepConfig config_;
  FieldState stage_, next_, rhs_;
  double oe_seconds_ = 0.0;
};

}  // namespace esdg
