#pragma once

#include <algorithm>
#include <sstream>

#include "esdg/error.hpp"
#include "esdg/field.hpp"
#include "esdg/parallel.hpp"

namespace esdg {

struct LimiterParams {
  double eps = kAdmissibilityFloor;
  int bisection_steps = 50;
};

struct LimiterResult {
  double theta_rho = 1.0;
  double theta_p = 1.0;
};

/// Zhang-Shu positivity limiter on one element: scales the deviation from the
/// cell average so that rho >= eps and then p >= eps at every node.
inline LimiterResult limit_element(MutableElementSolution u, const ElementGeometry& g,
                                   const ReferenceOperators& ref, const LimiterParams& params = {},
                                   int element_id = -1, double t = 0.0) {
  const State mean = cell_average(u, g, ref);
  const double eps = params.eps;
  if (!(mean.rho() > eps) || !(pressure(mean) > eps)) {
    std::ostringstream msg;
    msg << "inadmissible cell average in element " << element_id << " at t=" << t
        << " (rho=" << mean.rho() << ", p=" << pressure(mean) << ")";
    throw AdmissibilityError(msg.str());
  }
  LimiterResult result;

  double rho_min = mean.rho();
  for (const State& s : u) rho_min = std::min(rho_min, s.rho());
  if (rho_min < eps) {
    result.theta_rho = std::clamp((mean.rho() - eps) / (mean.rho() - rho_min), 0.0, 1.0);
    for (State& s : u) s.q[0] = mean.rho() + result.theta_rho * (s.rho() - mean.rho());
  }

  double theta = 1.0;
  for (const State& s : u) {
    if (pressure(s) >= eps) continue;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < params.bisection_steps; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (pressure(mean + mid * (s - mean)) >= eps) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    theta = std::min(theta, lo);
  }
  if (theta < 1.0) {
    result.theta_p = theta;
    for (State& s : u) s = mean + theta * (s - mean);
  }
  return result;
}

inline void limit_field(FieldState& field, const Mesh& mesh, const LimiterParams& params = {}) {
  const auto ref = reference_operators(mesh.degree);
  parallel_for(mesh.num_elements(), [&](int e) {
    limit_element(field.element(e), mesh.elements[e], *ref, params, e, field.t);
  });
}

}  // namespace esdg
