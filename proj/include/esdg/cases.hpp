#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "esdg/error.hpp"
#include "esdg/mesh.hpp"
#include "esdg/physics.hpp"

namespace esdg {

// ---------------------------------------------------------------------------
// Isentropic vortex

struct VortexParams {
  double strength = 5.0;
  double u_b = 1.0;
  double v_b = 1.0;
  /// Period of the domain used to wrap the advected center; <= 0 disables.
  double period = 20.0;
  double lo = -10.0;
};

inline State vortex_exact(double x, double y, double t, const VortexParams& vp = {}) {
  const double pi = std::acos(-1.0);
  double dx = x - vp.u_b * t;
  double dy = y - vp.v_b * t;
  if (vp.period > 0.0) {
    auto wrap = [&](double d) {
      const double shifted = d - vp.lo;
      return vp.lo + shifted - vp.period * std::floor(shifted / vp.period);
    };
    dx = wrap(dx);
    dy = wrap(dy);
  }
  const double r2 = dx * dx + dy * dy;
  const double e_half = std::exp(0.5 * (1.0 - r2));
  const double u = vp.u_b - vp.strength / (2.0 * pi) * dy * e_half;
  const double v = vp.v_b + vp.strength / (2.0 * pi) * dx * e_half;
  const double temp = 1.0 - (kGamma - 1.0) * vp.strength * vp.strength /
                                (8.0 * kGamma * pi * pi) * std::exp(1.0 - r2);
  const double rho = std::pow(temp, 1.0 / (kGamma - 1.0));
  const double p = std::pow(temp, kGamma / (kGamma - 1.0));
  return to_conservative({rho, u, v, p});
}

// ---------------------------------------------------------------------------
// Two-dimensional Riemann problems on [0,2]^2 (mirror extension of [0,1]^2)

inline State riemann_initial(int case_id, double x, double y) {
  Primitive q1, q2, q3, q4;  // (x<.5,y<.5) (x<.5,y>.5) (x>.5,y<.5) (x>.5,y>.5)
  if (case_id == 12) {
    q1 = {0.8, 0.0, 0.0, 1.0};
    q2 = {1.0, 0.7276, 0.0, 1.0};
    q3 = {1.0, 0.0, 0.7276, 1.0};
    q4 = {0.5313, 0.0, 0.0, 0.4};
  } else if (case_id == 13) {
    q1 = {0.8, 0.1, -0.3, 0.4};
    q2 = {0.5197, -0.6259, -0.3, 0.4};
    q3 = {0.5313, 0.1, 0.4276, 0.4};
    q4 = {1.0, 0.1, -0.3, 1.0};
  } else {
    throw ConfigError("unknown Riemann case " + std::to_string(case_id));
  }
  if (x > 1.0) x = 2.0 - x;
  if (y > 1.0) y = 2.0 - y;
  const bool left = x < 0.5;
  const bool low = y < 0.5;
  if (left) return to_conservative(low ? q1 : q2);
  return to_conservative(low ? q3 : q4);
}

// ---------------------------------------------------------------------------
// Double Mach reflection on [0,4]x[0,1]

inline Primitive dmr_post_shock() {
  const double pi = std::acos(-1.0);
  return {8.0, 8.25 * std::cos(pi / 6.0), -8.25 * std::sin(pi / 6.0), 116.5};
}

inline Primitive dmr_pre_shock() { return {1.4, 0.0, 0.0, 1.0}; }

/// x-position of the incident shock at height y and time t.
inline double dmr_shock_x(double y, double t) {
  return 1.0 / 6.0 + (y + 20.0 * t) / std::sqrt(3.0);
}

inline State dmr_initial(double x, double y) {
  return to_conservative(x < dmr_shock_x(y, 0.0) ? dmr_post_shock() : dmr_pre_shock());
}

// ---------------------------------------------------------------------------
// Boundary conditions, imposed weakly through ghost states

struct Periodic {};
struct Inflow {
  State exterior;
};
struct Outflow {};
struct SlipWall {};
struct DmrTop {};
struct DmrBottom {};

using BoundaryKind = std::variant<Periodic, Inflow, Outflow, SlipWall, DmrTop, DmrBottom>;

inline State mirror_state(const State& interior, double nx, double ny) {
  const double un = (interior.mx() * nx + interior.my() * ny);
  return {interior.rho(), interior.mx() - 2.0 * un * nx,
          interior.my() - 2.0 * un * ny, interior.energy()};
}

/// Exterior state for a boundary node with unit outward normal (nx, ny) at
/// position (x, y) and time t.
inline State ghost_state(const BoundaryKind& kind, const State& interior, double nx,
                         double ny, double x, double y, double t) {
  (void)y;
  return std::visit(
      [&](const auto& k) -> State {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Periodic>) {
          throw std::logic_error("periodic boundaries are resolved by the mesh");
        } else if constexpr (std::is_same_v<K, Inflow>) {
          return k.exterior;
        } else if constexpr (std::is_same_v<K, Outflow>) {
          return interior;
        } else if constexpr (std::is_same_v<K, SlipWall>) {
          return mirror_state(interior, nx, ny);
        } else if constexpr (std::is_same_v<K, DmrTop>) {
          return to_conservative(x < dmr_shock_x(1.0, t) ? dmr_post_shock()
                                                         : dmr_pre_shock());
        } else {
          if (x < 1.0 / 6.0) return to_conservative(dmr_post_shock());
          return mirror_state(interior, nx, ny);
        }
      },
      kind);
}

/// Boundary tag -> condition.
class BoundaryConditions {
 public:
  BoundaryConditions() = default;

  void set(int tag, BoundaryKind kind) { kinds_[tag] = std::move(kind); }

  const BoundaryKind& at(int tag) const {
    auto it = kinds_.find(tag);
    if (it == kinds_.end()) {
      throw ConfigError("no boundary condition for tag " + std::to_string(tag));
    }
    return it->second;
  }

  bool has(int tag) const { return kinds_.count(tag) != 0; }

 private:
  std::map<int, BoundaryKind> kinds_;
};

// ---------------------------------------------------------------------------
// Case catalog

enum class CaseId { kVortex, kRiemann12, kRiemann13, kDmr, kFreestream, kCustomMesh };

inline CaseId parse_case_id(const std::string& name) {
  if (name == "vortex") return CaseId::kVortex;
  if (name == "riemann12") return CaseId::kRiemann12;
  if (name == "riemann13") return CaseId::kRiemann13;
  if (name == "dmr") return CaseId::kDmr;
  if (name == "freestream") return CaseId::kFreestream;
  if (name == "custom-mesh") return CaseId::kCustomMesh;
  throw ConfigError("case: unknown case id '" + name + "'");
}

inline std::string case_name(CaseId id) {
  switch (id) {
    case CaseId::kVortex: return "vortex";
    case CaseId::kRiemann12: return "riemann12";
    case CaseId::kRiemann13: return "riemann13";
    case CaseId::kDmr: return "dmr";
    case CaseId::kFreestream: return "freestream";
    default: return "custom-mesh";
  }
}

/// Free-stream state used by the freestream and custom-mesh cases.
inline Primitive freestream_primitive() { return {1.0, 0.3, -0.2, 1.0}; }

struct CaseSpec {
  CaseId id = CaseId::kVortex;
  Rect domain;
  bool periodic = true;
  double default_t_end = 1.0;
  std::function<State(double, double)> initial;
  /// Exact solution (x, y, t), when known.
  std::optional<std::function<State(double, double, double)>> exact;
  BoundaryConditions bcs;
};

inline CaseSpec make_case(CaseId id) {
  CaseSpec c;
  c.id = id;
  switch (id) {
    case CaseId::kVortex:
      c.domain = {-10.0, 10.0, -10.0, 10.0};
      c.default_t_end = 2.0;
      c.initial = [](double x, double y) { return vortex_exact(x, y, 0.0); };
      c.exact = [](double x, double y, double t) { return vortex_exact(x, y, t); };
      break;
    case CaseId::kRiemann12:
    case CaseId::kRiemann13: {
      const int which = id == CaseId::kRiemann12 ? 12 : 13;
      c.domain = {0.0, 2.0, 0.0, 2.0};
      c.default_t_end = which == 12 ? 0.2 : 0.3;
      c.initial = [which](double x, double y) { return riemann_initial(which, x, y); };
      break;
    }
    case CaseId::kDmr:
      c.domain = {0.0, 4.0, 0.0, 1.0};
      c.periodic = false;
      c.default_t_end = 0.2;
      c.initial = dmr_initial;
      c.bcs.set(kTagLeft, Inflow{to_conservative(dmr_post_shock())});
      c.bcs.set(kTagRight, Outflow{});
      c.bcs.set(kTagBottom, DmrBottom{});
      c.bcs.set(kTagTop, DmrTop{});
      break;
    case CaseId::kFreestream:
    case CaseId::kCustomMesh: {
      const State s = to_conservative(freestream_primitive());
      c.domain = {-10.0, 10.0, -10.0, 10.0};
      c.default_t_end = 1.0;
      c.periodic = id == CaseId::kFreestream;
      c.initial = [s](double, double) { return s; };
      c.exact = [s](double, double, double) { return s; };
      break;
    }
  }
  return c;
}

}  // namespace esdg
