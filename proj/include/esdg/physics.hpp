#pragma once

#include <array>
#include <cmath>
#include <string>

#include "esdg/error.hpp"

namespace esdg {

inline constexpr double kGamma = 1.4;
/// Floor below which density or pressure counts as inadmissible.
inline constexpr double kAdmissibilityFloor = 1e-13;

using Vec4 = std::array<double, 4>;

/// Conservative variables (rho, rho u, rho v, E) at one point.
struct State {
  Vec4 q{};

  constexpr State() = default;
  constexpr explicit State(const Vec4& v) : q(v) {}
  constexpr State(double rho, double mx, double my, double energy)
      : q{rho, mx, my, energy} {}

  constexpr double& operator[](std::size_t k) { return q[k]; }
  constexpr double operator[](std::size_t k) const { return q[k]; }

  constexpr double rho() const { return q[0]; }
  constexpr double mx() const { return q[1]; }
  constexpr double my() const { return q[2]; }
  constexpr double energy() const { return q[3]; }

  State& operator+=(const State& o) {
    for (int k = 0; k < 4; ++k) q[k] += o.q[k];
    return *this;
  }
  State& operator-=(const State& o) {
    for (int k = 0; k < 4; ++k) q[k] -= o.q[k];
    return *this;
  }
  State& operator*=(double s) {
    for (double& v : q) v *= s;
    return *this;
  }
  friend State operator+(State a, const State& b) { return a += b; }
  friend State operator-(State a, const State& b) { return a -= b; }
  friend State operator*(double s, State a) { return a *= s; }
  friend State operator*(State a, double s) { return a *= s; }
  friend bool operator==(const State&, const State&) = default;
};

struct Primitive {
  double rho = 1.0;
  double u = 0.0;
  double v = 0.0;
  double p = 1.0;
};

inline State to_conservative(const Primitive& w) {
  return {w.rho, w.rho * w.u, w.rho * w.v,
          w.p / (kGamma - 1.0) + 0.5 * w.rho * (w.u * w.u + w.v * w.v)};
}

inline double pressure(const State& s) {
  return (kGamma - 1.0) *
         (s.energy() - 0.5 * (s.mx() * s.mx() + s.my() * s.my()) / s.rho());
}

inline Primitive to_primitive(const State& s) {
  return {s.rho(), s.mx() / s.rho(), s.my() / s.rho(), pressure(s)};
}

inline bool is_admissible(const State& s) {
  return std::isfinite(s.rho()) && s.rho() > kAdmissibilityFloor &&
         std::isfinite(s.energy()) && pressure(s) > kAdmissibilityFloor;
}

inline void require_admissible(const State& s, const char* where) {
  if (!is_admissible(s)) {
    throw AdmissibilityError(std::string(where) + ": inadmissible state (rho=" +
                             std::to_string(s.rho()) +
                             ", p=" + std::to_string(pressure(s)) + ")");
  }
}

inline double sound_speed(const Primitive& w) {
  return std::sqrt(kGamma * w.p / w.rho);
}

/// Physical flux tensor split into x and y components.
struct FluxPair {
  Vec4 f{};
  Vec4 g{};
};

inline FluxPair physical_flux_unchecked(const State& s) {
  const Primitive w = to_primitive(s);
  const double hp = s.energy() + w.p;
  return {{s.mx(), s.mx() * w.u + w.p, s.mx() * w.v, hp * w.u},
          {s.my(), s.my() * w.u, s.my() * w.v + w.p, hp * w.v}};
}

inline FluxPair physical_flux(const State& s) {
  require_admissible(s, "physical_flux");
  return physical_flux_unchecked(s);
}

/// n . F(U)
inline Vec4 normal_flux(const State& s, double nx, double ny) {
  const FluxPair fg = physical_flux_unchecked(s);
  Vec4 out;
  for (int k = 0; k < 4; ++k) out[k] = nx * fg.f[k] + ny * fg.g[k];
  return out;
}

/// Mathematical entropy eta = -rho s / (gamma - 1) and its flux q = eta u.
struct EntropyPair {
  double eta;
  double qx;
  double qy;
};

inline double specific_entropy(const Primitive& w) {
  return std::log(w.p) - kGamma * std::log(w.rho);
}

inline EntropyPair entropy_pair(const State& s) {
  require_admissible(s, "entropy_pair");
  const Primitive w = to_primitive(s);
  const double eta = -w.rho * specific_entropy(w) / (kGamma - 1.0);
  return {eta, eta * w.u, eta * w.v};
}

/// V = d eta / dU.
struct EntropyVars {
  Vec4 v{};
};

inline EntropyVars entropy_variables_unchecked(const State& s) {
  const Primitive w = to_primitive(s);
  const double sent = specific_entropy(w);
  const double rho_p = w.rho / w.p;
  return {{(kGamma - sent) / (kGamma - 1.0) -
               0.5 * rho_p * (w.u * w.u + w.v * w.v),
           rho_p * w.u, rho_p * w.v, -rho_p}};
}

inline EntropyVars entropy_variables(const State& s) {
  require_admissible(s, "entropy_variables");
  return entropy_variables_unchecked(s);
}

/// Inverse of entropy_variables on the admissible set (requires v4 < 0).
inline State state_from_entropy_variables(const EntropyVars& ev) {
  const auto& v = ev.v;
  if (!(v[3] < 0.0)) {
    throw AdmissibilityError("state_from_entropy_variables: v4 must be negative");
  }
  const double rho_p = -v[3];
  const double u = v[1] / rho_p;
  const double vel = v[2] / rho_p;
  const double sent =
      kGamma - (kGamma - 1.0) * (v[0] + 0.5 * rho_p * (u * u + vel * vel));
  // p rho^-gamma = e^s with p = rho / rho_p.
  const double rho = std::pow(std::exp(sent) * rho_p, 1.0 / (1.0 - kGamma));
  return to_conservative({rho, u, vel, rho / rho_p});
}

/// Potential phi = U.V - eta and potential fluxes psi = rho u.
struct EntropyPotentials {
  double phi;
  double psi_f;
  double psi_g;
};

inline EntropyPotentials entropy_potentials(const State& s) {
  const EntropyVars ev = entropy_variables(s);
  const double eta = entropy_pair(s).eta;
  double uv = 0.0;
  for (int k = 0; k < 4; ++k) uv += s[k] * ev.v[k];
  return {uv - eta, s.mx(), s.my()};
}

namespace detail {

/// Logarithmic mean given precomputed logarithms.
inline double log_mean(double a, double b, double log_a, double log_b) {
  // zeta = max/min keeps the branch choice symmetric in (a, b).
  const double zeta = a > b ? a / b : b / a;
  const double d = zeta - 1.0;
  if (d * d < 1e-4) {
    const double u = (a - b) / (a + b);
    const double u2 = u * u;
    return 0.5 * (a + b) / (1.0 + u2 * (1.0 / 3.0 + u2 * (0.2 + u2 / 7.0)));
  }
  return (a - b) / (log_a - log_b);
}

}  // namespace detail

/// (a - b) / (log a - log b), series branch near a == b.
inline double log_mean(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw AdmissibilityError("log_mean: arguments must be positive");
  }
  return detail::log_mean(a, b, std::log(a), std::log(b));
}

/// Per-node quantities reused by every two-point flux evaluation.
struct EcNode {
  double rho;
  double u;
  double v;
  double beta;
  double log_rho;
  double log_beta;
  double kinetic2;  // u^2 + v^2

  static EcNode from(const State& s) {
    const Primitive w = to_primitive(s);
    const double beta = 0.5 * w.rho / w.p;
    return {w.rho, w.u, w.v, beta, std::log(w.rho), std::log(beta),
            w.u * w.u + w.v * w.v};
  }
};

/// Chandrashekar's kinetic-energy-preserving entropy-conservative flux.
inline FluxPair ec_flux(const EcNode& l, const EcNode& r) {
  const double rho_log = detail::log_mean(l.rho, r.rho, l.log_rho, r.log_rho);
  const double beta_log =
      detail::log_mean(l.beta, r.beta, l.log_beta, r.log_beta);
  const double u_avg = 0.5 * (l.u + r.u);
  const double v_avg = 0.5 * (l.v + r.v);
  const double p_hat = 0.5 * (l.rho + r.rho) / (l.beta + r.beta);
  const double vel2 = u_avg * u_avg + v_avg * v_avg;
  const double h_hat = 1.0 / (2.0 * beta_log * (kGamma - 1.0)) -
                       0.25 * (l.kinetic2 + r.kinetic2) + p_hat / rho_log +
                       vel2;
  const double mass_x = rho_log * u_avg;
  const double mass_y = rho_log * v_avg;
  return {{mass_x, mass_x * u_avg + p_hat, mass_x * v_avg, mass_x * h_hat},
          {mass_y, mass_y * u_avg, mass_y * v_avg + p_hat, mass_y * h_hat}};
}

inline FluxPair ec_flux(const State& left, const State& right) {
  require_admissible(left, "ec_flux");
  require_admissible(right, "ec_flux");
  return ec_flux(EcNode::from(left), EcNode::from(right));
}

/// EC flux contracted with a (not necessarily unit) direction.
inline Vec4 ec_normal_flux(const State& left, const State& right, double nx,
                           double ny) {
  const FluxPair fg = ec_flux(left, right);
  Vec4 out;
  for (int k = 0; k < 4; ++k) out[k] = nx * fg.f[k] + ny * fg.g[k];
  return out;
}

/// Local Lax-Friedrichs flux in the unit direction (nx, ny), pointing from
/// left to right.
inline Vec4 llf_flux(const State& left, const State& right, double nx,
                     double ny) {
  require_admissible(left, "llf_flux");
  require_admissible(right, "llf_flux");
  const Primitive wl = to_primitive(left);
  const Primitive wr = to_primitive(right);
  const double alpha =
      std::max(std::abs(wl.u * nx + wl.v * ny) + sound_speed(wl),
               std::abs(wr.u * nx + wr.v * ny) + sound_speed(wr));
  const Vec4 fl = normal_flux(left, nx, ny);
  const Vec4 fr = normal_flux(right, nx, ny);
  Vec4 out;
  for (int k = 0; k < 4; ++k) {
    out[k] = 0.5 * (fl[k] + fr[k]) - 0.5 * alpha * (right[k] - left[k]);
  }
  return out;
}

}  // namespace esdg
