#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "esdg/dgsem.hpp"
#include "esdg/diag.hpp"
#include "test_util.hpp"

namespace esdg {
namespace {

using testing::max_abs_diff;
using testing::random_state;

const double kPi = std::acos(-1.0);

/// Smooth state, periodic on [-10, 10]^2.
State periodic_state(double x, double y, double phase = 0.0) {
  const double k = kPi / 10.0;
  return to_conservative({1.0 + 0.3 * std::sin(k * x + phase) * std::cos(k * y),
                          0.4 + 0.2 * std::cos(k * y - phase),
                          -0.3 + 0.2 * std::sin(2 * k * x),
                          1.0 + 0.2 * std::cos(k * (x + y) + phase)});
}

FieldState random_field(const Mesh& mesh, std::mt19937& rng) {
  FieldState f(mesh.num_elements(), mesh.degree);
  for (auto& s : f.nodal) s = random_state(rng);
  return f;
}

double max_abs(const FieldState& f) {
  double m = 0.0;
  for (const auto& s : f.nodal) {
    for (int k = 0; k < 4; ++k) m = std::max(m, std::abs(s[k]));
  }
  return m;
}

TEST(Contravariant, ScaledIdentity) {
  const Mesh m = build_cartesian(1, 1, {0, 0.5, 0, 0.5}, 2);
  const FluxPair fp = physical_flux(to_conservative({1.2, 0.3, -0.4, 2.0}));
  const auto [ft, gt] = contravariant_flux(m.elements[0], 0, fp);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(ft[k], 0.25 * fp.f[k], 1e-15);
    EXPECT_NEAR(gt[k], 0.25 * fp.g[k], 1e-15);
  }
}

TEST(Contravariant, RotatedElement) {
  ElementGeometry g;
  g.x_xi = {0.0};
  g.x_eta = {-0.5};
  g.y_xi = {0.5};
  g.y_eta = {0.0};
  const FluxPair fp = physical_flux(to_conservative({0.9, -0.3, 0.8, 1.5}));
  const auto [ft, gt] = contravariant_flux(g, 0, fp);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(ft[k], 0.5 * fp.g[k], 1e-15);
    EXPECT_NEAR(gt[k], -0.5 * fp.f[k], 1e-15);
  }
}

TEST(Volume, ConstantStateOnCurvedElementsVanishes) {
  const Mesh mesh = build_sinusoidal(10, -10, 10, 3);
  const auto ref = reference_operators(3);
  const State c = to_conservative({1.3, 0.7, -0.4, 2.1});
  std::vector<State> u(16, c), es(16), st(16);
  for (const auto& g : mesh.elements) {
    std::fill(es.begin(), es.end(), State{});
    std::fill(st.begin(), st.end(), State{});
    volume_residual_es(u, g, *ref, es);
    volume_residual_standard(u, g, *ref, st);
    for (int k = 0; k < 16; ++k) {
      EXPECT_LE(max_abs_diff(es[k], {}), 1e-12);
      EXPECT_LE(max_abs_diff(st[k], {}), 1e-12);
    }
  }
}

TEST(Volume, HandStencilDegreeOne) {
  std::mt19937 rng(7);
  const Mesh mesh = build_cartesian(1, 1, {-1, 1, -1, 1}, 1);
  const auto ref = reference_operators(1);
  std::vector<State> u(4), out(4);
  for (auto& s : u) s = random_state(rng);
  volume_residual_es(u, mesh.elements[0], *ref, out);
  // D = [[-1/2, 1/2], [-1/2, 1/2]]; the diagonal terms reduce to the
  // physical flux by consistency.
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const int k = i + 2 * j;
      const int kx = (1 - i) + 2 * j;
      const int ky = i + 2 * (1 - j);
      const double sx = i == 0 ? 1.0 : -1.0;
      const double sy = j == 0 ? 1.0 : -1.0;
      const FluxPair own = physical_flux(u[k]);
      const FluxPair ex = ec_flux(u[kx], u[k]);
      const FluxPair ey = ec_flux(u[ky], u[k]);
      for (int c = 0; c < 4; ++c) {
        const double hand = sx * (ex.f[c] - own.f[c]) + sy * (ey.g[c] - own.g[c]);
        EXPECT_NEAR(out[k][c], hand, 1e-12 * (1 + std::abs(hand)));
      }
    }
  }
}

TEST(Volume, WeightedSumTelescopesToBoundary) {
  std::mt19937 rng(11);
  const Mesh mesh = build_sinusoidal(20, -10, 10, 4);
  const auto ref = reference_operators(4);
  const int np = 5;
  std::vector<State> u(np * np), es(np * np), st(np * np);
  for (int e : {0, 17, 42}) {
    const auto& g = mesh.elements[e];
    for (auto& s : u) s = random_state(rng);
    std::fill(es.begin(), es.end(), State{});
    std::fill(st.begin(), st.end(), State{});
    volume_residual_es(u, g, *ref, es);
    volume_residual_standard(u, g, *ref, st);
    Vec4 lhs_es{}, lhs_st{}, rhs{};
    for (int j = 0; j < np; ++j) {
      for (int i = 0; i < np; ++i) {
        const int k = node_index(i, j, 4);
        const double w = ref->weights[i] * ref->weights[j];
        for (int c = 0; c < 4; ++c) {
          lhs_es[c] += w * es[k][c];
          lhs_st[c] += w * st[k][c];
        }
      }
    }
    for (int side = 0; side < 4; ++side) {
      for (int q = 0; q < np; ++q) {
        const int k = face_node(side, q, 4);
        const auto n = g.normals[side][q];
        const Vec4 f = normal_flux(u[k], n.nx, n.ny);
        for (int c = 0; c < 4; ++c) rhs[c] += ref->weights[q] * f[c];
      }
    }
    for (int c = 0; c < 4; ++c) {
      EXPECT_NEAR(lhs_es[c], rhs[c], 1e-10 * (1 + std::abs(rhs[c])));
      EXPECT_NEAR(lhs_st[c], rhs[c], 1e-10 * (1 + std::abs(rhs[c])));
    }
  }
}

TEST(Volume, InadmissibleNodeNamed) {
  const Mesh mesh = build_cartesian(1, 1, {0, 1, 0, 1}, 1);
  const auto ref = reference_operators(1);
  std::vector<State> u(4, to_conservative({1, 0, 0, 1})), out(4);
  u[2][0] = -1.0;
  try {
    volume_residual_es(u, mesh.elements[0], *ref, out);
    FAIL();
  } catch (const AdmissibilityError& e) {
    EXPECT_NE(std::string(e.what()).find("node 2"), std::string::npos);
  }
}

TEST(Volume, StandardExactForPolynomialFluxOnAffineElement) {
  // Linear momentum/energy density in x with zero velocity: f = (0, p, 0, 0)
  // with p linear, so d(f~)/dxi is exact.
  const Mesh mesh = build_cartesian(1, 1, {0, 2, 0, 1}, 3);
  const auto ref = reference_operators(3);
  const auto& g = mesh.elements[0];
  std::vector<State> u(16), out(16);
  for (int k = 0; k < 16; ++k) u[k] = to_conservative({1.0, 0.0, 0.0, 1.0 + 0.3 * g.x[k]});
  volume_residual_standard(u, g, *ref, out);
  // (y_eta) * dp/dxi = 0.5 * 0.3 * 1 (x_xi = 1).
  for (int k = 0; k < 16; ++k) {
    EXPECT_NEAR(out[k][1], 0.5 * 0.3, 1e-13);
    EXPECT_NEAR(out[k][0], 0.0, 1e-13);
  }
}

TEST(Residual, FreeStreamOnSinusoidalMesh) {
  const Mesh mesh = build_sinusoidal(10, -10, 10, 3);
  const State c = to_conservative({1.0, 0.3, -0.2, 1.0});
  const FieldState u = sample_field(mesh, [&](double, double) { return c; });
  for (VolumeForm vf : {VolumeForm::kEntropyStable, VolumeForm::kStandard}) {
    for (FluxChoice fc : {FluxChoice::kLlf, FluxChoice::kEc}) {
      const FieldState r = residual(u, mesh, {}, {fc, vf});
      EXPECT_LE(max_abs(r), 1e-12);
    }
  }
}

TEST(Residual, IdenticalTracesGiveNoSurfaceTerm) {
  const Mesh mesh = build_cartesian(2, 2, {-10, 10, -10, 10}, 2, true, true);
  const State c = to_conservative({1.0, 0.3, -0.2, 1.0});
  const FieldState u = sample_field(mesh, [&](double, double) { return c; });
  const auto ref = reference_operators(2);
  const FaceFluxes ff = interface_fluxes(u, mesh, FluxChoice::kLlf, {});
  FieldState out(mesh.num_elements(), 2);
  surface_residual(u, mesh, *ref, ff, out);
  EXPECT_LE(max_abs(out), 1e-15);
}

TEST(Residual, ConservationOnPeriodicMesh) {
  std::mt19937 rng(3);
  const Mesh mesh = build_sinusoidal(10, -10, 10, 3);
  for (FluxChoice fc : {FluxChoice::kLlf, FluxChoice::kEc}) {
    const FieldState u = random_field(mesh, rng);
    const FieldState r = residual(u, mesh, {}, {fc, VolumeForm::kEntropyStable});
    const Vec4 tot = conservation_totals(r, mesh);
    const double scale = max_abs(r) * domain_area(mesh);
    for (double v : tot) EXPECT_LE(std::abs(v), 1e-12 * scale);
  }
}

TEST(Residual, LlfEntropyProductionNonPositive) {
  std::mt19937 rng(5);
  const Mesh mesh = build_sinusoidal(10, -10, 10, 3);
  for (int trial = 0; trial < 3; ++trial) {
    const double phase = std::uniform_real_distribution<double>(0, 6.28)(rng);
    const FieldState u = sample_field(mesh, [&](double x, double y) {
      return periodic_state(x, y, phase);
    });
    const FieldState r = residual(u, mesh, {}, {FluxChoice::kLlf, VolumeForm::kEntropyStable});
    EXPECT_LE(entropy_production(u, r, mesh), 1e-10);
    const FieldState rnd = random_field(mesh, rng);
    const FieldState rr = residual(rnd, mesh, {}, {FluxChoice::kLlf, VolumeForm::kEntropyStable});
    EXPECT_LE(entropy_production(rnd, rr, mesh), 1e-10);
  }
}

TEST(Residual, EcEntropyConservation) {
  std::mt19937 rng(9);
  const Mesh mesh = build_sinusoidal(10, -10, 10, 3);
  const FieldState u = sample_field(mesh, [](double x, double y) { return periodic_state(x, y); });
  const FieldState r = residual(u, mesh, {}, {FluxChoice::kEc, VolumeForm::kEntropyStable});
  EXPECT_LE(std::abs(entropy_production(u, r, mesh)), 1e-10);
  // Also for arbitrary nodal data (no smoothness needed).
  const FieldState rnd = random_field(mesh, rng);
  const FieldState rr = residual(rnd, mesh, {}, {FluxChoice::kEc, VolumeForm::kEntropyStable});
  double scale = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    scale = std::max(scale, std::abs(element_entropy_production(
                                rnd.element(e), rr.element(e), mesh.elements[e],
                                *reference_operators(3))));
  }
  EXPECT_LE(std::abs(entropy_production(rnd, rr, mesh)), 1e-12 * scale * mesh.num_elements());
}

TEST(Residual, EsAndStandardAgreeUnderRefinement) {
  std::vector<double> diff;
  for (int m : {10, 20, 40}) {
    const Mesh mesh = build_cartesian(m, m, {-10, 10, -10, 10}, 3, true, true);
    const FieldState u = sample_field(mesh, [](double x, double y) { return periodic_state(x, y); });
    const FieldState a = residual(u, mesh, {}, {FluxChoice::kLlf, VolumeForm::kEntropyStable});
    const FieldState b = residual(u, mesh, {}, {FluxChoice::kLlf, VolumeForm::kStandard});
    double d = 0.0;
    for (std::size_t k = 0; k < a.nodal.size(); ++k) d = std::max(d, max_abs_diff(a.nodal[k], b.nodal[k]));
    diff.push_back(d);
  }
  EXPECT_LT(diff[1], diff[0] / 4);
  EXPECT_LT(diff[2], diff[1] / 4);
}

TEST(Residual, VortexTimeDerivativeConverges) {
  // Oracle: centered difference of the exact solution in time.
  std::vector<double> err, hs;
  const double eps = 1e-5;
  for (int m : {10, 20, 40, 80}) {
    const Mesh mesh = build_cartesian(m, m, {-10, 10, -10, 10}, 3, true, true);
    const FieldState u = sample_field(mesh, [](double x, double y) { return vortex_exact(x, y, 0); });
    const FieldState r = residual(u, mesh, {}, {});
    FieldState d(mesh.num_elements(), 3);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& g = mesh.elements[e];
      for (int k = 0; k < d.nodes_per_element; ++k) {
        const State dt = (1.0 / (2 * eps)) *
                         (vortex_exact(g.x[k], g.y[k], eps) - vortex_exact(g.x[k], g.y[k], -eps));
        d.at(e, k) = r.at(e, k) - dt;
      }
    }
    const auto zero = [](double, double) { return State{}; };
    err.push_back(l2_error(d, zero, mesh)[0]);
    hs.push_back(20.0 / m);
  }
  const auto orders = observed_orders(err, hs);
  // Pointwise truncation error of the nodal scheme is O(h^N); the solution
  // error converges one order faster.
  EXPECT_GT(orders.back(), 2.5);
}

TEST(Residual, Deterministic) {
  std::mt19937 rng(13);
  const Mesh mesh = build_sinusoidal(10, -10, 10, 3);
  const FieldState u = random_field(mesh, rng);
  const FieldState a = residual(u, mesh, {});
  const FieldState b = residual(u, mesh, {});
  ASSERT_EQ(a.nodal.size(), b.nodal.size());
  EXPECT_EQ(0, std::memcmp(a.nodal.data(), b.nodal.data(), a.nodal.size() * sizeof(State)));
}

TEST(Residual, MissingBoundaryConditionIsConfigError) {
  const Mesh mesh = build_cartesian(2, 2, {0, 1, 0, 1}, 2);
  const FieldState u = sample_field(mesh, [](double, double) { return to_conservative({1, 0, 0, 1}); });
  EXPECT_THROW(residual(u, mesh, {}), ConfigError);
}

TEST(Residual, SlipWallBoxConservesMassAndEnergy) {
  std::mt19937 rng(21);
  const Mesh mesh = build_sinusoidal(4, -10, 10, 3, {1.5, 0.05, 0.1}, false);
  BoundaryConditions bcs;
  for (int tag = 0; tag < 4; ++tag) bcs.set(tag, SlipWall{});
  const FieldState u = sample_field(mesh, [](double x, double y) { return periodic_state(x, y); });
  const FieldState r = residual(u, mesh, bcs);
  const Vec4 tot = conservation_totals(r, mesh);
  // The mirrored ghost has the same density and energy, so neither mass nor
  // energy crosses the wall.
  const double scale = max_abs(r) * domain_area(mesh);
  EXPECT_LE(std::abs(tot[0]), 1e-12 * scale);
  EXPECT_LE(std::abs(tot[3]), 1e-12 * scale);
}

}  // namespace
}  // namespace esdg
