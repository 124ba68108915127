#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "esdg/timeint.hpp"
#include "test_util.hpp"

namespace esdg {
namespace {

TEST(SspRk3, StabilityPolynomial) {
  for (double z : {-0.1, -0.5, -1.3, 0.2, -2.5}) {
    const double lambda = z;  // dt = 1
    const double u1 = ssp_rk3(1.0, 1.0, [&](double u) { return lambda * u; });
    EXPECT_NEAR(u1, 1 + z + z * z / 2 + z * z * z / 6, 1e-14);
  }
}

TEST(SspRk3, ThirdOrderOnNonlinearOde) {
  // u' = -u^2, u(0) = 1 -> u = 1 / (1 + t).
  std::vector<double> err, hs;
  for (int steps : {10, 20, 40, 80}) {
    const double dt = 1.0 / steps;
    double u = 1.0;
    for (int n = 0; n < steps; ++n) u = ssp_rk3(u, dt, [](double v) { return -v * v; });
    err.push_back(std::abs(u - 0.5));
    hs.push_back(dt);
  }
  for (double p : observed_orders(err, hs)) {
    EXPECT_GE(p, 2.9);
    EXPECT_LE(p, 3.1);
  }
}

TEST(SspRk3, StagesAreConvex) {
  EXPECT_EQ(SspRk3Tableau::a[1] + SspRk3Tableau::b[1], 1.0);
  EXPECT_EQ(SspRk3Tableau::a[2] + SspRk3Tableau::b[2], 1.0);
}

TEST(ComputeDt, StagnantGas) {
  const int m = 4, n = 3;
  const Mesh mesh = build_cartesian(m, m, {0, 1, 0, 1}, n);
  const FieldState u = sample_field(mesh, [](double, double) { return to_conservative({1, 0, 0, 1}); });
  const double k = default_cfl(n);
  EXPECT_NEAR(k, 0.5 / 7, 1e-16);
  const double h = mesh.elements[0].h_e;
  EXPECT_NEAR(h, 0.5 / m, 1e-15);
  EXPECT_NEAR(compute_dt(u, mesh, k), k * h / std::sqrt(1.4), 1e-15);
}

TEST(ComputeDt, FasterFlowAndFinerMesh) {
  const Mesh coarse = build_cartesian(4, 4, {0, 1, 0, 1}, 2);
  const Mesh fine = build_cartesian(8, 8, {0, 1, 0, 1}, 2);
  auto state = [](double speed) {
    return [speed](double, double) { return to_conservative({1, speed, 0, 1}); };
  };
  const double slow = compute_dt(sample_field(coarse, state(3.0)), coarse, 0.1);
  const double fast = compute_dt(sample_field(coarse, state(6.0)), coarse, 0.1);
  EXPECT_LT(fast, slow);
  EXPECT_NEAR(compute_dt(sample_field(fine, state(3.0)), fine, 0.1), slow / 2, 1e-15);
}

TEST(ComputeDt, NonFiniteIsAdmissibilityError) {
  const Mesh mesh = build_cartesian(2, 2, {0, 1, 0, 1}, 2);
  FieldState u = sample_field(mesh, [](double, double) { return to_conservative({1, 0, 0, 1}); });
  u.at(1, 3).q[1] = std::nan("");
  EXPECT_THROW(compute_dt(u, mesh, 0.1), AdmissibilityError);
}

TEST(Integrator, ConstantStateUnchangedOnCartesian) {
  // Round-off in the LGL row sums and in the two-point means keeps this from
  // being bitwise.
  const Mesh mesh = build_cartesian(6, 6, {0, 1, 0, 1}, 3, true, true);
  const FieldState before =
      sample_field(mesh, [](double, double) { return to_conservative({1, 0.3, -0.2, 1}); });
  for (OeMode mode : {OeMode::kCartesian, OeMode::kOff}) {
    StepConfig sc;
    sc.oe_mode = mode;
    Integrator integ(mesh, {}, {}, sc);
    FieldState v = before;
    const auto report = integ.step(v, integ.stable_dt(v));
    EXPECT_EQ(report.flagged_fraction, 0.0);
    double diff = 0.0;
    for (std::size_t k = 0; k < v.nodal.size(); ++k) {
      diff = std::max(diff, testing::max_abs_diff(v.nodal[k], before.nodal[k]));
    }
    EXPECT_LE(diff, 1e-14);
  }
}

TEST(Integrator, ConstantStatePreservedOnCurvedMesh) {
  const Mesh mesh = build_sinusoidal(6, -10, 10, 3);
  const FieldState before =
      sample_field(mesh, [](double, double) { return to_conservative({1, 0.3, -0.2, 1}); });
  StepConfig sc;
  sc.oe_mode = OeMode::kCurvilinear;
  Integrator integ(mesh, {}, {}, sc);
  FieldState v = before;
  integ.step(v, integ.stable_dt(v));
  double diff = 0.0;
  for (std::size_t k = 0; k < v.nodal.size(); ++k) {
    diff = std::max(diff, testing::max_abs_diff(v.nodal[k], before.nodal[k]));
  }
  EXPECT_LE(diff, 1e-14);
}

TEST(Integrator, VortexEntropyNonIncreasing) {
  const Mesh mesh = build_sinusoidal(20, -10, 10, 3);
  FieldState u = sample_field(mesh, [](double x, double y) { return vortex_exact(x, y, 0); });
  StepConfig sc;
  sc.oe_mode = OeMode::kOff;
  Integrator integ(mesh, {}, {}, sc);
  double prev = total_entropy(u, mesh);
  for (int n = 0; n < 3; ++n) {
    const StepReport r = integ.step(u, integ.stable_dt(u));
    EXPECT_LE(r.entropy, prev + 1e-8 * std::abs(prev));
    prev = r.entropy;
  }
}

TEST(Integrator, Deterministic) {
  const Mesh mesh = build_cartesian(20, 20, {0, 2, 0, 2}, 3, true, true);
  auto run = [&] {
    FieldState u = sample_field(mesh, [](double x, double y) { return riemann_initial(12, x, y); });
    Integrator integ(mesh, {}, {}, {});
    for (int n = 0; n < 3; ++n) integ.step(u, integ.stable_dt(u));
    return u;
  };
  const FieldState a = run(), b = run();
  EXPECT_EQ(0, std::memcmp(a.nodal.data(), b.nodal.data(), a.nodal.size() * sizeof(State)));
}

TEST(Integrator, ReportFields) {
  const Mesh mesh = build_cartesian(20, 20, {0, 2, 0, 2}, 3, true, true);
  FieldState u = sample_field(mesh, [](double x, double y) { return riemann_initial(12, x, y); });
  Integrator integ(mesh, {}, {}, {});
  const double dt = integ.stable_dt(u);
  StepReport r;
  for (int n = 0; n < 3; ++n) r = integ.step(u, dt);
  EXPECT_NEAR(r.t, 3 * dt, 1e-15);
  EXPECT_EQ(r.dt, dt);
  EXPECT_GE(r.flagged_fraction, 0.0);
  EXPECT_LE(r.flagged_fraction, 1.0);
  EXPECT_GT(r.min_rho, 0.0);
  EXPECT_GT(r.min_p, 0.0);
}

TEST(Integrator, LimiterFailureCarriesStage) {
  const Mesh mesh = build_cartesian(4, 4, {0, 1, 0, 1}, 2, true, true);
  FieldState u = sample_field(mesh, [](double x, double) {
    return to_conservative({x < 0.5 ? 1.0 : 1e-3, 0.0, 0.0, x < 0.5 ? 1000.0 : 1e-3});
  });
  StepConfig sc;
  sc.oe_mode = OeMode::kOff;
  Integrator integ(mesh, {}, {}, sc);
  try {
    integ.step(u, 1.0);  // far beyond the CFL limit
    FAIL();
  } catch (const AdmissibilityError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("stage", 0), 0u) << e.what();
  }
}

}  // namespace
}  // namespace esdg
