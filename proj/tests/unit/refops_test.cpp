#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "esdg/refops.hpp"

namespace esdg {
namespace {

// Independent Legendre evaluation by the explicit sum formula.
double legendre_sum(int n, double x) {
  double s = 0.0;
  for (int k = 0; k <= n / 2; ++k) {
    const double c = std::tgamma(2.0 * n - 2.0 * k + 1) /
                     (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0) *
                      std::tgamma(n - 2.0 * k + 1.0));
    s += (k % 2 ? -1.0 : 1.0) * c * std::pow(x, n - 2 * k);
  }
  return s / std::pow(2.0, n);
}

TEST(LglNodes, DegreeOneIsEndpoints) {
  const auto nw = lgl_nodes_weights(1);
  ASSERT_EQ(nw.nodes.size(), 2u);
  EXPECT_DOUBLE_EQ(nw.nodes[0], -1.0);
  EXPECT_DOUBLE_EQ(nw.nodes[1], 1.0);
  EXPECT_DOUBLE_EQ(nw.weights[0], 1.0);
  EXPECT_DOUBLE_EQ(nw.weights[1], 1.0);
}

TEST(LglNodes, DegreeTwoWeightsSolveExactnessConditions) {
  // Weights on (-1, 0, 1) from the moment equations for 1, x, x^2.
  Eigen::Matrix3d a;
  a << 1, 1, 1, -1, 0, 1, 1, 0, 1;
  const Eigen::Vector3d w = a.colPivHouseholderQr().solve(Eigen::Vector3d(2.0, 0.0, 2.0 / 3.0));
  const auto nw = lgl_nodes_weights(2);
  EXPECT_NEAR(nw.nodes[1], 0.0, 1e-15);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(nw.weights[i], w(i), 1e-14);
  EXPECT_NEAR(nw.weights[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(nw.weights[1], 4.0 / 3.0, 1e-15);
}

TEST(LglNodes, InteriorNodesAreRootsOfLegendreDerivative) {
  for (int n = 2; n <= 12; ++n) {
    const auto nw = lgl_nodes_weights(n);
    for (int i = 1; i < n; ++i) {
      const double x = nw.nodes[i], h = 1e-6;
      const double dp = (legendre_sum(n, x + h) - legendre_sum(n, x - h)) / (2 * h);
      EXPECT_NEAR(dp, 0.0, 1e-6 * n * n) << "N=" << n << " i=" << i;
    }
  }
}

TEST(LglNodes, SortedSymmetricAndWeightsSumToTwo) {
  for (int n = kMinDegree; n <= kMaxDegree; ++n) {
    const auto nw = lgl_nodes_weights(n);
    EXPECT_EQ(nw.nodes.front(), -1.0);
    EXPECT_EQ(nw.nodes.back(), 1.0);
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      if (i > 0) EXPECT_LT(nw.nodes[i - 1], nw.nodes[i]);
      EXPECT_GT(nw.weights[i], 0.0);
      sum += nw.weights[i];
    }
    EXPECT_NEAR(sum, 2.0, 1e-14) << "N=" << n;
  }
}

TEST(LglNodes, QuadratureExactToDegreeTwoNMinusOne) {
  for (int n = 1; n <= 8; ++n) {
    const auto nw = lgl_nodes_weights(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double q = 0.0;
      for (int i = 0; i <= n; ++i) q += nw.weights[i] * std::pow(nw.nodes[i], k);
      const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
      EXPECT_NEAR(q, exact, 1e-12) << "N=" << n << " k=" << k;
    }
  }
}

TEST(LglNodes, DegreeOutOfRangeIsConfigError) {
  EXPECT_THROW(lgl_nodes_weights(0), ConfigError);
  EXPECT_THROW(lgl_nodes_weights(17), ConfigError);
}

TEST(DifferentiationMatrix, DegreeOneByHand) {
  const auto d = differentiation_matrix({-1.0, 1.0});
  EXPECT_DOUBLE_EQ(d(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(d(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(d(1, 0), -0.5);
  EXPECT_DOUBLE_EQ(d(1, 1), 0.5);
}

TEST(DifferentiationMatrix, RowSumsZeroAndSbp) {
  for (int n = 1; n <= 8; ++n) {
    const auto ref = reference_operators(n);
    for (int i = 0; i <= n; ++i) {
      double row = 0.0;
      for (int j = 0; j <= n; ++j) {
        row += ref->d(i, j);
        const double b = (i == n && j == n ? 1.0 : 0.0) - (i == 0 && j == 0 ? 1.0 : 0.0);
        EXPECT_NEAR(ref->weights[i] * ref->d(i, j) + ref->weights[j] * ref->d(j, i), b, 1e-13)
            << "N=" << n << " (" << i << "," << j << ")";
      }
      EXPECT_NEAR(row, 0.0, 1e-13);
    }
  }
}

TEST(DifferentiationMatrix, SquareMapsToTwiceNode) {
  for (int n = 2; n <= 8; ++n) {
    const auto ref = reference_operators(n);
    for (int i = 0; i <= n; ++i) {
      double d = 0.0;
      for (int j = 0; j <= n; ++j) d += ref->d(i, j) * ref->nodes[j] * ref->nodes[j];
      EXPECT_NEAR(d, 2.0 * ref->nodes[i], 1e-12);
    }
  }
}

TEST(DifferentiationMatrix, ExactOnRandomPolynomials) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int n = 1; n <= 8; ++n) {
    const auto ref = reference_operators(n);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> c(n + 1);
      for (double& v : c) v = coef(rng);
      auto p = [&](double x) {
        double s = 0.0;
        for (int k = n; k >= 0; --k) s = s * x + c[k];
        return s;
      };
      auto dp = [&](double x) {
        double s = 0.0;
        for (int k = n; k >= 1; --k) s = s * x + k * c[k];
        return s;
      };
      double worst = 0.0, scale = 0.0;
      for (int i = 0; i <= n; ++i) {
        double d = 0.0;
        for (int j = 0; j <= n; ++j) d += ref->d(i, j) * p(ref->nodes[j]);
        worst = std::max(worst, std::abs(d - dp(ref->nodes[i])));
        scale = std::max(scale, std::abs(dp(ref->nodes[i])));
      }
      EXPECT_LE(worst, 1e-11 * std::max(scale, 1.0)) << "N=" << n;
    }
  }
}

TEST(DifferentiationMatrix, MatchesFiniteDifferencesOfLagrangeBasis) {
  const auto ref = reference_operators(5);
  const double h = 1e-6;
  for (int i = 0; i <= 5; ++i) {
    for (int j = 0; j <= 5; ++j) {
      const double x = ref->nodes[i];
      const double fd = (lagrange_eval(ref->nodes, j, x + h) - lagrange_eval(ref->nodes, j, x - h)) /
                        (2 * h);
      EXPECT_NEAR(ref->d(i, j), fd, 1e-6);
    }
  }
}

TEST(DifferentiationMatrix, DuplicateNodesAreGeometryError) {
  EXPECT_THROW(differentiation_matrix({-1.0, 0.0, 0.0, 1.0}), GeometryError);
}

TEST(Lagrange, NodalPropertyAndPartitionOfUnity) {
  const auto ref = reference_operators(6);
  for (int j = 0; j <= 6; ++j) {
    for (int i = 0; i <= 6; ++i) {
      EXPECT_NEAR(lagrange_eval(ref->nodes, j, ref->nodes[i]), i == j ? 1.0 : 0.0, 1e-14);
    }
  }
  for (double x : {-0.93, -0.31, 0.0, 0.27, 0.81}) {
    double s = 0.0;
    for (int j = 0; j <= 6; ++j) s += lagrange_eval(ref->nodes, j, x);
    EXPECT_NEAR(s, 1.0, 1e-13);
  }
}

TEST(Lagrange, LinearBasisAtMidpoint) {
  EXPECT_DOUBLE_EQ(lagrange_eval({-1.0, 1.0}, 1, 0.0), 0.5);
}

TEST(ReferenceOperators, SharedPerDegree) {
  EXPECT_EQ(reference_operators(4).get(), reference_operators(4).get());
  EXPECT_EQ(reference_operators(4)->size(), 5);
}

}  // namespace
}  // namespace esdg
