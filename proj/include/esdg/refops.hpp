#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "esdg/error.hpp"

namespace esdg {

inline constexpr int kMinDegree = 1;
inline constexpr int kMaxDegree = 16;

/// Legendre polynomial P_n(x) and its derivative via the three-term recurrence.
struct LegendreValue {
  double p;
  double dp;
};

inline LegendreValue legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p_prev = 1.0;
  double p = x;
  double dp_prev = 0.0;
  double dp = 1.0;
  for (int k = 2; k <= n; ++k) {
    const double p_next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
    const double dp_next = dp_prev + (2.0 * k - 1.0) * p;
    p_prev = p;
    p = p_next;
    dp_prev = dp;
    dp = dp_next;
  }
  return {p, dp};
}

struct NodesWeights {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Legendre-Gauss-Lobatto nodes (roots of (1-x^2) P_N'(x)) and weights.
///
/// Newton iteration from Chebyshev-Gauss-Lobatto guesses; the update
/// x <- x - (x P_N - P_{N-1}) / ((N+1) P_N) is Newton on (1-x^2) P_N'.
inline NodesWeights lgl_nodes_weights(int degree) {
  if (degree < kMinDegree || degree > kMaxDegree) {
    throw ConfigError("LGL degree must lie in [" + std::to_string(kMinDegree) +
                      ", " + std::to_string(kMaxDegree) + "], got " +
                      std::to_string(degree));
  }
  const int n = degree;
  const double pi = std::acos(-1.0);
  NodesWeights out;
  out.nodes.resize(n + 1);
  out.weights.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    double x = -std::cos(pi * i / n);
    if (i != 0 && i != n) {
      for (int it = 0; it < 100; ++it) {
        const double pn = legendre(n, x).p;
        const double pn1 = legendre(n - 1, x).p;
        const double step = (x * pn - pn1) / ((n + 1) * pn);
        x -= step;
        if (std::abs(step) < 1e-15) break;
      }
    }
    out.nodes[i] = x;
  }
  // Exact endpoints and mirror symmetry.
  out.nodes[0] = -1.0;
  out.nodes[n] = 1.0;
  for (int i = 0; i <= n / 2; ++i) {
    const double s = 0.5 * (out.nodes[n - i] - out.nodes[i]);
    out.nodes[i] = -s;
    out.nodes[n - i] = s;
  }
  if (n % 2 == 0) out.nodes[n / 2] = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double pn = legendre(n, out.nodes[i]).p;
    out.weights[i] = 2.0 / (n * (n + 1.0) * pn * pn);
  }
  return out;
}

/// Barycentric weights of the Lagrange basis on `nodes`.
inline std::vector<double> barycentric_weights(const std::vector<double>& nodes) {
  const std::size_t m = nodes.size();
  std::vector<double> lambda(m, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      const double diff = nodes[j] - nodes[k];
      if (diff == 0.0) {
        throw GeometryError("duplicate interpolation node at index " +
                            std::to_string(j));
      }
      lambda[j] /= diff;
    }
  }
  return lambda;
}

/// D(i, j) = phi_j'(x_i). Diagonal from the negative row sum, so D * 1 = 0
/// holds to round-off.
inline Eigen::MatrixXd differentiation_matrix(const std::vector<double>& nodes) {
  const int m = static_cast<int>(nodes.size());
  const std::vector<double> lambda = barycentric_weights(nodes);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    double row = 0.0;
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      d(i, j) = (lambda[j] / lambda[i]) / (nodes[i] - nodes[j]);
      row += d(i, j);
    }
    d(i, i) = -row;
  }
  return d;
}

/// phi_j(x) by the product formula.
inline double lagrange_eval(const std::vector<double>& nodes, int j, double x) {
  double value = 1.0;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    if (i == j) continue;
    value *= (x - nodes[i]) / (nodes[j] - nodes[i]);
  }
  return value;
}

/// Read-only reference-element operators for one polynomial degree.
struct ReferenceOperators {
  int degree = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  Eigen::MatrixXd diff_matrix;

  explicit ReferenceOperators(int n) : degree(n) {
    auto nw = lgl_nodes_weights(n);
    nodes = std::move(nw.nodes);
    weights = std::move(nw.weights);
    diff_matrix = differentiation_matrix(nodes);
  }

  int size() const { return degree + 1; }
  int volume_size() const { return (degree + 1) * (degree + 1); }
  double d(int i, int j) const { return diff_matrix(i, j); }
};

/// Shared per-degree operators, built once.
inline std::shared_ptr<const ReferenceOperators> reference_operators(int degree) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const ReferenceOperators>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  auto ops = std::make_shared<const ReferenceOperators>(degree);
  cache.emplace(degree, ops);
  return ops;
}

}  // namespace esdg
