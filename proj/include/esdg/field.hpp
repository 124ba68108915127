#pragma once

#include <functional>
#include <span>
#include <vector>

#include "esdg/mesh.hpp"
#include "esdg/physics.hpp"

namespace esdg {

/// Nodal states of one element, xi index fastest.
using ElementSolution = std::span<const State>;
using MutableElementSolution = std::span<State>;

/// DG solution over the whole mesh, stored element-contiguously.
struct FieldState {
  int nodes_per_element = 0;
  std::vector<State> nodal;
  double t = 0.0;

  FieldState() = default;
  FieldState(int num_elements, int degree)
      : nodes_per_element((degree + 1) * (degree + 1)),
        nodal(static_cast<std::size_t>(num_elements) * nodes_per_element) {}

  int num_elements() const {
    return nodes_per_element == 0 ? 0 : static_cast<int>(nodal.size()) / nodes_per_element;
  }
  ElementSolution element(int e) const {
    return {nodal.data() + static_cast<std::size_t>(e) * nodes_per_element,
            static_cast<std::size_t>(nodes_per_element)};
  }
  MutableElementSolution element(int e) {
    return {nodal.data() + static_cast<std::size_t>(e) * nodes_per_element,
            static_cast<std::size_t>(nodes_per_element)};
  }
  const State& at(int e, int node) const {
    return nodal[static_cast<std::size_t>(e) * nodes_per_element + node];
  }
  State& at(int e, int node) {
    return nodal[static_cast<std::size_t>(e) * nodes_per_element + node];
  }
};

/// Nodal interpolation of a pointwise function onto the mesh.
inline FieldState sample_field(const Mesh& mesh,
                               const std::function<State(double, double)>& fn,
                               double t = 0.0) {
  FieldState field(mesh.num_elements(), mesh.degree);
  field.t = t;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& g = mesh.elements[e];
    for (int k = 0; k < field.nodes_per_element; ++k) {
      field.at(e, k) = fn(g.x[k], g.y[k]);
    }
  }
  return field;
}

/// J-weighted cell average of the nodal states of one element.
inline State cell_average(ElementSolution u, const ElementGeometry& g,
                          const ReferenceOperators& ref) {
  const int np = ref.size();
  State sum{};
  double area = 0.0;
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) {
      const int idx = node_index(i, j, ref.degree);
      const double w = ref.weights[i] * ref.weights[j] * g.jac[idx];
      area += w;
      for (int k = 0; k < 4; ++k) sum[k] += w * u[idx][k];
    }
  }
  return (1.0 / area) * sum;
}

}  // namespace esdg
