#pragma once

#include <array>
#include <span>

namespace fsi::femcore {

/// Point of a triangle rule on the reference triangle (0,0),(1,0),(0,1);
/// weights are fractions of the element area and sum to one.
struct QuadPoint {
  double xi;
  double eta;
  double weight;
};

/// Symmetric 7-point rule, exact for polynomials of degree 5.
std::span<const QuadPoint> triangle_rule();

/// P2 shape functions in the local order v0, v1, v2, m12, m20, m01
/// (vertices, then edge midpoints opposite to vertex 0, 1, 2).
std::array<double, 6> p2_values(double xi, double eta);
/// Reference gradients d/dxi, d/deta of the P2 shape functions.
std::array<std::array<double, 2>, 6> p2_gradients(double xi, double eta);

}  // namespace fsi::femcore
