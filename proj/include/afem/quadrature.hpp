#pragma once

#include <array>
#include <vector>

#include "afem/mesh.hpp"

namespace afem {

// Point in barycentric coordinates with a weight normalised so the weights
// of a rule sum to one (multiply by the element area).
struct TriQuadPoint {
  std::array<double, 3> bary;
  double weight;
};

struct LineQuadPoint {
  double s;  // position along [0,1]
  double weight;
};

// Symmetric 6-point rule, exact for polynomials of total degree 4.
const std::vector<TriQuadPoint>& triangle_rule_degree4();

// Conical product (collapsed Gauss-Legendre) rule with n x n points, exact
// for total degree 2n-2.
std::vector<TriQuadPoint> triangle_rule_conical(int n);

// Rule used for error norms against smooth exact solutions (degree 8).
const std::vector<TriQuadPoint>& triangle_rule_error();

// Gauss-Legendre on [0,1], exact for degree 2n-1.
std::vector<LineQuadPoint> gauss_legendre(int n);

inline Point map_point(const std::array<Point, 3>& c,
                       const std::array<double, 3>& b) {
  return {b[0] * c[0].x + b[1] * c[1].x + b[2] * c[2].x,
          b[0] * c[0].y + b[1] * c[1].y + b[2] * c[2].y};
}

}  // namespace afem
