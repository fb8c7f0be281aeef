#include "afem/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "afem/error.hpp"

namespace afem {

const std::vector<TriQuadPoint>& triangle_rule_degree4() {
  static const std::vector<TriQuadPoint> rule = [] {
    constexpr double a1 = 0.445948490915965, w1 = 0.223381589678011;
    constexpr double a2 = 0.091576213509771, w2 = 0.109951743655322;
    const double b1 = 1.0 - 2.0 * a1, b2 = 1.0 - 2.0 * a2;
    return std::vector<TriQuadPoint>{
        {{a1, a1, b1}, w1}, {{a1, b1, a1}, w1}, {{b1, a1, a1}, w1},
        {{a2, a2, b2}, w2}, {{a2, b2, a2}, w2}, {{b2, a2, a2}, w2}};
  }();
  return rule;
}

std::vector<LineQuadPoint> gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "gauss_legendre: n < 1");
  std::vector<LineQuadPoint> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    out[static_cast<std::size_t>(i)] = {0.5 * (1.0 - x), 0.5 * w};
  }
  return out;
}

std::vector<TriQuadPoint> triangle_rule_conical(int n) {
  const auto g = gauss_legendre(n);
  std::vector<TriQuadPoint> rule;
  rule.reserve(g.size() * g.size());
  // (s,t) in [0,1]^2 -> x = s(1-t), y = t with Jacobian (1-t); the reference
  // triangle has area 1/2, hence the factor 2 in the normalised weight.
  for (const auto& gs : g) {
    for (const auto& gt : g) {
      const double x = gs.s * (1.0 - gt.s), y = gt.s;
      rule.push_back({{1.0 - x - y, x, y}, 2.0 * gs.weight * gt.weight * (1.0 - gt.s)});
    }
  }
  return rule;
}

const std::vector<TriQuadPoint>& triangle_rule_error() {
  static const std::vector<TriQuadPoint> rule = triangle_rule_conical(5);
  return rule;
}

}  // namespace afem
