#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "afem/mesh.hpp"

namespace afem {

using ScalarField = std::function<double(Point)>;
using VectorField = std::function<Point(Point)>;
using ScalarFunction = std::function<double(double)>;

enum class ProblemKind { kSemilinearPower, kCubicMms, kQuasilinearHeat };

const char* to_string(ProblemKind kind) noexcept;

struct ExactSolution {
  std::string name;
  ScalarField value;
  VectorField gradient;
  ScalarField laplacian;
};

// Nonlinear diffusion coefficient kappa(s) with its first two derivatives.
struct Diffusion {
  std::string name;
  ScalarFunction kappa;
  ScalarFunction dkappa;
  ScalarFunction d2kappa;
};

/// The discrete operator F: for SemilinearPower/CubicMms
///   F(u) = -Laplace(u) + u^m - f,
/// for QuasilinearHeat
///   F(u) = -div(kappa(u) grad u) + b . grad u - f.
/// Callbacks must be pure; a spec is shared read-only.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::kSemilinearPower;
  int m = 3;
  double p = 2.0;
  ScalarField f;
  std::optional<Diffusion> diffusion;
  VectorField b;
  std::optional<ExactSolution> exact;
  std::vector<std::string> warnings;

  bool has_reaction() const { return kind != ProblemKind::kQuasilinearHeat; }
  double reaction(double u) const;
  double reaction_derivative(double u) const;
  double kappa(double u) const { return diffusion ? diffusion->kappa(u) : 1.0; }
  double dkappa(double u) const { return diffusion ? diffusion->dkappa(u) : 0.0; }
  Point velocity(Point x) const { return b ? b(x) : Point{0.0, 0.0}; }
};

ProblemSpec make_semilinear_power(int m, ScalarField f, double p = 2.0);

// -Laplace(u) + u^3 = f with f manufactured from `exact`.
ProblemSpec make_cubic_mms(const ExactSolution& exact);

ProblemSpec make_quasilinear_heat(Diffusion diffusion, VectorField b,
                                  ScalarField f, double p = 2.0);

// Quasilinear heat problem with f manufactured from `exact`:
//   f = -kappa(u) Laplace(u) - kappa'(u) |grad u|^2 + b . grad u.
ProblemSpec make_heat_mms(Diffusion diffusion, VectorField b,
                          const ExactSolution& exact, double p = 2.0);

namespace exact_solutions {
ExactSolution zero();
// sin(pi x) sin(pi y)
ExactSolution sin_sin();
// x(1-x) y(1-y)
ExactSolution bubble();
}  // namespace exact_solutions

namespace diffusions {
Diffusion constant(double value);
// 1 + s^2
Diffusion quadratic();
}  // namespace diffusions

struct AprioriBounds {
  double u_minus = 0.0;
  double u_plus = 0.0;
  // K = sup over [u_minus, u_plus] of |3 chi^2|
  double cubic_lipschitz() const;
  double clamp(double v) const;
};

// Essential bounds of the solution of the linear part -Laplace(w) = f.
struct LinearPartBounds {
  double inf = 0.0;
  double sup = 0.0;
};

enum class DataSign { kZero, kNonNegative, kNonPositive, kIndefinite };

/// L-infinity window for solutions of -Laplace(u) + u^3 = f. The split
/// u = w + z with -Laplace(w) = f gives -sup w <= z <= -inf w; a signed
/// right-hand side tightens this through the maximum principle.
AprioriBounds apriori_bounds_cubic(LinearPartBounds linear, DataSign sign);

}  // namespace afem
