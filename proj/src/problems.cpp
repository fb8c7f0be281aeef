#include "afem/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "afem/error.hpp"

namespace afem {

namespace {

double ipow(double u, int m) {
  double r = 1.0;
  for (int i = 0; i < m; ++i) r *= u;
  return r;
}

void check_diffusion(const Diffusion& d) {
  // 10^4 samples over [-10, 10]
  constexpr int kSamples = 10000;
  for (int i = 0; i < kSamples; ++i) {
    const double s = -10.0 + 20.0 * i / (kSamples - 1);
    const double k = d.kappa(s);
    if (!(k > 0.0)) {
      throw Error(ErrorCode::kNonellipticDiffusion,
                  "kappa(" + std::to_string(s) + ") = " + std::to_string(k));
    }
  }
}

}  // namespace

const char* to_string(ProblemKind kind) noexcept {
  switch (kind) {
    case ProblemKind::kSemilinearPower: return "semilinear_power";
    case ProblemKind::kCubicMms: return "cubic_mms";
    case ProblemKind::kQuasilinearHeat: return "quasilinear_heat";
  }
  return "unknown";
}

double ProblemSpec::reaction(double u) const {
  return has_reaction() ? ipow(u, m) : 0.0;
}

double ProblemSpec::reaction_derivative(double u) const {
  return has_reaction() ? m * ipow(u, m - 1) : 0.0;
}

ProblemSpec make_semilinear_power(int m, ScalarField f, double p) {
  if (m < 2) {
    throw Error(ErrorCode::kInvalidExponent,
                "power nonlinearity needs m >= 2, got " + std::to_string(m));
  }
  if (!(p > 1.0)) throw Error(ErrorCode::kInvalidArgument, "p must exceed 1");
  ProblemSpec s;
  s.kind = ProblemKind::kSemilinearPower;
  s.m = m;
  s.p = p;
  s.f = f ? std::move(f) : ScalarField([](Point) { return 0.0; });
  return s;
}

ProblemSpec make_cubic_mms(const ExactSolution& exact) {
  ProblemSpec s;
  s.kind = ProblemKind::kCubicMms;
  s.m = 3;
  s.p = 2.0;
  s.f = [exact](Point x) {
    const double u = exact.value(x);
    return -exact.laplacian(x) + u * u * u;
  };
  s.exact = exact;
  return s;
}

ProblemSpec make_quasilinear_heat(Diffusion diffusion, VectorField b,
                                  ScalarField f, double p) {
  if (!(p > 1.0)) throw Error(ErrorCode::kInvalidArgument, "p must exceed 1");
  check_diffusion(diffusion);
  ProblemSpec s;
  s.kind = ProblemKind::kQuasilinearHeat;
  s.m = 0;
  s.p = p;
  s.diffusion = std::move(diffusion);
  s.b = std::move(b);
  s.f = f ? std::move(f) : ScalarField([](Point) { return 0.0; });
  if (p < 4.0) {
    s.warnings.push_back("p < 2d: estimator convergence for the heat problem "
                         "is only guaranteed for p >= 4 in 2D");
  }
  return s;
}

ProblemSpec make_heat_mms(Diffusion diffusion, VectorField b,
                          const ExactSolution& exact, double p) {
  const Diffusion d = diffusion;
  const VectorField vel = b;
  ScalarField f = [d, vel, exact](Point x) {
    const double u = exact.value(x);
    const Point g = exact.gradient(x);
    const Point w = vel ? vel(x) : Point{0.0, 0.0};
    return -d.kappa(u) * exact.laplacian(x) -
           d.dkappa(u) * (g.x * g.x + g.y * g.y) + w.x * g.x + w.y * g.y;
  };
  ProblemSpec s = make_quasilinear_heat(std::move(diffusion), std::move(b),
                                        std::move(f), p);
  s.exact = exact;
  return s;
}

namespace exact_solutions {

ExactSolution zero() {
  return {"zero", [](Point) { return 0.0; }, [](Point) { return Point{0.0, 0.0}; },
          [](Point) { return 0.0; }};
}

ExactSolution sin_sin() {
  constexpr double pi = std::numbers::pi;
  return {"sinsin",
          [](Point x) { return std::sin(pi * x.x) * std::sin(pi * x.y); },
          [](Point x) {
            return Point{pi * std::cos(pi * x.x) * std::sin(pi * x.y),
                         pi * std::sin(pi * x.x) * std::cos(pi * x.y)};
          },
          [](Point x) {
            return -2.0 * pi * pi * std::sin(pi * x.x) * std::sin(pi * x.y);
          }};
}

ExactSolution bubble() {
  return {"bubble",
          [](Point x) { return x.x * (1.0 - x.x) * x.y * (1.0 - x.y); },
          [](Point x) {
            return Point{(1.0 - 2.0 * x.x) * x.y * (1.0 - x.y),
                         x.x * (1.0 - x.x) * (1.0 - 2.0 * x.y)};
          },
          [](Point x) {
            return -2.0 * (x.y * (1.0 - x.y) + x.x * (1.0 - x.x));
          }};
}

}  // namespace exact_solutions

namespace diffusions {

Diffusion constant(double value) {
  return {"const", [value](double) { return value; }, [](double) { return 0.0; },
          [](double) { return 0.0; }};
}

Diffusion quadratic() {
  return {"quadratic", [](double s) { return 1.0 + s * s; },
          [](double s) { return 2.0 * s; }, [](double) { return 2.0; }};
}

}  // namespace diffusions

double AprioriBounds::cubic_lipschitz() const {
  const double a = std::max(std::abs(u_minus), std::abs(u_plus));
  return 3.0 * a * a;
}

double AprioriBounds::clamp(double v) const {
  return std::clamp(v, u_minus, u_plus);
}

AprioriBounds apriori_bounds_cubic(LinearPartBounds linear, DataSign sign) {
  if (linear.inf > linear.sup) std::swap(linear.inf, linear.sup);
  switch (sign) {
    case DataSign::kZero:
      return {0.0, 0.0};
    case DataSign::kNonNegative:
      // 0 <= u <= w
      return {0.0, std::max(0.0, linear.sup)};
    case DataSign::kNonPositive:
      return {std::min(0.0, linear.inf), 0.0};
    case DataSign::kIndefinite:
      break;
  }
  // z = u - w lies in [-sup w, -inf w]
  return {linear.inf - linear.sup, linear.sup - linear.inf};
}

}  // namespace afem
