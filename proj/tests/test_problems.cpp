#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "afem/error.hpp"
#include "afem/problems.hpp"

using namespace afem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected afem::Error");
  return ErrorCode::kIoError;
}

std::vector<Point> sample_points(int n) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<Point> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) p = {d(rng), d(rng)};
  return pts;
}

}  // namespace

TEST_CASE("semilinear power") {
  CHECK(code_of([] { make_semilinear_power(1, {}); }) == ErrorCode::kInvalidExponent);
  const auto p = make_semilinear_power(2, [](Point) { return 1.0; });
  CHECK(p.reaction(0.0) - p.f({0.3, 0.4}) == -1.0);
  CHECK(p.reaction_derivative(3.0) == 6.0);
  const auto c = make_semilinear_power(3, {});
  CHECK(c.f({0.2, 0.2}) == 0.0);
  CHECK(c.reaction(-2.0) == -8.0);
  CHECK(c.reaction_derivative(-2.0) == 12.0);
  CHECK(std::string(to_string(c.kind)) == "semilinear_power");
}

TEST_CASE("cubic manufactured sources") {
  CHECK(make_cubic_mms(exact_solutions::zero()).f({0.3, 0.7}) == 0.0);
  const auto s = make_cubic_mms(exact_solutions::sin_sin());
  const auto b = make_cubic_mms(exact_solutions::bubble());
  constexpr double pi = std::numbers::pi;
  for (const Point x : sample_points(50)) {
    const double u = std::sin(pi * x.x) * std::sin(pi * x.y);
    CHECK(s.f(x) == doctest::Approx(2 * pi * pi * u + u * u * u).epsilon(1e-13));
    const double ub = x.x * (1 - x.x) * x.y * (1 - x.y);
    CHECK(b.f(x) == doctest::Approx(2 * (x.y * (1 - x.y) + x.x * (1 - x.x)) + ub * ub * ub)
                        .epsilon(1e-13));
  }
  CHECK(s.p == 2.0);
  CHECK(s.exact.has_value());
}

TEST_CASE("exact solution derivatives are consistent") {
  const double h = 1e-5;
  for (const auto& ex : {exact_solutions::sin_sin(), exact_solutions::bubble()}) {
    for (const Point x : sample_points(20)) {
      const double dx = (ex.value({x.x + h, x.y}) - ex.value({x.x - h, x.y})) / (2 * h);
      const double dy = (ex.value({x.x, x.y + h}) - ex.value({x.x, x.y - h})) / (2 * h);
      CHECK(ex.gradient(x).x == doctest::Approx(dx).epsilon(1e-7));
      CHECK(ex.gradient(x).y == doctest::Approx(dy).epsilon(1e-7));
      const double lap = (ex.value({x.x + h, x.y}) + ex.value({x.x - h, x.y}) +
                          ex.value({x.x, x.y + h}) + ex.value({x.x, x.y - h}) -
                          4 * ex.value(x)) / (h * h);
      CHECK(ex.laplacian(x) == doctest::Approx(lap).epsilon(1e-4));
    }
  }
}

TEST_CASE("quasilinear heat") {
  CHECK(code_of([] {
          make_quasilinear_heat(diffusions::constant(-1.0), {}, {});
        }) == ErrorCode::kNonellipticDiffusion);
  Diffusion bad{"dip", [](double s) { return s * s - 1.0; }, [](double s) { return 2 * s; },
                [](double) { return 2.0; }};
  CHECK(code_of([&] { make_quasilinear_heat(bad, {}, {}); }) == ErrorCode::kNonellipticDiffusion);
  const auto h2 = make_quasilinear_heat(diffusions::quadratic(), {}, {});
  CHECK_FALSE(h2.warnings.empty());
  CHECK_FALSE(h2.has_reaction());
  CHECK(h2.reaction(5.0) == 0.0);
  const auto h4 = make_quasilinear_heat(diffusions::quadratic(), {}, {}, 4.0);
  CHECK(h4.warnings.empty());
  CHECK(h4.kappa(2.0) == 5.0);
  CHECK(h4.dkappa(2.0) == 4.0);
  CHECK(code_of([] { make_quasilinear_heat(diffusions::constant(1.0), {}, {}, 1.0); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("heat manufactured source") {
  const auto ex = exact_solutions::sin_sin();
  const auto prob = make_heat_mms(diffusions::quadratic(),
                                  [](Point) { return Point{1.0, -0.5}; }, ex, 4.0);
  // -div(kappa(u) grad u) by central differences of the flux
  const double h = 1e-5;
  const auto flux = [&](Point x) {
    const double k = 1 + ex.value(x) * ex.value(x);
    const Point g = ex.gradient(x);
    return Point{k * g.x, k * g.y};
  };
  for (const Point x : sample_points(10)) {
    const double div = (flux({x.x + h, x.y}).x - flux({x.x - h, x.y}).x +
                        flux({x.x, x.y + h}).y - flux({x.x, x.y - h}).y) / (2 * h);
    const Point g = ex.gradient(x);
    CHECK(prob.f(x) == doctest::Approx(-div + g.x - 0.5 * g.y).epsilon(1e-6));
  }
}

TEST_CASE("a priori bounds") {
  const auto zero = apriori_bounds_cubic({0.0, 0.0}, DataSign::kZero);
  CHECK(zero.u_minus == 0.0);
  CHECK(zero.u_plus == 0.0);
  CHECK(zero.cubic_lipschitz() == 0.0);
  const auto pos = apriori_bounds_cubic({0.0, 0.07}, DataSign::kNonNegative);
  CHECK(pos.u_minus == 0.0);
  CHECK(pos.u_plus == doctest::Approx(0.07));
  const auto neg = apriori_bounds_cubic({-0.2, 0.0}, DataSign::kNonPositive);
  CHECK(neg.u_minus == doctest::Approx(-0.2));
  CHECK(neg.u_plus == 0.0);
  const auto mixed = apriori_bounds_cubic({-0.1, 0.3}, DataSign::kIndefinite);
  CHECK(mixed.u_minus <= -0.1);
  CHECK(mixed.u_plus >= 0.3);
  CHECK(mixed.cubic_lipschitz() ==
        doctest::Approx(3 * std::pow(std::max(-mixed.u_minus, mixed.u_plus), 2)));
  CHECK(mixed.clamp(10.0) == mixed.u_plus);
  CHECK(mixed.clamp(-10.0) == mixed.u_minus);
}
