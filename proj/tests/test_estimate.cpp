#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "afem/error.hpp"
#include "afem/estimate.hpp"
#include "afem/nlsolve.hpp"

using namespace afem;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937& rng, double s = 1.0) {
  std::uniform_real_distribution<double> d(-s, s);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

ScalarField constant(double c) {
  return [c](Point) { return c; };
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected afem::Error");
  return ErrorCode::kIoError;
}

}  // namespace

TEST_CASE("trivial indicators") {
  const auto sp = make_space(meshes::unit_square_grid(4));
  const auto f = indicator_semilinear(FeFunction(sp), make_semilinear_power(3, {}));
  CHECK(f.eta.size() == 32);
  for (double e : f.eta) CHECK(e == 0.0);
  CHECK(f.total() == 0.0);
}

TEST_CASE("single right triangle with f = 1") {
  const auto sp = make_space(meshes::single_triangle({0, 0}, {1, 0}, {0, 1}));
  const auto f = indicator_semilinear(FeFunction(sp), make_semilinear_power(3, constant(1.0)));
  CHECK(f.eta[0] == doctest::Approx(0.5).epsilon(1e-14));
  const auto heat = make_quasilinear_heat(diffusions::quadratic(),
                                          [](Point p) { return Point{p.y, 3.0}; }, constant(1.0));
  CHECK(indicator_heat(FeFunction(sp), heat).eta[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("slope jump across the diagonal") {
  const auto sp = make_space(meshes::unit_square_two(), BoundaryCondition::kNone);
  // u = max(x - y, 0): gradient jumps by sqrt(2) in the diagonal normal
  const auto u = interpolate(sp, [](Point p) { return std::max(p.x - p.y, 0.0); });
  const auto prob = make_semilinear_power(3, {});
  IndicatorOptions jumps_only;
  jumps_only.interior = false;
  const auto f = indicator_semilinear(u, prob, jumps_only);
  CHECK(f.eta[0] * f.eta[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(f.eta[1] * f.eta[1] == doctest::Approx(4.0).epsilon(1e-14));
  jumps_only.jump_weight = JumpWeight::kElementSize;
  const auto g = indicator_semilinear(u, prob, jumps_only);
  CHECK(g.eta[0] * g.eta[0] == doctest::Approx(2.0).epsilon(1e-14));
  // the element where u vanishes has no interior contribution
  const auto full = indicator_semilinear(u, prob);
  std::size_t upper = std::abs(u.gradient(0).x) < 1e-14 ? 0 : 1;
  CHECK(full.eta[upper] * full.eta[upper] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(full.eta[1 - upper] > full.eta[upper]);
}

TEST_CASE("edge jumps are symmetric") {
  std::mt19937 rng(8);
  const auto m = refine(refine_uniform(meshes::lshape(), 2), std::vector<std::size_t>{0, 4, 9});
  const auto sp = make_space(m);
  const FeFunction u(sp, random_vec(sp->n_dofs(), rng));
  for (const auto& e : m->edges()) {
    if (e.on_boundary()) continue;
    const double a = edge_jump(u, *e.tri[0], e.local[0]);
    const double b = edge_jump(u, *e.tri[1], e.local[1]);
    CHECK(std::abs(a - b) <= 1e-13 * (1 + std::abs(a)));
  }
}

TEST_CASE("heat indicator with unit diffusion reduces to the Poisson residual") {
  std::mt19937 rng(12);
  const auto sp = make_space(refine_uniform(meshes::unit_square_grid(3), 1));
  const FeFunction u(sp, random_vec(sp->n_dofs(), rng));
  const auto f = [](Point p) { return std::cos(3 * p.x) + p.y; };
  const auto heat = make_quasilinear_heat(diffusions::constant(1.0), {}, f);
  const auto sl = make_semilinear_power(3, f);
  IndicatorOptions jumps_only;
  jumps_only.interior = false;
  const auto h = indicator_heat(u, heat);
  const auto jumps = indicator_semilinear(u, sl, jumps_only);
  IndicatorOptions interior_only;
  interior_only.jumps = false;
  const auto data = indicator_semilinear(FeFunction(sp), sl, interior_only);
  for (std::size_t t = 0; t < h.eta.size(); ++t)
    CHECK(h.eta[t] * h.eta[t] ==
          doctest::Approx(jumps.eta[t] * jumps.eta[t] + data.eta[t] * data.eta[t]).epsilon(1e-13));
}

TEST_CASE("heat interior density with kappa = 1 + s^2 and u = x") {
  const auto sp = make_space(meshes::single_triangle({0, 0}, {1, 0}, {0, 1}),
                             BoundaryCondition::kNone);
  const auto u = interpolate(sp, [](Point p) { return p.x; });
  const auto heat = make_quasilinear_heat(diffusions::quadratic(), {}, constant(0.0));
  // density -2x; h^2 * int (2x)^2 = 0.5 * 4/12
  CHECK(indicator_heat(u, heat).eta[0] * indicator_heat(u, heat).eta[0] ==
        doctest::Approx(1.0 / 6).epsilon(1e-14));
}

TEST_CASE("heat indicator domain error") {
  Diffusion d{"cut", [](double s) { return s > 50 ? std::nan("") : 1.0; },
              [](double) { return 0.0; }, [](double) { return 0.0; }};
  const auto heat = make_quasilinear_heat(d, {}, constant(1.0));
  const auto sp = make_space(meshes::unit_square_grid(3));
  const FeFunction u(sp, std::vector<double>(sp->n_dofs(), 100.0));
  CHECK(code_of([&] { indicator_heat(u, heat); }) == ErrorCode::kQuadratureDomainError);
}

TEST_CASE("oscillation") {
  const auto tri = meshes::single_triangle({0, 0}, {1, 0}, {0, 1});
  CHECK(oscillation(make_semilinear_power(3, constant(7.0)), *tri, 2.0)[0] == doctest::Approx(0.0));
  const auto ox = oscillation(make_semilinear_power(3, [](Point p) { return p.x; }), *tri, 2.0);
  CHECK(ox[0] * ox[0] == doctest::Approx(1.0 / 72).epsilon(1e-14));

  std::mt19937 rng(6);
  std::uniform_real_distribution<double> d(-3, 3);
  const auto m = refine_uniform(meshes::lshape(), 1);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = d(rng), b = d(rng), c = d(rng);
    const auto prob = make_semilinear_power(3, [=](Point p) { return a * std::sin(b * p.x) + c * p.y * p.y; });
    for (double p : {2.0, 3.0}) {
      const auto osc = oscillation(prob, *m, p);
      const auto sp = make_space(m);
      IndicatorOptions interior_only;
      interior_only.jumps = false;
      interior_only.p = p;
      // at u = 0 the interior indicator is h ||f||_p
      const auto hf = indicator_semilinear(FeFunction(sp), prob, interior_only);
      for (std::size_t t = 0; t < osc.size(); ++t) CHECK(osc[t] <= 2 * hf.eta[t] + 1e-15);
    }
  }
}

TEST_CASE("heat oscillation vanishes for constant data and linear flux") {
  const auto sp = make_space(meshes::unit_square_grid(3));
  const auto heat = make_quasilinear_heat(diffusions::constant(2.0), {}, constant(1.0));
  std::mt19937 rng(1);
  const FeFunction u(sp, random_vec(sp->n_dofs(), rng));
  for (double o : oscillation_heat(u, heat, 2.0)) CHECK(o <= 1e-13);
  // kappa(u) with u linear along an edge is quadratic: (I - pi_1) sees it
  const auto quad = make_quasilinear_heat(diffusions::quadratic(), {}, constant(1.0));
  double total = 0.0;
  for (double o : oscillation_heat(u, quad, 2.0)) total += o;
  CHECK(total > 0.0);
}

TEST_CASE("aggregate") {
  const std::vector<double> e{3, 4};
  CHECK(aggregate(e, 2.0, std::vector<std::size_t>{}) == 0.0);
  CHECK(aggregate(e, 2.0, std::vector<std::size_t>{0, 1}) == doctest::Approx(5.0));
  const std::vector<double> ones{1, 1, 1, 1};
  CHECK(aggregate(ones, 2.0, std::vector<std::size_t>{0, 1, 2, 3}) == doctest::Approx(2.0));
  CHECK(aggregate(ones, 3.0, std::vector<std::size_t>{0, 1, 2, 3}) == doctest::Approx(std::cbrt(4.0)));
}

TEST_CASE("indicators scale linearly with the data at u = 0") {
  const auto sp = make_space(refine_uniform(meshes::lshape(), 1));
  const auto f = [](Point p) { return 1 + p.x * p.y; };
  const auto base = indicator_semilinear(FeFunction(sp), make_semilinear_power(3, f));
  const double s = 3.5;
  const auto scaled = indicator_semilinear(
      FeFunction(sp), make_semilinear_power(3, [&](Point p) { return s * f(p); }));
  for (std::size_t t = 0; t < base.eta.size(); ++t)
    CHECK(scaled.eta[t] == doctest::Approx(s * base.eta[t]).epsilon(1e-14));
}

TEST_CASE("dual residual probe") {
  const auto prob = make_cubic_mms(exact_solutions::sin_sin());
  SUBCASE("discrete solution on its own space") {
    const auto sp = make_space(meshes::unit_square_grid(8));
    const auto u = newton(prob, FeFunction(sp)).u;
    CHECK(dual_residual_probe(u, prob, 0) <= 1e-9);
  }
  SUBCASE("tracks the energy error") {
    auto m = meshes::unit_square_grid(2);
    std::vector<double> ratio;
    for (int k = 0; k < 4; ++k) {
      m = refine_uniform(m, 1);
      const auto u = newton(prob, FeFunction(make_space(m))).u;
      ratio.push_back(dual_residual_probe(u, prob, 2) / h1_seminorm_error(u, *prob.exact));
    }
    const auto [mn, mx] = std::minmax_element(ratio.begin(), ratio.end());
    CHECK(*mx / *mn <= 4.0);
  }
  SUBCASE("grows with perturbation size") {
    const auto sp = make_space(meshes::unit_square_grid(6));
    const auto u = newton(prob, FeFunction(sp)).u;
    std::mt19937 rng(2);
    const auto w = random_vec(sp->n_dofs(), rng);
    double prev = 0.0;
    for (double eps : {1e-3, 1e-2, 1e-1}) {
      auto c = u.coeffs();
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += eps * w[i];
      const double pr = dual_residual_probe(FeFunction(sp, c), prob, 1);
      CHECK(pr > prev);
      prev = pr;
    }
  }
  SUBCASE("interpolant residual decays like h") {
    std::vector<double> probe;
    for (int n : {4, 8, 16}) {
      const auto sp = make_space(meshes::unit_square_grid(n));
      probe.push_back(dual_residual_probe(interpolate(sp, prob.exact->value), prob, 1));
    }
    for (std::size_t k = 0; k + 1 < probe.size(); ++k) {
      const double rate = std::log2(probe[k] / probe[k + 1]);
      CHECK(rate > 0.8);
    }
  }
  SUBCASE("size cap") {
    const auto sp = make_space(meshes::unit_square_grid(40));
    CHECK(code_of([&] { dual_residual_probe(FeFunction(sp), prob, 2); }) == ErrorCode::kMeshTooLarge);
  }
}
