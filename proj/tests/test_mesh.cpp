#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "afem/error.hpp"
#include "afem/mesh.hpp"

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

// Square (0,1)^2 fanned into four triangles around its center.
std::vector<Vertex> fan_vertices() {
  return {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
}

std::set<std::array<long long, 3>> shape_classes(const Triangulation& m) {
  std::set<std::array<long long, 3>> s;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto a = sorted_angles(m, t);
    s.insert({std::llround(a[0] * 1e9), std::llround(a[1] * 1e9), std::llround(a[2] * 1e9)});
  }
  return s;
}

}  // namespace

TEST_CASE("two-triangle unit square") {
  const auto m = meshes::unit_square_two();
  CHECK(m->num_vertices() == 4);
  CHECK(m->num_triangles() == 2);
  CHECK(m->is_conforming());
  // diagonal is the refinement edge of both
  const auto e0 = m->edge_of(0, m->triangles()[0].ref_edge);
  const auto e1 = m->edge_of(1, m->triangles()[1].ref_edge);
  CHECK(e0 == e1);
  CHECK_FALSE(m->edges()[e0].on_boundary());
  for (const auto& v : m->vertices()) CHECK(v.on_boundary);
  CHECK(m->total_area() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("single triangle has only boundary edges") {
  const auto m = meshes::single_triangle({0, 0}, {1, 0}, {0, 1});
  CHECK(m->edges().size() == 3);
  for (const auto& e : m->edges()) CHECK(e.on_boundary());
  CHECK(m->triangles()[0].generation == 0);
  CHECK_FALSE(m->triangles()[0].parent.has_value());
}

TEST_CASE("clockwise input is reoriented") {
  std::vector<Vertex> v{{0, 0}, {0, 1}, {1, 0}};
  std::vector<TriangleInput> t{{{0, 1, 2}, 0}};
  const auto m = build_initial(v, t, LabelPolicy::kKeep);
  CHECK(m.area(0) == doctest::Approx(0.5));
  CHECK(m.is_conforming());
  // label still points at the edge opposite vertex 0
  const auto& tri = m.triangles()[0];
  CHECK(tri.v[static_cast<std::size_t>(tri.ref_edge)] == 0);
}

TEST_CASE("build_initial error paths") {
  SUBCASE("hanging node") {
    // big triangle below, two small ones above sharing half of its top edge
    std::vector<Vertex> v{{0, 0}, {2, 0}, {1, -1}, {1, 0}, {0.5, 1}, {1.5, 1}};
    std::vector<TriangleInput> t{{{0, 2, 1}, 0}, {{0, 3, 4}, 0}, {{3, 1, 5}, 0}};
    CHECK(code_of([&] { build_initial(v, t); }) == ErrorCode::kNonConforming);
  }
  SUBCASE("edge shared by three triangles") {
    std::vector<Vertex> v{{0, 0}, {1, 0}, {0.5, 1}, {0.5, -1}, {0.5, 2}};
    std::vector<TriangleInput> t{{{0, 1, 2}, 0}, {{0, 3, 1}, 0}, {{0, 1, 4}, 0}};
    CHECK(code_of([&] { build_initial(v, t); }) == ErrorCode::kNonConforming);
  }
  SUBCASE("degenerate triangle") {
    std::vector<Vertex> v{{0, 0}, {1, 0}, {2, 0}, {0, 1}};
    std::vector<TriangleInput> t{{{0, 1, 3}, 0}, {{0, 1, 2}, 0}};
    CHECK(code_of([&] { build_initial(v, t); }) == ErrorCode::kDegenerateTriangle);
  }
  SUBCASE("cyclic labels") {
    // each fan triangle points at the spoke it shares with the next one
    std::vector<TriangleInput> t;
    for (std::size_t i = 0; i < 4; ++i) t.push_back({{4, i, (i + 1) % 4}, 1});
    CHECK(code_of([&] { build_initial(fan_vertices(), t, LabelPolicy::kKeep); }) ==
          ErrorCode::kIncompatibleLabels);
    // the longest-edge policy repairs the same input
    const auto m = build_initial(fan_vertices(), t);
    CHECK(m.is_conforming());
  }
  SUBCASE("index out of range") {
    std::vector<Vertex> v{{0, 0}, {1, 0}, {0, 1}};
    std::vector<TriangleInput> t{{{0, 1, 7}, 0}};
    CHECK(code_of([&] { build_initial(v, t); }) == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("refine basics") {
  const auto m = meshes::unit_square_two();
  SUBCASE("empty mark is a no-op") {
    const auto r = refine(m, std::vector<std::size_t>{});
    CHECK(r->num_triangles() == 2);
    CHECK(r->num_vertices() == 4);
  }
  SUBCASE("mark both") {
    const auto r = refine(m, std::vector<std::size_t>{0, 1});
    CHECK(r->num_triangles() == 4);
    CHECK(r->num_vertices() == 5);
    for (std::size_t t = 0; t < 4; ++t) CHECK(r->area(t) == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("mark one, completion bisects the other") {
    const auto r = refine(m, std::vector<std::size_t>{0});
    CHECK(r->num_triangles() == 4);
    CHECK(r->is_conforming());
    CHECK(r->is_refinement_of(*m));
    CHECK_FALSE(m->is_refinement_of(*r));
  }
  SUBCASE("ell = 2 quarters every marked element") {
    const auto r = refine(m, std::vector<std::size_t>{0}, 2);
    CHECK(r->is_conforming());
    double marked_area_max = 0.0;
    for (std::size_t t = 0; t < r->num_triangles(); ++t) {
      const auto& tri = r->triangles()[t];
      if (tri.generation >= 2) marked_area_max = std::max(marked_area_max, r->area(t));
    }
    CHECK(marked_area_max == doctest::Approx(0.125));
    // no element of the marked parent survives with generation < 2
    for (std::size_t t = 0; t < r->num_triangles(); ++t) {
      const auto c = r->corners(t);
      const Point g{(c[0].x + c[1].x + c[2].x) / 3, (c[0].y + c[1].y + c[2].y) / 3};
      if (*locate(*m, g) == 0) CHECK(r->triangles()[t].generation >= 2);
    }
  }
  SUBCASE("invalid arguments") {
    CHECK(code_of([&] { refine(m, std::vector<std::size_t>{5}); }) == ErrorCode::kInvalidArgument);
    CHECK(code_of([&] { refine(m, std::vector<std::size_t>{0}, 0); }) == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("uniform sweep on two-triangle square gives four triangles") {
  const auto r = refine_uniform(meshes::unit_square_two(), 1);
  CHECK(r->num_triangles() == 4);
  CHECK(refine_uniform(meshes::unit_square_two(), 2)->num_triangles() == 8);
}

TEST_CASE("meshsize") {
  const auto m = meshes::single_triangle({0, 0}, {1, 0}, {0, 1});
  CHECK(meshsize(*m)[0] == doctest::Approx(0.7071067811865476).epsilon(1e-15));
  const auto sq = meshes::single_triangle({0, 0}, {2, 0}, {0, 1});
  CHECK(meshsize(*sq)[0] == doctest::Approx(1.0));
  const auto r = refine_uniform(m, 1);
  for (double h : meshsize(*r)) CHECK(h == doctest::Approx(0.7071067811865476 / std::sqrt(2.0)));
}

TEST_CASE("patch") {
  const auto m = meshes::single_triangle({0, 0}, {1, 0}, {0, 1});
  CHECK(patch(*m, 0) == std::vector<std::size_t>{0});
  // two triangles touching at one vertex
  std::vector<Vertex> v{{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  std::vector<TriangleInput> t{{{0, 1, 2}, 0}, {{0, 3, 4}, 0}};
  const auto bow = build_initial(v, t);
  CHECK(patch(bow, 0) == std::vector<std::size_t>{0, 1});
  CHECK(patch(bow, 1) == std::vector<std::size_t>{0, 1});
  // refined square: every element touches the centre vertex
  const auto r = refine_uniform(meshes::unit_square_two(), 1);
  for (std::size_t k = 0; k < 4; ++k) CHECK(patch(*r, k).size() == 4);
}

TEST_CASE("mesh_stats") {
  const auto st = mesh_stats(*meshes::unit_square_two());
  CHECK(st.min_angle == doctest::Approx(std::numbers::pi / 4));
  CHECK(st.max_neighbor_area_ratio == doctest::Approx(1.0));
  const auto eq = meshes::single_triangle({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2});
  CHECK(mesh_stats(*eq).min_angle == doctest::Approx(std::numbers::pi / 3));
}

TEST_CASE("at most four similarity classes under uniform NVB") {
  for (const auto& start : {meshes::single_triangle({0, 0}, {1, 0}, {0.3, 0.8}),
                            meshes::single_triangle({0, 0}, {1, 0}, {0, 1})}) {
    std::set<std::array<long long, 3>> all;
    auto m = start;
    for (int g = 0; g <= 6; ++g) {
      const auto s = shape_classes(*m);
      all.insert(s.begin(), s.end());
      m = refine_uniform(m, 1);
    }
    CHECK(all.size() <= 4);
  }
}

TEST_CASE("random marking stress: area, halving, conformity, marked subdivision") {
  std::mt19937 rng(7);
  auto m = meshes::lshape();
  const double area0 = m->total_area();
  for (int step = 0; step < 25; ++step) {
    std::vector<std::size_t> marked;
    std::bernoulli_distribution pick(0.15);
    for (std::size_t t = 0; t < m->num_triangles(); ++t)
      if (pick(rng)) marked.push_back(t);
    const auto r = refine(m, marked);
    REQUIRE(r->is_conforming());
    CHECK(std::abs(r->total_area() - area0) <= 1e-12 * area0);
    for (const auto& b : r->bisections()) {
      const auto area = [&](const std::array<std::size_t, 3>& v) {
        const Point a = r->point(v[0]), bb = r->point(v[1]), c = r->point(v[2]);
        return 0.5 * std::abs((bb.x - a.x) * (c.y - a.y) - (c.x - a.x) * (bb.y - a.y));
      };
      const double pa = area(b.parent);
      for (const auto& ch : b.children) CHECK(std::abs(area(ch) - pa / 2) <= 1e-14 * pa);
    }
    // no marked element survives: every child of a marked parent is newer
    for (std::size_t t = 0; t < r->num_triangles(); ++t) {
      const auto& tri = r->triangles()[t];
      REQUIRE(tri.parent.has_value());
      if (std::find(marked.begin(), marked.end(), *tri.parent) != marked.end())
        CHECK(tri.generation > m->triangles()[*tri.parent].generation);
      // meshsize never increases
      CHECK(std::sqrt(r->area(t)) <= std::sqrt(m->area(*tri.parent)) * (1 + 1e-15));
    }
    m = r;
  }
}

TEST_CASE("text format round trip") {
  const auto m = refine(meshes::lshape(), std::vector<std::size_t>{0, 5});
  std::stringstream ss;
  write_mesh(ss, *m);
  const std::string first = ss.str();
  const auto back = read_mesh(ss);
  CHECK(back->num_vertices() == m->num_vertices());
  CHECK(back->num_triangles() == m->num_triangles());
  std::stringstream again;
  write_mesh(again, *back);
  CHECK(again.str() == first);
  for (std::size_t t = 0; t < m->num_triangles(); ++t)
    CHECK(back->triangles()[t].ref_edge == m->triangles()[t].ref_edge);
}

TEST_CASE("read_mesh rejects malformed input") {
  std::stringstream ss("3 1\n0 0 1\n1 0 1\n");
  CHECK(code_of([&] { read_mesh(ss); }) == ErrorCode::kParseError);
}

TEST_CASE("vtk export") {
  std::stringstream ss;
  const auto m = meshes::unit_square_two();
  const std::vector<double> eta{1.0, 2.0};
  write_vtk(ss, *m, eta);
  const auto s = ss.str();
  CHECK(s.find("# vtk DataFile Version") == 0);
  CHECK(s.find("CELLS 2 8") != std::string::npos);
  CHECK(s.find("SCALARS eta double") != std::string::npos);
}

TEST_CASE("locate") {
  const auto m = meshes::lshape();
  CHECK(locate(*m, {-0.5, -0.5}).has_value());
  CHECK_FALSE(locate(*m, {0.5, -0.5}).has_value());
}

TEST_CASE("lshape") {
  const auto m = meshes::lshape();
  CHECK(m->num_vertices() == 11);
  CHECK(m->num_triangles() == 12);
  CHECK(m->total_area() == doctest::Approx(3.0));
  CHECK(m->is_conforming());
}
