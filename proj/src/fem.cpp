#include "afem/fem.hpp"

#include <cmath>

#include "afem/error.hpp"
#include "afem/quadrature.hpp"

namespace afem {

P1Space::P1Space(MeshPtr mesh, BoundaryCondition bc)
    : mesh_(std::move(mesh)), bc_(bc) {
  dof_of_vertex_.assign(mesh_->num_vertices(), -1);
  for (std::size_t v = 0; v < mesh_->num_vertices(); ++v) {
    if (bc_ == BoundaryCondition::kDirichlet && mesh_->vertices()[v].on_boundary)
      continue;
    dof_of_vertex_[v] = static_cast<std::ptrdiff_t>(vertex_of_dof_.size());
    vertex_of_dof_.push_back(v);
  }
}

SpacePtr make_space(MeshPtr mesh, BoundaryCondition bc) {
  return std::make_shared<const P1Space>(std::move(mesh), bc);
}

ElementGeometry element_geometry(const std::array<Point, 3>& c) {
  ElementGeometry g;
  const double twice = (c[1].x - c[0].x) * (c[2].y - c[0].y) -
                       (c[2].x - c[0].x) * (c[1].y - c[0].y);
  g.area = 0.5 * twice;
  for (std::size_t i = 0; i < 3; ++i) {
    const Point& a = c[(i + 1) % 3];
    const Point& b = c[(i + 2) % 3];
    g.grad[i] = {(a.y - b.y) / twice, (b.x - a.x) / twice};
  }
  return g;
}

ElementMatrix element_stiffness(const std::array<Point, 3>& corners) {
  const auto g = element_geometry(corners);
  ElementMatrix k{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      k[i][j] = g.area * (g.grad[i].x * g.grad[j].x + g.grad[i].y * g.grad[j].y);
  return k;
}

ElementMatrix element_mass(double area) {
  ElementMatrix m{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
  return m;
}

FeFunction::FeFunction(SpacePtr space)
    : space_(std::move(space)), coeffs_(space_->n_dofs(), 0.0) {}

FeFunction::FeFunction(SpacePtr space, std::vector<double> coeffs)
    : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != space_->n_dofs()) {
    throw Error(ErrorCode::kInvalidArgument, "coefficient vector size mismatch");
  }
}

std::vector<double> FeFunction::nodal_values() const {
  std::vector<double> out(mesh().num_vertices());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = vertex_value(v);
  return out;
}

std::array<double, 3> FeFunction::element_values(std::size_t tri) const {
  const auto& t = mesh().triangles()[tri];
  return {vertex_value(t.v[0]), vertex_value(t.v[1]), vertex_value(t.v[2])};
}

Point FeFunction::gradient(std::size_t tri) const {
  const auto g = element_geometry(mesh().corners(tri));
  const auto u = element_values(tri);
  Point out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.x += u[i] * g.grad[i].x;
    out.y += u[i] * g.grad[i].y;
  }
  return out;
}

double FeFunction::value(Point p) const {
  const auto t = locate(mesh(), p);
  if (!t) throw Error(ErrorCode::kInvalidArgument, "point outside the mesh");
  const auto c = mesh().corners(*t);
  const auto g = element_geometry(c);
  const auto u = element_values(*t);
  double s = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    // barycentric coordinate i is linear with gradient g.grad[i] and
    // equals 1 at corner i
    const double lam = 1.0 + g.grad[i].x * (p.x - c[i].x) + g.grad[i].y * (p.y - c[i].y);
    s += u[i] * lam;
  }
  return s;
}

namespace {

void check_same_space(const FeFunction& a, const FeFunction& b) {
  if (a.space_ptr() != b.space_ptr()) {
    throw Error(ErrorCode::kInvalidArgument, "functions live on different spaces");
  }
}

// dof indices of the element corners, -1 when eliminated
std::array<std::ptrdiff_t, 3> element_dofs(const P1Space& s, std::size_t tri) {
  const auto& t = s.mesh().triangles()[tri];
  return {s.dof_of_vertex(t.v[0]), s.dof_of_vertex(t.v[1]), s.dof_of_vertex(t.v[2])};
}

SparseMatrix assemble_from(const P1Space& space,
                           const std::function<ElementMatrix(std::size_t)>& local) {
  std::vector<Triplet> trip;
  trip.reserve(space.mesh().num_triangles() * 9);
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const auto dofs = element_dofs(space, t);
    const auto k = local(t);
    for (std::size_t i = 0; i < 3; ++i) {
      if (dofs[i] < 0) continue;
      for (std::size_t j = 0; j < 3; ++j) {
        if (dofs[j] < 0) continue;
        trip.push_back({static_cast<std::size_t>(dofs[i]),
                        static_cast<std::size_t>(dofs[j]), k[i][j]});
      }
    }
  }
  return SparseMatrix(space.n_dofs(), space.n_dofs(), std::move(trip));
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kQuadratureDomainError,
                std::string(what) + " is not finite at a quadrature point");
  }
}

}  // namespace

FeFunction operator-(const FeFunction& a, const FeFunction& b) {
  check_same_space(a, b);
  auto c = a.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b.coeffs()[i];
  return FeFunction(a.space_ptr(), std::move(c));
}

FeFunction operator+(const FeFunction& a, const FeFunction& b) {
  check_same_space(a, b);
  auto c = a.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b.coeffs()[i];
  return FeFunction(a.space_ptr(), std::move(c));
}

FeFunction operator*(double s, const FeFunction& a) {
  auto c = a.coeffs();
  for (auto& v : c) v *= s;
  return FeFunction(a.space_ptr(), std::move(c));
}

FeFunction interpolate(const SpacePtr& space, const ScalarField& g) {
  std::vector<double> c(space->n_dofs());
  for (std::size_t d = 0; d < c.size(); ++d)
    c[d] = g(space->mesh().point(space->vertex_of_dof(d)));
  return FeFunction(space, std::move(c));
}

SparseMatrix assemble_laplacian(const P1Space& space) {
  return assemble_from(space, [&](std::size_t t) {
    return element_stiffness(space.mesh().corners(t));
  });
}

SparseMatrix assemble_mass(const P1Space& space) {
  return assemble_from(space, [&](std::size_t t) {
    return element_mass(space.mesh().area(t));
  });
}

std::vector<double> assemble_load(const P1Space& space, const ScalarField& f) {
  std::vector<double> out(space.n_dofs(), 0.0);
  const auto& rule = triangle_rule_degree4();
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const auto dofs = element_dofs(space, t);
    const auto c = space.mesh().corners(t);
    const double area = space.mesh().area(t);
    for (const auto& q : rule) {
      const double fv = f(map_point(c, q.bary));
      require_finite(fv, "f");
      for (std::size_t i = 0; i < 3; ++i)
        if (dofs[i] >= 0) out[static_cast<std::size_t>(dofs[i])] += q.weight * area * fv * q.bary[i];
    }
  }
  return out;
}

std::vector<double> nonlinear_residual(const ProblemSpec& problem,
                                       const FeFunction& u) {
  const P1Space& space = u.space();
  const auto& mesh = space.mesh();
  const auto& rule = triangle_rule_degree4();
  std::vector<double> out(space.n_dofs(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto dofs = element_dofs(space, t);
    const auto c = mesh.corners(t);
    const auto g = element_geometry(c);
    const auto uv = u.element_values(t);
    Point gu;
    for (std::size_t i = 0; i < 3; ++i) {
      gu.x += uv[i] * g.grad[i].x;
      gu.y += uv[i] * g.grad[i].y;
    }
    std::array<double, 3> local{};
    if (!problem.diffusion) {
      for (std::size_t i = 0; i < 3; ++i)
        local[i] += g.area * (gu.x * g.grad[i].x + gu.y * g.grad[i].y);
    }
    for (const auto& q : rule) {
      const double uq = q.bary[0] * uv[0] + q.bary[1] * uv[1] + q.bary[2] * uv[2];
      const Point x = map_point(c, q.bary);
      const double w = q.weight * g.area;
      double zeroth = -problem.f(x);
      if (problem.has_reaction()) zeroth += problem.reaction(uq);
      if (problem.b) {
        const Point b = problem.b(x);
        zeroth += b.x * gu.x + b.y * gu.y;
      }
      require_finite(zeroth, "residual density");
      double kap = 0.0;
      if (problem.diffusion) {
        kap = problem.kappa(uq);
        require_finite(kap, "kappa");
      }
      for (std::size_t i = 0; i < 3; ++i) {
        double v = zeroth * q.bary[i];
        if (problem.diffusion) v += kap * (gu.x * g.grad[i].x + gu.y * g.grad[i].y);
        local[i] += w * v;
      }
    }
    for (std::size_t i = 0; i < 3; ++i)
      if (dofs[i] >= 0) out[static_cast<std::size_t>(dofs[i])] += local[i];
  }
  return out;
}

SparseMatrix jacobian(const ProblemSpec& problem, const FeFunction& u) {
  const P1Space& space = u.space();
  const auto& mesh = space.mesh();
  const auto& rule = triangle_rule_degree4();
  return assemble_from(space, [&](std::size_t t) {
    const auto c = mesh.corners(t);
    const auto g = element_geometry(c);
    const auto uv = u.element_values(t);
    Point gu;
    for (std::size_t i = 0; i < 3; ++i) {
      gu.x += uv[i] * g.grad[i].x;
      gu.y += uv[i] * g.grad[i].y;
    }
    ElementMatrix k{};
    if (!problem.diffusion) k = element_stiffness(c);
    for (const auto& q : rule) {
      const double uq = q.bary[0] * uv[0] + q.bary[1] * uv[1] + q.bary[2] * uv[2];
      const Point x = map_point(c, q.bary);
      const double w = q.weight * g.area;
      const double dn = problem.has_reaction() ? problem.reaction_derivative(uq) : 0.0;
      require_finite(dn, "reaction derivative");
      double kap = 0.0, dkap = 0.0;
      if (problem.diffusion) {
        kap = problem.kappa(uq);
        dkap = problem.dkappa(uq);
        require_finite(kap, "kappa");
        require_finite(dkap, "kappa'");
      }
      const Point b = problem.velocity(x);
      for (std::size_t i = 0; i < 3; ++i) {
        const double gi_gu = gu.x * g.grad[i].x + gu.y * g.grad[i].y;
        for (std::size_t j = 0; j < 3; ++j) {
          double v = dn * q.bary[j] * q.bary[i];
          v += (b.x * g.grad[j].x + b.y * g.grad[j].y) * q.bary[i];
          if (problem.diffusion) {
            v += kap * (g.grad[j].x * g.grad[i].x + g.grad[j].y * g.grad[i].y);
            v += dkap * q.bary[j] * gi_gu;
          }
          k[i][j] += w * v;
        }
      }
    }
    return k;
  });
}

FeFunction prolong(const FeFunction& u, const SpacePtr& fine) {
  const auto& coarse_mesh = u.mesh();
  const auto& fine_mesh = fine->mesh();
  if (!fine_mesh.is_refinement_of(coarse_mesh) ||
      fine->boundary_condition() != u.space().boundary_condition()) {
    throw Error(ErrorCode::kNotARefinement,
                "target space is not built on a refinement of the source mesh");
  }
  std::vector<double> nodal(fine_mesh.num_vertices(), 0.0);
  const std::size_t nc = coarse_mesh.num_vertices();
  for (std::size_t v = 0; v < nc; ++v) nodal[v] = u.vertex_value(v);
  const auto& parents = fine_mesh.vertex_parents();
  for (std::size_t v = nc; v < nodal.size(); ++v)
    nodal[v] = 0.5 * (nodal[parents[v][0]] + nodal[parents[v][1]]);
  std::vector<double> c(fine->n_dofs());
  for (std::size_t d = 0; d < c.size(); ++d) c[d] = nodal[fine->vertex_of_dof(d)];
  return FeFunction(fine, std::move(c));
}

double h1_seminorm(const FeFunction& u) {
  double s = 0.0;
  for (std::size_t t = 0; t < u.mesh().num_triangles(); ++t) {
    const Point g = u.gradient(t);
    s += u.mesh().area(t) * (g.x * g.x + g.y * g.y);
  }
  return std::sqrt(s);
}

double l2_norm(const FeFunction& u) {
  double s = 0.0;
  for (std::size_t t = 0; t < u.mesh().num_triangles(); ++t) {
    const auto v = u.element_values(t);
    const auto m = element_mass(u.mesh().area(t));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) s += v[i] * m[i][j] * v[j];
  }
  return std::sqrt(s);
}

double lp_norm(const FeFunction& u, double p) {
  const auto& rule = triangle_rule_error();
  double s = 0.0;
  for (std::size_t t = 0; t < u.mesh().num_triangles(); ++t) {
    const auto v = u.element_values(t);
    const double area = u.mesh().area(t);
    for (const auto& q : rule) {
      const double uq = q.bary[0] * v[0] + q.bary[1] * v[1] + q.bary[2] * v[2];
      s += q.weight * area * std::pow(std::abs(uq), p);
    }
  }
  return std::pow(s, 1.0 / p);
}

double w1p_norm(const FeFunction& u, double p,
                const std::vector<std::size_t>& elements) {
  const auto& rule = triangle_rule_error();
  double s = 0.0;
  for (auto t : elements) {
    const auto v = u.element_values(t);
    const double area = u.mesh().area(t);
    const Point g = u.gradient(t);
    s += area * std::pow(std::hypot(g.x, g.y), p);
    for (const auto& q : rule) {
      const double uq = q.bary[0] * v[0] + q.bary[1] * v[1] + q.bary[2] * v[2];
      s += q.weight * area * std::pow(std::abs(uq), p);
    }
  }
  return std::pow(s, 1.0 / p);
}

std::vector<double> element_h1_error_sq(const FeFunction& u,
                                        const ExactSolution& exact) {
  const auto& rule = triangle_rule_error();
  std::vector<double> out(u.mesh().num_triangles(), 0.0);
  for (std::size_t t = 0; t < out.size(); ++t) {
    const auto c = u.mesh().corners(t);
    const double area = u.mesh().area(t);
    const Point gh = u.gradient(t);
    double s = 0.0;
    for (const auto& q : rule) {
      const Point g = exact.gradient(map_point(c, q.bary));
      const double dx = g.x - gh.x, dy = g.y - gh.y;
      s += q.weight * (dx * dx + dy * dy);
    }
    out[t] = s * area;
  }
  return out;
}

double h1_seminorm_error(const FeFunction& u, const ExactSolution& exact) {
  double s = 0.0;
  for (double e : element_h1_error_sq(u, exact)) s += e;
  return std::sqrt(s);
}

double l2_error(const FeFunction& u, const ExactSolution& exact) {
  const auto& rule = triangle_rule_error();
  double s = 0.0;
  for (std::size_t t = 0; t < u.mesh().num_triangles(); ++t) {
    const auto c = u.mesh().corners(t);
    const auto v = u.element_values(t);
    const double area = u.mesh().area(t);
    for (const auto& q : rule) {
      const double uq = q.bary[0] * v[0] + q.bary[1] * v[1] + q.bary[2] * v[2];
      const double d = exact.value(map_point(c, q.bary)) - uq;
      s += q.weight * area * d * d;
    }
  }
  return std::sqrt(s);
}

}  // namespace afem
