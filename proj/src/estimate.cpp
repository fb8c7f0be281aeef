#include "afem/estimate.hpp"

#include <cmath>

#include "afem/error.hpp"
#include "afem/nlsolve.hpp"
#include "afem/quadrature.hpp"

namespace afem {

namespace {

double powp(double v, double p) { return p == 2.0 ? v * v : std::pow(std::abs(v), p); }

double root_p(double v, double p) { return p == 2.0 ? std::sqrt(v) : std::pow(v, 1.0 / p); }

void check_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw Error(ErrorCode::kInvalidArgument, "indicator exponent must be > 1");
  }
}

struct EdgeGeom {
  Point a, b;
  double length;
  Point normal;  // outward for the element it was built from
};

EdgeGeom local_edge(const Triangulation& mesh, std::size_t tri, int local) {
  const auto& t = mesh.triangles()[tri];
  const Point a = mesh.point(t.v[static_cast<std::size_t>((local + 1) % 3)]);
  const Point b = mesh.point(t.v[static_cast<std::size_t>((local + 2) % 3)]);
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len = std::hypot(dx, dy);
  return {a, b, len, {dy / len, -dx / len}};
}

const std::vector<LineQuadPoint>& edge_rule() {
  static const auto rule = gauss_legendre(6);
  return rule;
}

// Values of u at the endpoints of local edge `local` of tri.
std::array<double, 2> edge_values(const FeFunction& u, std::size_t tri, int local) {
  const auto& t = u.mesh().triangles()[tri];
  return {u.vertex_value(t.v[static_cast<std::size_t>((local + 1) % 3)]),
          u.vertex_value(t.v[static_cast<std::size_t>((local + 2) % 3)])};
}

double jump_weight(JumpWeight w, double edge_len, double h_tau) {
  return w == JumpWeight::kEdgeLength ? edge_len : h_tau;
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kQuadratureDomainError, std::string(what) + " is not finite");
  }
  return v;
}

}  // namespace

double IndicatorField::total() const {
  double s = 0.0;
  for (double e : eta) s += powp(e, p);
  return root_p(s, p);
}

double IndicatorField::osc_total() const {
  double s = 0.0;
  for (double e : osc) s += powp(e, p);
  return root_p(s, p);
}

double edge_jump(const FeFunction& u, std::size_t tri, int local) {
  const auto nb = u.mesh().neighbor(tri, local);
  if (!nb) return 0.0;
  const auto e = local_edge(u.mesh(), tri, local);
  const Point g0 = u.gradient(tri);
  const Point g1 = u.gradient(*nb);
  return (g0.x - g1.x) * e.normal.x + (g0.y - g1.y) * e.normal.y;
}

std::vector<double> oscillation(const ProblemSpec& problem,
                                const Triangulation& mesh, double p) {
  check_p(p);
  const auto h = meshsize(mesh);
  const auto& rule = triangle_rule_degree4();
  std::vector<double> out(mesh.num_triangles(), 0.0);
  std::array<double, 6> fv{};
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const double area = mesh.area(t);
    double mean = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      fv[q] = checked(problem.f(map_point(c, rule[q].bary)), "f");
      mean += rule[q].weight * fv[q];
    }
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) s += rule[q].weight * area * powp(fv[q] - mean, p);
    out[t] = h[t] * root_p(s, p);
  }
  return out;
}

namespace {

// Interior residual density of the heat problem at a quadrature point.
double heat_density(const ProblemSpec& problem, double uq, Point gu, Point x) {
  const Point b = problem.velocity(x);
  const double dk = checked(problem.dkappa(uq), "kappa'");
  return -dk * (gu.x * gu.x + gu.y * gu.y) + b.x * gu.x + b.y * gu.y -
         checked(problem.f(x), "f");
}

}  // namespace

IndicatorField indicator_semilinear(const FeFunction& u,
                                    const ProblemSpec& problem,
                                    const IndicatorOptions& opts) {
  if (!problem.has_reaction()) {
    throw Error(ErrorCode::kInvalidArgument,
                "indicator_semilinear needs a semilinear problem");
  }
  const double p = opts.p.value_or(problem.p);
  check_p(p);
  const auto& mesh = u.mesh();
  const auto h = meshsize(mesh);
  const auto& rule = triangle_rule_degree4();
  std::vector<double> etap(mesh.num_triangles(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (opts.interior) {
      const auto c = mesh.corners(t);
      const auto uv = u.element_values(t);
      const double area = mesh.area(t);
      double s = 0.0;
      for (const auto& q : rule) {
        const double uq = q.bary[0] * uv[0] + q.bary[1] * uv[1] + q.bary[2] * uv[2];
        const double r = checked(problem.reaction(uq) - problem.f(map_point(c, q.bary)),
                                 "residual density");
        s += q.weight * area * powp(r, p);
      }
      etap[t] += powp(h[t], p) * s;
    }
    if (opts.jumps) {
      for (int l = 0; l < 3; ++l) {
        if (!mesh.neighbor(t, l)) continue;
        const double len = local_edge(mesh, t, l).length;
        etap[t] += jump_weight(opts.jump_weight, len, h[t]) *
                   powp(edge_jump(u, t, l), p) * len;
      }
    }
  }
  IndicatorField out{u.space().mesh_ptr(), {}, {}, p};
  out.eta.resize(etap.size());
  for (std::size_t t = 0; t < etap.size(); ++t) out.eta[t] = root_p(etap[t], p);
  out.osc = oscillation(problem, mesh, p);
  return out;
}

IndicatorField indicator_heat(const FeFunction& u, const ProblemSpec& problem,
                              const IndicatorOptions& opts) {
  if (problem.kind != ProblemKind::kQuasilinearHeat) {
    throw Error(ErrorCode::kInvalidArgument, "indicator_heat needs a heat problem");
  }
  const double p = opts.p.value_or(problem.p);
  check_p(p);
  const auto& mesh = u.mesh();
  const auto h = meshsize(mesh);
  const auto& rule = triangle_rule_degree4();
  std::vector<double> etap(mesh.num_triangles(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (opts.interior) {
      const auto c = mesh.corners(t);
      const auto uv = u.element_values(t);
      const Point gu = u.gradient(t);
      const double area = mesh.area(t);
      double s = 0.0;
      for (const auto& q : rule) {
        const double uq = q.bary[0] * uv[0] + q.bary[1] * uv[1] + q.bary[2] * uv[2];
        s += q.weight * area * powp(heat_density(problem, uq, gu, map_point(c, q.bary)), p);
      }
      etap[t] += powp(h[t], p) * s;
    }
    if (opts.jumps) {
      for (int l = 0; l < 3; ++l) {
        if (!mesh.neighbor(t, l)) continue;
        const double len = local_edge(mesh, t, l).length;
        const double jump = edge_jump(u, t, l);
        const auto ev = edge_values(u, t, l);
        // u is continuous, so kappa(u) agrees on both sides of the edge
        double s = 0.0;
        for (const auto& q : edge_rule()) {
          const double us = (1.0 - q.s) * ev[0] + q.s * ev[1];
          s += q.weight * len * powp(checked(problem.kappa(us), "kappa") * jump, p);
        }
        etap[t] += jump_weight(opts.jump_weight, len, h[t]) * s;
      }
    }
  }
  IndicatorField out{u.space().mesh_ptr(), {}, {}, p};
  out.eta.resize(etap.size());
  for (std::size_t t = 0; t < etap.size(); ++t) out.eta[t] = root_p(etap[t], p);
  out.osc = oscillation_heat(u, problem, p, opts.jump_weight);
  return out;
}

IndicatorField compute_indicators(const FeFunction& u,
                                  const ProblemSpec& problem,
                                  const IndicatorOptions& opts) {
  return problem.kind == ProblemKind::kQuasilinearHeat
             ? indicator_heat(u, problem, opts)
             : indicator_semilinear(u, problem, opts);
}

std::vector<double> oscillation_heat(const FeFunction& u,
                                     const ProblemSpec& problem, double p,
                                     JumpWeight weight) {
  check_p(p);
  const auto& mesh = u.mesh();
  const auto h = meshsize(mesh);
  const auto& rule = triangle_rule_degree4();
  const auto& erule = edge_rule();
  std::vector<double> out(mesh.num_triangles(), 0.0);
  std::vector<double> vals(std::max(rule.size(), erule.size()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const auto uv = u.element_values(t);
    const Point gu = u.gradient(t);
    const double area = mesh.area(t);
    double mean = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& b = rule[q].bary;
      const double uq = b[0] * uv[0] + b[1] * uv[1] + b[2] * uv[2];
      vals[q] = heat_density(problem, uq, gu, map_point(c, b));
      mean += rule[q].weight * vals[q];
    }
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q)
      s += rule[q].weight * area * powp(vals[q] - mean, p);
    double total = powp(h[t], p) * s;

    for (int l = 0; l < 3; ++l) {
      if (!mesh.neighbor(t, l)) continue;
      const double len = local_edge(mesh, t, l).length;
      const double jump = edge_jump(u, t, l);
      const auto ev = edge_values(u, t, l);
      // L2 projection onto linears along the edge via Legendre moments
      double c0 = 0.0, c1 = 0.0;
      for (std::size_t q = 0; q < erule.size(); ++q) {
        const double us = (1.0 - erule[q].s) * ev[0] + erule[q].s * ev[1];
        vals[q] = checked(problem.kappa(us), "kappa") * jump;
        c0 += erule[q].weight * vals[q];
        c1 += erule[q].weight * vals[q] * (2.0 * erule[q].s - 1.0);
      }
      c1 *= 3.0;
      double se = 0.0;
      for (std::size_t q = 0; q < erule.size(); ++q) {
        const double proj = c0 + c1 * (2.0 * erule[q].s - 1.0);
        se += erule[q].weight * len * powp(vals[q] - proj, p);
      }
      total += jump_weight(weight, len, h[t]) * se;
    }
    out[t] = root_p(total, p);
  }
  return out;
}

double aggregate(std::span<const double> values, double p,
                 std::span<const std::size_t> subset) {
  check_p(p);
  double s = 0.0;
  for (std::size_t i : subset) {
    if (i >= values.size()) {
      throw Error(ErrorCode::kInvalidArgument, "aggregate: element index out of range");
    }
    s += powp(values[i], p);
  }
  return root_p(s, p);
}

double aggregate(const IndicatorField& field, std::span<const std::size_t> subset) {
  return aggregate(field.eta, field.p, subset);
}

double dual_residual_probe(const FeFunction& u, const ProblemSpec& problem,
                           int ref_levels) {
  if (ref_levels < 0) throw Error(ErrorCode::kInvalidArgument, "ref_levels < 0");
  // Each sweep roughly doubles the dof count; bail out before building.
  const double predicted = static_cast<double>(u.mesh().num_vertices()) *
                           std::pow(2.0, ref_levels);
  if (predicted > 4.0 * kProbeMaxDofs) {
    throw Error(ErrorCode::kMeshTooLarge, "probe reference space too large");
  }
  MeshPtr fine_mesh = u.space().mesh_ptr();
  if (ref_levels > 0) fine_mesh = refine_uniform(fine_mesh, ref_levels);
  const auto fine = make_space(fine_mesh, u.space().boundary_condition());
  if (fine->n_dofs() > kProbeMaxDofs) {
    throw Error(ErrorCode::kMeshTooLarge,
                "probe reference space has " + std::to_string(fine->n_dofs()) + " dofs");
  }
  if (fine->n_dofs() == 0) return 0.0;
  const FeFunction uf = ref_levels > 0 ? prolong(u, fine) : u;
  const auto r = nonlinear_residual(problem, uf);
  LinearConfig cfg;
  cfg.kind = LinearKind::kDirect;
  const auto z = linear_solve(assemble_laplacian(*fine), r, cfg);
  return std::sqrt(std::max(0.0, dot(r, z.x)));
}

}  // namespace afem
