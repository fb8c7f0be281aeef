#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "afem/mesh.hpp"
#include "afem/problems.hpp"
#include "afem/sparse.hpp"

namespace afem {

enum class BoundaryCondition {
  kDirichlet,  // homogeneous Dirichlet data on every boundary vertex
  kNone,       // all vertices carry a degree of freedom
};

/// Continuous piecewise-linear space over a triangulation. Dirichlet
/// vertices are eliminated; remaining vertices are numbered in vertex order.
class P1Space {
 public:
  explicit P1Space(MeshPtr mesh,
                   BoundaryCondition bc = BoundaryCondition::kDirichlet);

  const Triangulation& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  BoundaryCondition boundary_condition() const { return bc_; }
  std::size_t n_dofs() const { return vertex_of_dof_.size(); }

  // -1 for eliminated vertices
  std::ptrdiff_t dof_of_vertex(std::size_t v) const { return dof_of_vertex_[v]; }
  std::size_t vertex_of_dof(std::size_t d) const { return vertex_of_dof_[d]; }

 private:
  MeshPtr mesh_;
  BoundaryCondition bc_;
  std::vector<std::ptrdiff_t> dof_of_vertex_;
  std::vector<std::size_t> vertex_of_dof_;
};

using SpacePtr = std::shared_ptr<const P1Space>;

SpacePtr make_space(MeshPtr mesh,
                    BoundaryCondition bc = BoundaryCondition::kDirichlet);

/// Gradients of the three barycentric hat functions on an element.
struct ElementGeometry {
  double area = 0.0;
  std::array<Point, 3> grad{};
};

ElementGeometry element_geometry(const std::array<Point, 3>& corners);

using ElementMatrix = std::array<std::array<double, 3>, 3>;
ElementMatrix element_stiffness(const std::array<Point, 3>& corners);
ElementMatrix element_mass(double area);

class FeFunction {
 public:
  explicit FeFunction(SpacePtr space);
  FeFunction(SpacePtr space, std::vector<double> coeffs);

  const P1Space& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const Triangulation& mesh() const { return space_->mesh(); }

  std::vector<double>& coeffs() { return coeffs_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  double vertex_value(std::size_t v) const {
    const auto d = space_->dof_of_vertex(v);
    return d < 0 ? 0.0 : coeffs_[static_cast<std::size_t>(d)];
  }
  std::vector<double> nodal_values() const;
  std::array<double, 3> element_values(std::size_t tri) const;
  Point gradient(std::size_t tri) const;

  // Point evaluation (element search); throws InvalidArgument outside.
  double value(Point p) const;

 private:
  SpacePtr space_;
  std::vector<double> coeffs_;
};

FeFunction operator-(const FeFunction& a, const FeFunction& b);
FeFunction operator+(const FeFunction& a, const FeFunction& b);
FeFunction operator*(double s, const FeFunction& a);

// Nodal interpolant; eliminated vertices are ignored.
FeFunction interpolate(const SpacePtr& space, const ScalarField& g);

SparseMatrix assemble_laplacian(const P1Space& space);
SparseMatrix assemble_mass(const P1Space& space);

// (f, phi_i) with the degree-4 rule
std::vector<double> assemble_load(const P1Space& space, const ScalarField& f);

/// Entries <F(u), phi_i> over free dofs. Throws QuadratureDomainError when a
/// density is not finite at a quadrature point.
std::vector<double> nonlinear_residual(const ProblemSpec& problem,
                                       const FeFunction& u);

/// Entries <F'(u) phi_j, phi_i>; row i is the test function.
SparseMatrix jacobian(const ProblemSpec& problem, const FeFunction& u);

/// Exact representation of u on a refinement of its mesh.
FeFunction prolong(const FeFunction& u, const SpacePtr& fine);

double h1_seminorm(const FeFunction& u);
double l2_norm(const FeFunction& u);
double lp_norm(const FeFunction& u, double p);
// (||u||_p^p + ||grad u||_p^p)^(1/p) restricted to the listed elements
double w1p_norm(const FeFunction& u, double p,
                const std::vector<std::size_t>& elements);

// |u - u_h|_1 and ||u - u_h||_0 against a smooth exact solution.
double h1_seminorm_error(const FeFunction& u, const ExactSolution& exact);
double l2_error(const FeFunction& u, const ExactSolution& exact);
// Per-element |u - u_h|_{1,tau}^2
std::vector<double> element_h1_error_sq(const FeFunction& u,
                                        const ExactSolution& exact);

}  // namespace afem
