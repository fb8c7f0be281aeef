#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "afem/fem.hpp"
#include "afem/problems.hpp"
#include "afem/sparse.hpp"

namespace afem {

enum class LinearKind { kCg, kDirect };

struct LinearConfig {
  LinearKind kind = LinearKind::kCg;
  double tol = 1e-12;  // relative l2 residual for CG
  int max_iters = 20000;
  bool jacobi = true;
};

struct LinearResult {
  std::vector<double> x;
  int iters = 0;
  double relative_residual = 0.0;
};

/// CG with optional Jacobi preconditioning, or a sparse factorization
/// (LDL^T for symmetric input, LU otherwise). CG raises Breakdown on
/// non-positive curvature and MaxIters when the budget is exhausted.
LinearResult linear_solve(const SparseMatrix& a, std::span<const double> rhs,
                          const LinearConfig& cfg = {});

enum class DampingKind { kNone, kArmijo };

struct Damping {
  DampingKind kind = DampingKind::kArmijo;
  double backtrack = 0.5;
  int max_backtracks = 30;
};

struct NewtonConfig {
  // Max-norm tolerance on free-dof residual entries; when unset,
  // 1e-10 * (1 + ||load||_inf).
  std::optional<double> tol_residual;
  int max_iters = 50;
  Damping damping;
  LinearConfig linear;
};

struct SolveOutcome {
  explicit SolveOutcome(FeFunction u0) : u(std::move(u0)) {}

  FeFunction u;
  int iters = 0;
  double final_residual = 0.0;  // max-norm
  double tol = 0.0;
  long linear_iters_total = 0;
  std::vector<double> residual_l2;   // per accepted iterate, incl. initial
  std::vector<double> residual_inf;
};

double default_newton_tol(const ProblemSpec& problem, const P1Space& space);

/// Damped Newton iteration for the discrete system <F(u), phi_i> = 0.
/// Nonsymmetric Jacobians are always solved with the direct solver.
SolveOutcome newton(const ProblemSpec& problem, const FeFunction& u0,
                    const NewtonConfig& cfg = {});

/// Pairs (i, j), i < j, of free dofs with a_ij = (grad phi_i, grad phi_j) > 1e-12.
std::vector<std::pair<std::size_t, std::size_t>> check_mesh_condition(
    const P1Space& space);

// Nodal range (including the zero boundary values) of the discrete solution
// of -Laplace(w) = f on the given mesh.
LinearPartBounds linear_part_bounds(const ProblemSpec& problem,
                                    const MeshPtr& mesh);

// Sign of f sampled at the degree-4 quadrature points of the mesh.
DataSign data_sign(const ProblemSpec& problem, const Triangulation& mesh);

}  // namespace afem
