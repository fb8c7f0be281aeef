#include "afem/nlsolve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "afem/error.hpp"
#include "afem/quadrature.hpp"

namespace afem {

namespace {

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(a.nonzeros());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(a.col_idx()[k]),
                        a.values()[k]);
  Eigen::SparseMatrix<double> m(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

LinearResult direct_solve(const SparseMatrix& a, std::span<const double> rhs) {
  const auto m = to_eigen(a);
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(),
                                                        static_cast<int>(rhs.size()));
  Eigen::VectorXd x;
  if (a.asymmetry() <= 1e-12) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(m);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::kBreakdown, "LDL^T factorization failed");
    }
    const auto d = solver.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(d.cwiseAbs().minCoeff() > 1e-14 * dmax)) {
      throw Error(ErrorCode::kBreakdown, "numerically singular matrix");
    }
    x = solver.solve(b);
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.analyzePattern(m);
    solver.factorize(m);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::kBreakdown, "LU factorization failed");
    }
    x = solver.solve(b);
  }
  LinearResult out;
  out.x.assign(x.data(), x.data() + x.size());
  if (!std::all_of(out.x.begin(), out.x.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::kBreakdown, "singular system");
  }
  const auto ax = a * out.x;
  double r = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) r += (ax[i] - rhs[i]) * (ax[i] - rhs[i]);
  const double nb = norm2(rhs);
  out.relative_residual = nb > 0.0 ? std::sqrt(r) / nb : std::sqrt(r);
  if (out.relative_residual > 1e-6) {
    throw Error(ErrorCode::kBreakdown, "direct solve lost accuracy");
  }
  return out;
}

LinearResult cg_solve(const SparseMatrix& a, std::span<const double> b,
                      const LinearConfig& cfg) {
  const std::size_t n = b.size();
  LinearResult out;
  out.x.assign(n, 0.0);
  const double nb = norm2(b);
  if (nb == 0.0) return out;

  std::vector<double> inv_diag(n, 1.0);
  if (cfg.jacobi) {
    const auto d = a.diagonal();
    for (std::size_t i = 0; i < n; ++i) {
      if (!(d[i] > 0.0)) throw Error(ErrorCode::kBreakdown, "non-positive diagonal");
      inv_diag[i] = 1.0 / d[i];
    }
  }
  std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rho = dot(r, z);
  const double target = cfg.tol * nb;
  double rn = nb;
  int it = 0;
  while (rn > target) {
    if (it >= cfg.max_iters) {
      throw Error(ErrorCode::kMaxIters, "CG did not reach tolerance");
    }
    a.multiply(p, q);
    const double curv = dot(p, q);
    if (!(curv > 0.0)) {
      throw Error(ErrorCode::kBreakdown, "non-positive curvature in CG");
    }
    const double alpha = rho / curv;
    for (std::size_t i = 0; i < n; ++i) {
      out.x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rho_new = dot(r, z);
    const double beta = rho_new / rho;
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rn = norm2(r);
    ++it;
  }
  out.iters = it;
  out.relative_residual = rn / nb;
  return out;
}

}  // namespace

LinearResult linear_solve(const SparseMatrix& a, std::span<const double> rhs,
                          const LinearConfig& cfg) {
  if (a.rows() != a.cols() || a.rows() != rhs.size()) {
    throw Error(ErrorCode::kInvalidArgument, "linear_solve: dimension mismatch");
  }
  if (rhs.empty()) return {};
  if (cfg.kind == LinearKind::kDirect) return direct_solve(a, rhs);
  return cg_solve(a, rhs, cfg);
}

double default_newton_tol(const ProblemSpec& problem, const P1Space& space) {
  const auto load = assemble_load(space, problem.f);
  return 1e-10 * (1.0 + norm_inf(load));
}

SolveOutcome newton(const ProblemSpec& problem, const FeFunction& u0,
                    const NewtonConfig& cfg) {
  if (cfg.max_iters < 1) throw Error(ErrorCode::kInvalidArgument, "max_iters < 1");
  SolveOutcome out(u0);
  out.tol = cfg.tol_residual ? *cfg.tol_residual
                             : default_newton_tol(problem, u0.space());
  if (!(out.tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tol must be > 0");

  auto r = nonlinear_residual(problem, out.u);
  double r2 = norm2(r);
  out.residual_l2.push_back(r2);
  out.residual_inf.push_back(norm_inf(r));

  while (out.residual_inf.back() > out.tol) {
    if (out.iters >= cfg.max_iters) {
      throw Error(ErrorCode::kNoConvergence,
                  "Newton stopped at residual " + std::to_string(out.residual_inf.back()));
    }
    const auto jac = jacobian(problem, out.u);
    LinearConfig lin = cfg.linear;
    if (jac.asymmetry() > 1e-12) lin.kind = LinearKind::kDirect;
    std::vector<double> neg(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) neg[i] = -r[i];
    LinearResult step;
    try {
      step = linear_solve(jac, neg, lin);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kBreakdown) {
        throw Error(ErrorCode::kSingularJacobian, e.what());
      }
      throw;
    }
    out.linear_iters_total += step.iters;

    double s = 1.0;
    bool accepted = false;
    const int tries = cfg.damping.kind == DampingKind::kArmijo ? cfg.damping.max_backtracks + 1 : 1;
    for (int k = 0; k < tries; ++k) {
      auto c = out.u.coeffs();
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += s * step.x[i];
      FeFunction trial(out.u.space_ptr(), std::move(c));
      std::vector<double> rt;
      try {
        rt = nonlinear_residual(problem, trial);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kQuadratureDomainError ||
            cfg.damping.kind == DampingKind::kNone) {
          throw;
        }
        s *= cfg.damping.backtrack;
        continue;
      }
      const double rt2 = norm2(rt);
      if (cfg.damping.kind == DampingKind::kNone || rt2 <= (1.0 - 1e-4 * s) * r2 ||
          norm_inf(rt) <= out.tol) {
        out.u = std::move(trial);
        r = std::move(rt);
        r2 = rt2;
        accepted = true;
        break;
      }
      s *= cfg.damping.backtrack;
    }
    if (!accepted) {
      throw Error(ErrorCode::kDampingStall, "Armijo backtracking exhausted");
    }
    ++out.iters;
    out.residual_l2.push_back(r2);
    out.residual_inf.push_back(norm_inf(r));
  }
  out.final_residual = out.residual_inf.back();
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> check_mesh_condition(
    const P1Space& space) {
  const auto a = assemble_laplacian(space);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      const std::size_t j = a.col_idx()[k];
      if (j > i && a.values()[k] > 1e-12) out.emplace_back(i, j);
    }
  return out;
}

LinearPartBounds linear_part_bounds(const ProblemSpec& problem,
                                    const MeshPtr& mesh) {
  const auto space = make_space(mesh);
  const auto a = assemble_laplacian(*space);
  const auto load = assemble_load(*space, problem.f);
  LinearConfig cfg;
  cfg.kind = LinearKind::kDirect;
  const auto w = linear_solve(a, load, cfg);
  LinearPartBounds b;
  for (double v : w.x) {
    b.inf = std::min(b.inf, v);
    b.sup = std::max(b.sup, v);
  }
  return b;
}

DataSign data_sign(const ProblemSpec& problem, const Triangulation& mesh) {
  bool pos = false, neg = false;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    for (const auto& q : triangle_rule_degree4()) {
      const double v = problem.f(map_point(c, q.bary));
      pos = pos || v > 0.0;
      neg = neg || v < 0.0;
    }
  }
  if (pos && neg) return DataSign::kIndefinite;
  if (pos) return DataSign::kNonNegative;
  if (neg) return DataSign::kNonPositive;
  return DataSign::kZero;
}

}  // namespace afem
