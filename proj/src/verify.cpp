#include "afem/verify.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "afem/error.hpp"
#include "afem/quadrature.hpp"

namespace afem {

namespace {

double sum_sq(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  const double hi = *mid;
  return 0.5 * (hi + *std::max_element(v.begin(), mid));
}

Eigen::MatrixXd dense(const SparseMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
      d(static_cast<int>(i), static_cast<int>(a.col_idx()[k])) += a.values()[k];
  return d;
}

}  // namespace

std::vector<std::optional<double>> quasi_orthogonality_report(
    std::span<const double> errors, std::span<const double> increments) {
  std::vector<std::optional<double>> out;
  if (errors.size() < 2) return out;
  const std::size_t n = std::min(errors.size() - 1, increments.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (errors[k] <= 1e-14) {
      out.emplace_back();
      continue;
    }
    out.emplace_back((errors[k + 1] * errors[k + 1] + increments[k] * increments[k]) /
                     (errors[k] * errors[k]));
  }
  return out;
}

double reduction_lambda(int ell, int dim) {
  if (ell < 1 || dim < 1) throw Error(ErrorCode::kInvalidArgument, "ell and d must be >= 1");
  return 1.0 - std::pow(2.0, -static_cast<double>(ell) / dim);
}

IndicatorOptions reduction_indicator_options() {
  IndicatorOptions o;
  o.p = 2.0;
  o.interior = false;
  o.jumps = true;
  o.jump_weight = JumpWeight::kElementSize;
  return o;
}

ReductionCheck indicator_reduction_check(const FeFunction& v, const ProblemSpec& problem,
                                         std::span<const std::size_t> marked,
                                         const MeshPtr& mesh_star, int ell,
                                         const IndicatorOptions& opts) {
  IndicatorOptions o = opts;
  o.p = 2.0;
  const auto fine = make_space(mesh_star, v.space().boundary_condition());
  const auto v_star = prolong(v, fine);  // NotARefinement on mismatch
  const auto coarse = compute_indicators(v, problem, o);
  const auto refined = compute_indicators(v_star, problem, o);
  ReductionCheck r;
  r.lambda = reduction_lambda(ell);
  r.eta2_coarse = sum_sq(coarse.eta);
  r.eta2_fine = sum_sq(refined.eta);
  const double em = aggregate(coarse, marked);
  r.eta2_marked = em * em;
  r.margin = r.eta2_fine - (r.eta2_coarse - r.lambda * r.eta2_marked);
  r.relative_margin = r.eta2_coarse > 0.0 ? r.margin / r.eta2_coarse : 0.0;
  r.passed = r.margin <= 1e-10 * r.eta2_coarse;
  return r;
}

double ContractionReport::geometric_mean(std::size_t first, std::size_t last) const {
  if (last <= first || last >= q.size()) {
    throw Error(ErrorCode::kInvalidArgument, "geometric_mean: bad step range");
  }
  return std::pow(q[last] / q[first], 0.5 / static_cast<double>(last - first));
}

ContractionReport contraction_report(std::span<const double> errors,
                                     std::span<const double> eta, double gamma) {
  const std::size_t n = std::min(errors.size(), eta.size());
  ContractionReport r;
  if (n == 0) return r;
  r.gamma = gamma;
  if (!(gamma > 0.0)) {
    r.gamma = eta[0] > 0.0 ? errors[0] * errors[0] / (eta[0] * eta[0]) : 1.0;
  }
  for (std::size_t k = 0; k < n; ++k)
    r.q.push_back(errors[k] * errors[k] + r.gamma * eta[k] * eta[k]);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = r.q[k] > 0.0 ? std::sqrt(r.q[k + 1] / r.q[k]) : 0.0;
    r.alpha.push_back(a);
    r.non_contracting.push_back(a >= 1.0);
  }
  return r;
}

std::vector<std::optional<double>> upper_bound_ratio(std::span<const double> errors,
                                                     std::span<const double> eta) {
  std::vector<std::optional<double>> out;
  for (std::size_t k = 0; k < std::min(errors.size(), eta.size()); ++k) {
    if (eta[k] * eta[k] > 1e-14) out.emplace_back(errors[k] * errors[k] / (eta[k] * eta[k]));
    else if (errors[k] == 0.0) out.emplace_back(0.0);
    else out.emplace_back();
  }
  return out;
}

double ratio_spread(const std::vector<std::optional<double>>& ratios, std::size_t k_min) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::size_t count = 0;
  for (std::size_t k = k_min; k < ratios.size(); ++k) {
    if (!ratios[k] || !(*ratios[k] > 0.0)) continue;
    lo = std::min(lo, *ratios[k]);
    hi = std::max(hi, *ratios[k]);
    ++count;
  }
  return count < 2 ? 1.0 : hi / lo;
}

bool estimator_convergence_check(std::span<const double> eta) {
  if (eta.empty()) return false;
  if (eta.front() == 0.0) return true;
  const std::size_t n = eta.size();
  if (n < 4) return false;
  if (!(eta[n - 1] <= 0.5 * eta[2])) return false;
  return eta[n - 3] >= eta[n - 2] && eta[n - 2] >= eta[n - 1];
}

double discrete_infsup(const FeFunction& linearization, const ProblemSpec& problem,
                       InfSupNorm norm) {
  const auto& space = linearization.space();
  const std::size_t n = space.n_dofs();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "inf-sup of an empty space");
  if (n > kInfSupMaxDofs) {
    throw Error(ErrorCode::kMeshTooLarge,
                "discrete_infsup is dense; " + std::to_string(n) + " dofs exceed the cap");
  }
  const auto jac = jacobian(problem, linearization);
  const Eigen::MatrixXd b = dense(jac);
  Eigen::MatrixXd g = dense(assemble_laplacian(space));
  if (norm == InfSupNorm::kH1) g += dense(assemble_mass(space));
  const Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::kBreakdown, "Gram matrix not SPD");
  // C = L^{-1} B L^{-T}
  const Eigen::MatrixXd lb = llt.matrixL().solve(b);
  const Eigen::MatrixXd c = llt.matrixL().solve(lb.transpose()).transpose();
  if (jac.asymmetry() <= 1e-12) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (c + c.transpose()),
                                                            Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().minCoeff();
  }
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(c);
  return svd.singularValues().minCoeff();
}

std::vector<double> data_indicator_cubic(const Triangulation& mesh,
                                         const AprioriBounds& bounds) {
  auto h = meshsize(mesh);
  const double k = bounds.cubic_lipschitz();
  for (auto& x : h) x *= k;
  return h;
}

LipschitzProbe local_lipschitz_probe(const FeFunction& v, const FeFunction& w,
                                     const ProblemSpec& problem,
                                     const AprioriBounds& bounds,
                                     const IndicatorOptions& opts) {
  if (v.space_ptr() != w.space_ptr()) {
    throw Error(ErrorCode::kInvalidArgument, "probe needs functions on one space");
  }
  auto clamp_fn = [&](const FeFunction& f) {
    auto c = f.coeffs();
    for (auto& x : c) x = bounds.clamp(x);
    return FeFunction(f.space_ptr(), std::move(c));
  };
  const auto vc = clamp_fn(v), wc = clamp_fn(w);
  const auto ev = compute_indicators(vc, problem, opts);
  const auto ew = compute_indicators(wc, problem, opts);
  const auto& mesh = v.mesh();
  const auto eta_d = data_indicator_cubic(mesh, bounds);
  const auto diff = vc - wc;
  std::vector<double> grad_sq(mesh.num_triangles());
  for (std::size_t t = 0; t < grad_sq.size(); ++t) {
    const Point g = diff.gradient(t);
    grad_sq[t] = mesh.area(t) * (g.x * g.x + g.y * g.y);
  }
  LipschitzProbe out;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    double semi = 0.0;
    for (std::size_t s : patch(mesh, t)) semi += grad_sq[s];
    const double den = eta_d[t] * std::sqrt(semi);
    if (!(den > 0.0)) continue;
    const double ratio = std::abs(ev.eta[t] - ew.eta[t]) / den;
    if (!out.element || ratio > out.ratio) {
      out.ratio = ratio;
      out.element = t;
    }
  }
  return out;
}

double DeltaWindow::omega(double delta) const {
  return 1.0 - (1.0 + delta) * (1.0 - lambda * theta * theta);
}

DeltaWindow delta_window(double lambda, double theta) {
  DeltaWindow w{lambda, theta, 0.0};
  const double lt = lambda * theta * theta;
  w.upper = lt < 1.0 ? lt / (1.0 - lt) : std::numeric_limits<double>::infinity();
  return w;
}

GammaWindow gamma_window(double big_lambda, double c1, double c2, double omega,
                         double beta) {
  GammaWindow g;
  g.lower = (big_lambda - 1.0) * c1 / (beta * omega);
  g.upper = std::min(c2 > 0.0 ? 1.0 / c2 : std::numeric_limits<double>::infinity(),
                     big_lambda * c1 / (beta * omega));
  return g;
}

ElementRatioReport stability_report(const IndicatorField& field, const FeFunction& u,
                                    const ProblemSpec& problem) {
  const auto& mesh = u.mesh();
  const double p = field.p;
  const auto& rule = triangle_rule_degree4();
  std::vector<double> fp(mesh.num_triangles(), 0.0);
  for (std::size_t t = 0; t < fp.size(); ++t) {
    const auto c = mesh.corners(t);
    for (const auto& q : rule)
      fp[t] += q.weight * mesh.area(t) * std::pow(std::abs(problem.f(map_point(c, q.bary))), p);
  }
  std::vector<double> ratios;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto omega = patch(mesh, t);
    double fsum = 0.0;
    for (std::size_t s : omega) fsum += fp[s];
    const double den = w1p_norm(u, p, omega) + std::pow(fsum, 1.0 / p);
    if (den > 0.0) ratios.push_back(field.eta[t] / den);
  }
  ElementRatioReport r;
  if (!ratios.empty()) r.max = *std::max_element(ratios.begin(), ratios.end());
  r.median = median_of(ratios);
  return r;
}

ElementRatioReport efficiency_report(const IndicatorField& field, const FeFunction& u,
                                     const ExactSolution& exact) {
  const auto& mesh = u.mesh();
  const auto err = element_h1_error_sq(u, exact);
  const double p = field.p;
  std::vector<double> ratios;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    double e2 = 0.0, op = 0.0;
    for (std::size_t s : patch(mesh, t)) {
      e2 += err[s];
      op += std::pow(field.osc[s], p);
    }
    const double den = std::sqrt(e2) + std::pow(op, 1.0 / p);
    if (den > 0.0) ratios.push_back(field.eta[t] / den);
  }
  ElementRatioReport r;
  if (!ratios.empty()) r.max = *std::max_element(ratios.begin(), ratios.end());
  r.median = median_of(ratios);
  return r;
}

}  // namespace afem
