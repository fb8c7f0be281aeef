#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "afem/estimate.hpp"
#include "afem/fem.hpp"
#include "afem/problems.hpp"

namespace afem {

// Lambda_k = (e_{k+1}^2 + E_k^2) / e_k^2; nullopt where e_k <= 1e-14.
std::vector<std::optional<double>> quasi_orthogonality_report(
    std::span<const double> errors, std::span<const double> increments);

// lambda = 1 - 2^(-ell/d)
double reduction_lambda(int ell, int dim = 2);

struct ReductionCheck {
  double eta2_coarse = 0.0;  // eta^2(v, T)
  double eta2_marked = 0.0;  // eta^2(v, M)
  double eta2_fine = 0.0;    // eta^2(v, T*)
  double lambda = 0.0;
  double margin = 0.0;           // eta2_fine - (eta2_coarse - lambda eta2_marked)
  double relative_margin = 0.0;  // margin / eta2_coarse (0 if eta2_coarse = 0)
  bool passed = false;           // margin <= 1e-10 eta2_coarse
};

/// Pure-jump options weighted by h_tau: the form in which the reduction
/// inequality holds exactly for every refinement.
IndicatorOptions reduction_indicator_options();

/// Evaluates both sides of the indicator reduction inequality for a fixed
/// v on T and its prolongation to T* = refine(T, M, ell).
ReductionCheck indicator_reduction_check(
    const FeFunction& v, const ProblemSpec& problem,
    std::span<const std::size_t> marked, const MeshPtr& mesh_star, int ell,
    const IndicatorOptions& opts = reduction_indicator_options());

struct ContractionReport {
  double gamma = 0.0;
  std::vector<double> q;      // Q_k = e_k^2 + gamma eta_k^2
  std::vector<double> alpha;  // sqrt(Q_{k+1} / Q_k)
  std::vector<bool> non_contracting;  // alpha_k >= 1
  // Geometric mean of alpha over steps first..last (Q_last / Q_first)^(1/(last-first)).
  double geometric_mean(std::size_t first, std::size_t last) const;
};

// gamma <= 0 selects e_0^2 / eta_0^2.
ContractionReport contraction_report(std::span<const double> errors,
                                     std::span<const double> eta,
                                     double gamma = 0.0);

// C1_k = e_k^2 / eta_k^2 (0 if both vanish, nullopt if only eta does).
std::vector<std::optional<double>> upper_bound_ratio(std::span<const double> errors,
                                                     std::span<const double> eta);
// max/min of the positive ratios with k >= k_min; 1 if fewer than two.
double ratio_spread(const std::vector<std::optional<double>>& ratios, std::size_t k_min);

bool estimator_convergence_check(std::span<const double> eta);

enum class InfSupNorm { kEnergy, kH1 };

/// Smallest singular value of G^{-1/2} B G^{-1/2}, B_ij = <F'(u) phi_j, phi_i>,
/// G the energy (A) or full H1 (A + M) Gram matrix. Dense; MeshTooLarge
/// above 2000 dofs.
double discrete_infsup(const FeFunction& linearization, const ProblemSpec& problem,
                       InfSupNorm norm = InfSupNorm::kEnergy);

inline constexpr std::size_t kInfSupMaxDofs = 2000;

struct LipschitzProbe {
  double ratio = 0.0;  // max over elements, 0 if every denominator vanishes
  std::optional<std::size_t> element;
};

// eta(D, tau) = h_tau sup_{[u-, u+]} |3 chi^2|
std::vector<double> data_indicator_cubic(const Triangulation& mesh,
                                         const AprioriBounds& bounds);

/// max_tau |eta(v,tau) - eta(w,tau)| / (eta(D,tau) |v - w|_{1,omega_tau})
/// after clamping the nodal values of v and w into the bounds.
LipschitzProbe local_lipschitz_probe(const FeFunction& v, const FeFunction& w,
                                     const ProblemSpec& problem,
                                     const AprioriBounds& bounds,
                                     const IndicatorOptions& opts = {});

struct DeltaWindow {
  double lambda = 0.0;
  double theta = 0.0;
  double upper = 0.0;  // delta must lie in (0, upper)
  double omega(double delta) const;  // 1 - (1 + delta)(1 - lambda theta^2)
};

DeltaWindow delta_window(double lambda, double theta);

// Admissible quasi-error weights (lower, upper); empty when lower >= upper.
struct GammaWindow {
  double lower = 0.0;
  double upper = 0.0;
  bool nonempty() const { return lower < upper; }
};
GammaWindow gamma_window(double big_lambda, double c1, double c2, double omega,
                         double beta = 0.5);

struct ElementRatioReport {
  double max = 0.0;
  double median = 0.0;
};

// eta(tau) / (||u||_{1,p,omega_tau} + ||f||_{p,omega_tau})
ElementRatioReport stability_report(const IndicatorField& field, const FeFunction& u,
                                    const ProblemSpec& problem);

// eta(tau) / (|u - u_h|_{1,omega_tau} + osc(omega_tau)); elements with a
// vanishing denominator are skipped.
ElementRatioReport efficiency_report(const IndicatorField& field, const FeFunction& u,
                                     const ExactSolution& exact);

}  // namespace afem
