#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "afem/fem.hpp"
#include "afem/problems.hpp"

namespace afem {

// Weight in front of the edge jump term.
enum class JumpWeight {
  kEdgeLength,   // h_sigma = |sigma|
  kElementSize,  // h_tau of the element receiving the contribution
};

struct IndicatorOptions {
  std::optional<double> p;  // defaults to problem.p
  JumpWeight jump_weight = JumpWeight::kEdgeLength;
  bool interior = true;
  bool jumps = true;
};

struct IndicatorField {
  MeshPtr mesh;
  std::vector<double> eta;
  std::vector<double> osc;
  double p = 2.0;

  double total() const;
  double osc_total() const;
};

/// eta(tau)^p = h_tau^p ||u^m - f||^p_{p,tau} + sum_sigma h_sigma ||[grad u . n]||^p_{p,sigma}
/// over interior edges of tau. osc is filled from oscillation().
IndicatorField indicator_semilinear(const FeFunction& u,
                                    const ProblemSpec& problem,
                                    const IndicatorOptions& opts = {});

/// Heat-problem indicator: the interior density is
/// -kappa'(u)|grad u|^2 + b . grad u - f, the jump is [kappa(u) grad u . n].
IndicatorField indicator_heat(const FeFunction& u, const ProblemSpec& problem,
                              const IndicatorOptions& opts = {});

// Dispatches on problem.kind.
IndicatorField compute_indicators(const FeFunction& u,
                                  const ProblemSpec& problem,
                                  const IndicatorOptions& opts = {});

// h_tau ||f - pi_0 f||_{p,tau}; pi_0 is the element mean (exact for p = 2).
std::vector<double> oscillation(const ProblemSpec& problem,
                                const Triangulation& mesh, double p);

// Heat variant: (I - pi_0) of the interior residual plus the (I - pi_1)
// edge term, pi_1 realized as the L2 projection onto linears on each edge.
std::vector<double> oscillation_heat(const FeFunction& u,
                                     const ProblemSpec& problem, double p,
                                     JumpWeight weight = JumpWeight::kEdgeLength);

// (sum_{tau in subset} eta(tau)^p)^(1/p)
double aggregate(const IndicatorField& field, std::span<const std::size_t> subset);
double aggregate(std::span<const double> values, double p,
                 std::span<const std::size_t> subset);

// (grad u|_tri - grad u|_neighbor) . n, n the outward normal of local edge
// `local` of tri; zero on the boundary.
double edge_jump(const FeFunction& u, std::size_t tri, int local);

/// Energy norm of the Riesz representative of the residual functional on
/// the space obtained by `ref_levels` uniform refinement sweeps. Throws
/// MeshTooLarge above 5000 reference dofs.
double dual_residual_probe(const FeFunction& u, const ProblemSpec& problem,
                           int ref_levels);

inline constexpr std::size_t kProbeMaxDofs = 5000;

}  // namespace afem
