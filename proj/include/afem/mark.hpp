#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "afem/estimate.hpp"

namespace afem {

enum class MarkStrategy { kDorfler, kMaximum };

struct MarkConfig {
  MarkStrategy strategy = MarkStrategy::kDorfler;
  double theta = 0.5;
  double mu = 0.5;

  void validate() const;  // InvalidArgument unless the parameter is in (0,1]
};

/// Greedy Dörfler marking: elements in descending eta order (lower index
/// first on ties) until eta(M)^p >= theta^p eta(T)^p. The result keeps that
/// order, so the last entry is the one whose removal breaks the inequality.
std::vector<std::size_t> dorfler(std::span<const double> eta, double p, double theta);
std::vector<std::size_t> dorfler(const IndicatorField& field, double theta);

// {tau : eta(tau) >= mu max eta}, ascending index; empty if all eta vanish.
std::vector<std::size_t> maximum_strategy(std::span<const double> eta, double mu);
std::vector<std::size_t> maximum_strategy(const IndicatorField& field, double mu);

std::vector<std::size_t> mark(const IndicatorField& field, const MarkConfig& cfg);

struct MarkAxiomResult {
  bool holds = true;
  std::optional<std::size_t> witness;  // unmarked element above max over M
};

// max_{tau not in M} eta(tau) <= max_{sigma in M} eta(sigma), max over {} = 0.
MarkAxiomResult verify_mark_axiom(std::span<const double> eta,
                                  std::span<const std::size_t> marked);

struct DorflerCertificate {
  double margin = 0.0;  // eta(M)^p - theta^p eta(T)^p
  bool satisfied = false;  // margin >= -1e-12
  bool minimal = false;    // dropping the last element breaks the inequality
};

DorflerCertificate dorfler_certificate(std::span<const double> eta, double p,
                                       double theta,
                                       std::span<const std::size_t> marked);

}  // namespace afem
