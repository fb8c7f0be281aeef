#include "afem/mark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "afem/error.hpp"

namespace afem {

namespace {

void check_fraction(double v, const char* name) {
  if (!(v > 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must lie in (0,1]");
  }
}

double powp(double v, double p) { return p == 2.0 ? v * v : std::pow(std::abs(v), p); }

std::vector<std::size_t> greedy_order(std::span<const double> eta) {
  std::vector<std::size_t> order(eta.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eta[a] > eta[b]; });
  return order;
}

}  // namespace

void MarkConfig::validate() const {
  if (strategy == MarkStrategy::kDorfler) check_fraction(theta, "mark.theta");
  else check_fraction(mu, "mark.mu");
}

std::vector<std::size_t> dorfler(std::span<const double> eta, double p, double theta) {
  check_fraction(theta, "theta");
  const auto order = greedy_order(eta);
  // Sum in the same order used for the partial sums so theta = 1 closes
  // exactly once every nonzero entry is in.
  double total = 0.0;
  for (std::size_t i : order) total += powp(eta[i], p);
  const double target = powp(theta, p) * total;
  std::vector<std::size_t> out;
  double partial = 0.0;
  for (std::size_t i : order) {
    if (partial >= target) break;
    partial += powp(eta[i], p);
    out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> dorfler(const IndicatorField& field, double theta) {
  return dorfler(field.eta, field.p, theta);
}

std::vector<std::size_t> maximum_strategy(std::span<const double> eta, double mu) {
  check_fraction(mu, "mu");
  const double mx = eta.empty() ? 0.0 : *std::max_element(eta.begin(), eta.end());
  std::vector<std::size_t> out;
  if (!(mx > 0.0)) return out;
  for (std::size_t i = 0; i < eta.size(); ++i)
    if (eta[i] >= mu * mx) out.push_back(i);
  return out;
}

std::vector<std::size_t> maximum_strategy(const IndicatorField& field, double mu) {
  return maximum_strategy(field.eta, mu);
}

std::vector<std::size_t> mark(const IndicatorField& field, const MarkConfig& cfg) {
  cfg.validate();
  return cfg.strategy == MarkStrategy::kDorfler ? dorfler(field, cfg.theta)
                                                : maximum_strategy(field, cfg.mu);
}

MarkAxiomResult verify_mark_axiom(std::span<const double> eta,
                                  std::span<const std::size_t> marked) {
  std::vector<char> in(eta.size(), 0);
  double max_in = 0.0;
  for (std::size_t i : marked) {
    if (i >= eta.size()) throw Error(ErrorCode::kInvalidArgument, "marked index out of range");
    in[i] = 1;
    max_in = std::max(max_in, eta[i]);
  }
  MarkAxiomResult r;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (!in[i] && eta[i] > max_in && (!r.witness || eta[i] > eta[*r.witness])) {
      r.holds = false;
      r.witness = i;
    }
  }
  return r;
}

DorflerCertificate dorfler_certificate(std::span<const double> eta, double p,
                                       double theta,
                                       std::span<const std::size_t> marked) {
  const auto order = greedy_order(eta);
  double total = 0.0;
  for (std::size_t i : order) total += powp(eta[i], p);
  const double target = powp(theta, p) * total;
  double sum = 0.0, without_last = 0.0;
  for (std::size_t k = 0; k < marked.size(); ++k) {
    if (marked[k] >= eta.size()) throw Error(ErrorCode::kInvalidArgument, "marked index out of range");
    if (k + 1 == marked.size()) without_last = sum;
    sum += powp(eta[marked[k]], p);
  }
  DorflerCertificate c;
  c.margin = sum - target;
  c.satisfied = c.margin >= -1e-12;
  c.minimal = marked.empty() || without_last < target;
  return c;
}

}  // namespace afem
