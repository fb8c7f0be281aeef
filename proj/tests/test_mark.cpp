#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "afem/error.hpp"
#include "afem/mark.hpp"

using namespace afem;

namespace {

// Smallest cardinality of a subset reaching the Dörfler threshold, by
// enumeration of all subsets.
std::size_t min_dorfler_cardinality(const std::vector<double>& eta, double p, double theta) {
  double total = 0.0;
  for (double e : eta) total += std::pow(e, p);
  const double target = std::pow(theta, p) * total;
  std::size_t best = eta.size();
  for (unsigned mask = 0; mask < (1u << eta.size()); ++mask) {
    double s = 0.0;
    std::size_t card = 0;
    for (std::size_t i = 0; i < eta.size(); ++i)
      if (mask & (1u << i)) {
        s += std::pow(eta[i], p);
        ++card;
      }
    if (s >= target * (1 - 1e-14) && card < best) best = card;
  }
  return best;
}

}  // namespace

TEST_CASE("Dörfler examples") {
  CHECK(dorfler(std::vector<double>{0, 0, 0}, 2.0, 0.5).empty());
  const std::vector<double> eta{3, 2, 2, 1};
  CHECK(dorfler(eta, 2.0, 0.6) == std::vector<std::size_t>{0});
  CHECK(min_dorfler_cardinality(eta, 2.0, 0.6) == 1);
  const std::vector<double> with_zero{0.5, 0, 2, 0.1};
  auto all = dorfler(with_zero, 2.0, 1.0);
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<std::size_t>{0, 2, 3});
  // ties go to the lower index
  CHECK(dorfler(std::vector<double>{1, 2, 2, 2}, 2.0, 0.3) == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(dorfler(eta, 2.0, 0.0), Error);
  CHECK_THROWS_AS(dorfler(eta, 2.0, 1.5), Error);
}

TEST_CASE("Dörfler is minimal and certified on random fields") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 12;
    std::vector<double> eta(n);
    for (auto& e : eta) e = std::pow(d(rng), 3);
    const double theta = 0.05 + 0.95 * d(rng);
    const double p = trial % 2 ? 2.0 : 3.0;
    const auto m = dorfler(eta, p, theta);
    CHECK(m.size() == min_dorfler_cardinality(eta, p, theta));
    const auto cert = dorfler_certificate(eta, p, theta, m);
    CHECK(cert.satisfied);
    CHECK(cert.minimal);
    CHECK(cert.margin >= -1e-12);
    CHECK(verify_mark_axiom(eta, m).holds);
  }
}

TEST_CASE("maximum strategy") {
  const std::vector<double> eta{3, 2, 2, 1};
  CHECK(maximum_strategy(eta, 0.5) == std::vector<std::size_t>{0, 1, 2});
  CHECK(maximum_strategy(eta, 1.0) == std::vector<std::size_t>{0});
  CHECK(maximum_strategy(std::vector<double>{2, 2, 2}, 0.7) == std::vector<std::size_t>{0, 1, 2});
  CHECK(maximum_strategy(std::vector<double>{0, 0}, 0.7).empty());
}

TEST_CASE("marking axiom") {
  const std::vector<double> eta{3, 1};
  const auto bad = verify_mark_axiom(eta, std::vector<std::size_t>{1});
  CHECK_FALSE(bad.holds);
  REQUIRE(bad.witness.has_value());
  CHECK(*bad.witness == 0);
  CHECK(verify_mark_axiom(std::vector<double>{0, 0}, std::vector<std::size_t>{}).holds);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> e(1 + trial % 30);
    for (auto& x : e) x = d(rng);
    CHECK(verify_mark_axiom(e, dorfler(e, 2.0, d(rng) * 0.99 + 0.01)).holds);
    CHECK(verify_mark_axiom(e, maximum_strategy(e, d(rng) * 0.99 + 0.01)).holds);
  }
}

TEST_CASE("certificate detects non-minimal and insufficient sets") {
  const std::vector<double> eta{3, 2, 2, 1};
  const auto extra = dorfler_certificate(eta, 2.0, 0.6, std::vector<std::size_t>{0, 1});
  CHECK(extra.satisfied);
  CHECK_FALSE(extra.minimal);
  const auto shortfall = dorfler_certificate(eta, 2.0, 0.9, std::vector<std::size_t>{0});
  CHECK_FALSE(shortfall.satisfied);
}

TEST_CASE("mark dispatch") {
  IndicatorField f;
  f.eta = {3, 2, 2, 1};
  MarkConfig cfg;
  cfg.theta = 0.6;
  CHECK(mark(f, cfg) == std::vector<std::size_t>{0});
  cfg.strategy = MarkStrategy::kMaximum;
  cfg.mu = 0.5;
  CHECK(mark(f, cfg).size() == 3);
  cfg.mu = 0.0;
  CHECK_THROWS_AS(mark(f, cfg), Error);
}
