#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "dyadic/mixed_norm.hpp"
#include "dyadic/tree.hpp"

using namespace dyadic;

namespace {

Measure unit_measure(const Tree& t, std::vector<double> leaves) {
  return make_measure(t, std::move(leaves));
}

std::vector<double> random_family(const Tree& t, std::mt19937_64& rng, double zero_fraction = 0.0) {
  std::lognormal_distribution<double> ln(0.0, 0.7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> fam(t.node_count, 0.0);
  for (auto& v : fam)
    if (u(rng) >= zero_fraction) v = ln(rng);
  return fam;
}

}  // namespace

TEST_CASE("finite/finite regime matches hand computations") {
  Tree t = make_tree(2, 1);
  Measure om = unit_measure(t, {1.0, 1.0});
  std::vector<double> a(t.node_count, 0.0);
  a[0] = 1.0;
  CHECK(mixed_norm(t, om, a, {2.0, 1.0}).value == Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));

  a[1] = 3.0;  // left leaf
  // leaf bases 4 and 1, integrand (base)^{r/s} with r = 2, s = 1
  CHECK(mixed_norm(t, om, a, {2.0, 1.0}).value == Catch::Approx(std::sqrt(17.0)).epsilon(1e-14));
}

TEST_CASE("carleson regime on a single cube") {
  Tree t = make_tree(2, 0);
  Measure mu = unit_measure(t, {5.0});
  std::vector<double> a = {1.0};
  auto nv = mixed_norm(t, mu, a, {kInf, 3.0});
  CHECK(nv.value == Catch::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(nv.zero_base);
}

TEST_CASE("envelope regime integrates the running maximum") {
  Tree t = make_tree(2, 1);
  Measure om = unit_measure(t, {1.0, 1.0});
  std::vector<double> a(t.node_count, 0.0);
  a[0] = 2.0;
  a[1] = 1.0;
  CHECK(mixed_norm(t, om, a, {1.0, kInf}).value == Catch::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("double supremum regime") {
  Tree t = make_tree(3, 2);
  Measure mu = unit_measure(t, std::vector<double>(t.leaf_count, 1.0));
  std::vector<double> a(t.node_count, 0.0);
  a[4] = 7.5;
  a[9] = 2.0;
  CHECK(mixed_norm(t, mu, a, {kInf, kInf}).value == Catch::Approx(7.5));
}

TEST_CASE("negative inner exponent is evaluated literally") {
  Tree t = make_tree(2, 1);
  Measure om = unit_measure(t, {1.0, 1.0});
  std::vector<double> a = {2.0, 1.0, 4.0};
  // s = -1: leaf bases 1/2 + 1 and 1/2 + 1/4, integrand base^{-1}
  double expect = std::pow(1.0 / 1.5 + 1.0 / 0.75, 1.0);
  auto nv = mixed_norm(t, om, a, {1.0, -1.0});
  CHECK(nv.value == Catch::Approx(expect).epsilon(1e-14));
  CHECK_FALSE(nv.zero_base);
}

TEST_CASE("zero value under charged mass flags and returns infinity") {
  Tree t = make_tree(2, 1);
  std::vector<double> a = {1.0, 0.0, 1.0};

  auto flagged = mixed_norm(t, unit_measure(t, {1.0, 1.0}), a, {1.0, -2.0});
  CHECK(flagged.zero_base);
  CHECK(std::isinf(flagged.value));

  // the zero only sits over massless leaves: no flag
  auto clean = mixed_norm(t, unit_measure(t, {0.0, 1.0}), a, {1.0, -2.0});
  CHECK_FALSE(clean.zero_base);
  CHECK(clean.value == Catch::Approx(std::pow(2.0, -1.0 / 2.0)).epsilon(1e-14));

  auto carleson = mixed_norm(t, unit_measure(t, {1.0, 1.0}), a, {kInf, -2.0});
  CHECK(carleson.zero_base);
  CHECK(std::isinf(carleson.value));
}

TEST_CASE("carleson supremum skips massless cubes") {
  Tree t = make_tree(2, 1);
  Measure mu = unit_measure(t, {1.0, 0.0});
  std::vector<double> a = {1.0, 1.0, 1000.0};
  // right leaf carries no mass, so the huge value never enters
  double root_base = (1.0 * 1.0 + 1.0 * 1.0) / 1.0;  // (a_root + a_left) over mu(root) = 1
  double val = mixed_norm(t, mu, a, {kInf, 1.0}).value;
  CHECK(val == Catch::Approx(root_base));
}

TEST_CASE("norm exponent validation") {
  Tree t = make_tree(2, 0);
  Measure mu = unit_measure(t, {1.0});
  std::vector<double> a = {1.0};
  CHECK_THROWS_AS(mixed_norm(t, mu, a, {0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(mixed_norm(t, mu, a, {-1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(mixed_norm(t, mu, a, {1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(mixed_norm(t, mu, a, {1.0, -kInf}), std::invalid_argument);
}

TEST_CASE("power scaling identity on a single cube") {
  Tree t = make_tree(2, 0);
  Measure om = unit_measure(t, {1.0});
  std::vector<double> a = {4.0};
  auto check = power_scaling_check(t, om, a, {1.0, 1.0}, 0.5);
  CHECK(check.lhs == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(check.rhs == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(check.ratio == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(check.requires_outer_power);
}

TEST_CASE("power scaling identity holds across regimes") {
  std::mt19937_64 rng(2024);
  Tree t = make_tree(2, 3);
  std::lognormal_distribution<double> ln(0.0, 0.8);
  std::vector<double> leaves(t.leaf_count);
  for (auto& v : leaves) v = ln(rng);
  Measure mu = make_measure(t, leaves);
  std::vector<double> fam = random_family(t, rng);

  const NormExponents grid[] = {{2.0, 1.0}, {1.5, 3.0}, {1.0, kInf}, {kInf, 2.0},
                                {kInf, kInf}, {0.5, 0.75}};
  const double powers[] = {0.5, 2.0, 1.5};
  for (auto rs : grid) {
    for (double tt : powers) {
      auto check = power_scaling_check(t, mu, fam, rs, tt);
      INFO("r=" << rs.outer << " s=" << rs.inner << " t=" << tt);
      CHECK(std::abs(check.ratio - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("dual pairing on a single cube is exact") {
  Tree t = make_tree(2, 0);
  Measure mu = unit_measure(t, {1.0});
  std::vector<double> a = {3.0};
  auto dual = mixed_norm_dual(t, mu, a, {2.0, 2.0});
  CHECK(dual.value == Catch::Approx(3.0).epsilon(1e-10));
  CHECK(dual.witness[0] == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("dual pairing respects the Hoelder bound") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 4; ++trial) {
    Tree t = make_tree(2, 2);
    std::lognormal_distribution<double> ln(0.0, 0.6);
    std::vector<double> leaves(t.leaf_count);
    for (auto& v : leaves) v = ln(rng);
    Measure mu = make_measure(t, leaves);
    std::vector<double> fam = random_family(t, rng, 0.2);

    const NormExponents grid[] = {{2.0, 2.0}, {3.0, 1.5}, {1.5, kInf}, {1.0, 2.0}};
    for (auto rs : grid) {
      double norm = mixed_norm(t, mu, fam, rs).value;
      auto dual = mixed_norm_dual(t, mu, fam, rs);
      INFO("r=" << rs.outer << " s=" << rs.inner << " trial=" << trial);
      CHECK(dual.value <= norm * (1.0 + 1e-9));
      if (norm > 0.0) CHECK(dual.value >= norm / 4.0);
    }

    // Carleson-side pairing stays comparable on small trees.
    double cnorm = mixed_norm(t, mu, fam, {kInf, 2.0}).value;
    auto cdual = mixed_norm_dual(t, mu, fam, {kInf, 2.0});
    if (cnorm > 0.0) {
      CHECK(cdual.value > 0.0);
      CHECK(cdual.value <= 10.0 * cnorm);
    }
  }
}

TEST_CASE("proportional factorization is exact") {
  std::mt19937_64 rng(5);
  Tree t = make_tree(2, 3);
  std::lognormal_distribution<double> ln(0.0, 0.9);
  std::vector<double> leaves(t.leaf_count);
  for (auto& v : leaves) v = ln(rng);
  Measure mu = make_measure(t, leaves);
  std::vector<double> c = random_family(t, rng, 0.25);

  auto res = mixed_norm_factorize(t, mu, c, {1.0, 2.0}, {2.0, 4.0}, {2.0, 4.0});
  CHECK(res.constant == Catch::Approx(1.0).epsilon(1e-10));
  CHECK_FALSE(res.used_descent);
  for (std::size_t n = 0; n < c.size(); ++n) {
    double prod = res.first[n] * res.second[n];
    CHECK(std::abs(prod - c[n]) <= 1e-12 * std::max(1.0, c[n]));
  }
}

TEST_CASE("pure supremum-side factorizations are exact") {
  std::mt19937_64 rng(6);
  Tree t = make_tree(3, 2);
  std::lognormal_distribution<double> ln(0.0, 0.5);
  std::vector<double> leaves(t.leaf_count);
  for (auto& v : leaves) v = ln(rng);
  Measure mu = make_measure(t, leaves);
  std::vector<double> c = random_family(t, rng);

  auto carleson = mixed_norm_factorize(t, mu, c, {kInf, 3.0}, {kInf, 6.0}, {kInf, 6.0});
  CHECK(carleson.constant == Catch::Approx(1.0).epsilon(1e-10));

  auto envelope = mixed_norm_factorize(t, mu, c, {2.0, kInf}, {3.0, kInf}, {6.0, kInf});
  CHECK(envelope.constant == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("core split keeps a moderate constant") {
  std::mt19937_64 rng(7);
  Tree t = make_tree(2, 3);
  std::lognormal_distribution<double> ln(0.0, 1.0);
  std::vector<double> leaves(t.leaf_count);
  for (auto& v : leaves) v = ln(rng);
  Measure mu = make_measure(t, leaves);
  std::vector<double> c = random_family(t, rng, 0.2);

  // split (1, 3/2) = (3/2, 3/2) x (3, inf)
  auto res = mixed_norm_factorize(t, mu, c, {1.0, 1.5}, {1.5, 1.5}, {3.0, kInf});
  CHECK(res.constant <= 10.0);
  CHECK(res.first_norm * res.second_norm <=
        res.constant * res.base_norm * (1.0 + 1e-12));
  for (std::size_t n = 0; n < c.size(); ++n) {
    double prod = res.first[n] * res.second[n];
    CHECK(std::abs(prod - c[n]) <= 1e-12 * std::max(1.0, c[n]));
  }
}

TEST_CASE("descent fallback engages below a forced threshold") {
  std::mt19937_64 rng(8);
  Tree t = make_tree(2, 2);
  Measure mu = make_measure(t, {1.0, 1.0, 1.0, 1.0});
  std::vector<double> c = random_family(t, rng);
  FactorizeOptions opts;
  opts.fallback_threshold = 1e-6;  // force the descent path
  auto res = mixed_norm_factorize(t, mu, c, {1.0, 1.5}, {1.5, 1.5}, {3.0, kInf}, opts);
  CHECK(res.used_descent);
  auto plain = mixed_norm_factorize(t, mu, c, {1.0, 1.5}, {1.5, 1.5}, {3.0, kInf});
  CHECK(res.constant <= plain.constant * (1.0 + 1e-9));
  for (std::size_t n = 0; n < c.size(); ++n) {
    double prod = res.first[n] * res.second[n];
    CHECK(std::abs(prod - c[n]) <= 1e-12 * std::max(1.0, c[n]));
  }
}

TEST_CASE("factorization rejects inconsistent exponent splits") {
  Tree t = make_tree(2, 1);
  Measure mu = unit_measure(t, {1.0, 1.0});
  std::vector<double> c(t.node_count, 1.0);
  CHECK_THROWS_AS(mixed_norm_factorize(t, mu, c, {1.0, 1.0}, {2.0, 2.0}, {3.0, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("summation by parts expressions") {
  Tree t = make_tree(2, 1);
  Measure om = unit_measure(t, {1.0, 1.0});
  std::vector<double> a = {1.0, 1.0, 0.0};

  auto r2 = summation_by_parts_ratio(t, om, a, 2.0);
  REQUIRE(r2.values.size() == 3);
  CHECK(r2.values[0] == Catch::Approx(5.0));
  CHECK(r2.values[1] == Catch::Approx(4.0));
  CHECK(r2.values[2] == Catch::Approx(4.0));
  CHECK(r2.ratio_high == Catch::Approx(1.25));

  auto r1 = summation_by_parts_ratio(t, om, a, 1.0);
  CHECK(r1.values[0] == Catch::Approx(r1.values[1]).epsilon(1e-14));
  CHECK(r1.values[0] == Catch::Approx(r1.values[2]).epsilon(1e-14));
  CHECK(r1.ratio_high == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("localized average expressions") {
  Tree t = make_tree(2, 1);
  Measure om = unit_measure(t, {1.0, 1.0});
  std::vector<double> a = {1.0, 1.0, 0.0};

  auto r = equivalent_expressions_ratio(t, om, a, 2.0);
  REQUIRE(r.values.size() == 4);
  CHECK(r.values[0] == Catch::Approx(5.0));
  CHECK(r.values[1] == Catch::Approx(4.0));
  CHECK(r.values[2] == Catch::Approx(4.5));
  CHECK(r.values[3] == Catch::Approx(4.5));
  CHECK(r.ratio_low == Catch::Approx(0.8));
  CHECK(r.ratio_high == Catch::Approx(1.25));

  CHECK_THROWS_AS(equivalent_expressions_ratio(t, om, a, 1.0), std::invalid_argument);
}

TEST_CASE("comparison ratios bracket one on random data") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    Tree t = make_tree(2, 3);
    std::lognormal_distribution<double> ln(0.0, 0.8);
    std::vector<double> leaves(t.leaf_count);
    for (auto& v : leaves) v = ln(rng);
    Measure mu = make_measure(t, leaves);
    std::vector<double> a = random_family(t, rng, 0.3);
    for (double p : {1.25, 2.0, 3.0}) {
      auto sb = summation_by_parts_ratio(t, mu, a, p);
      auto eq = equivalent_expressions_ratio(t, mu, a, p);
      for (double v : sb.values) CHECK(std::isfinite(v));
      for (double v : eq.values) CHECK(std::isfinite(v));
      CHECK(sb.ratio_low <= 1.0 + 1e-12);
      CHECK(sb.ratio_high >= 1.0 - 1e-12);
      CHECK(eq.ratio_low <= 1.0 + 1e-12);
      CHECK(eq.ratio_high >= 1.0 - 1e-12);
    }
  }
}
