#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dyadic/chains.hpp"
#include "dyadic/wolff.hpp"

using namespace dyadic;

TEST_CASE("series classification") {
  CHECK_FALSE(classify_series({1.0, 0.0, 1.0}).converges);
  CHECK(classify_series({1.0, 0.0, 2.0}).converges);
  CHECK(classify_series({1.0, 0.5, 0.0}).converges);
  CHECK_FALSE(classify_series({1.0, -0.5, 3.0}).converges);
  CHECK(classify_series({2.5, 0.0, 1.0 + 1e-9}).converges);
  CHECK_THROWS_AS(classify_series({0.0, 0.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(classify_series({-1.0, 0.0, 2.0}), std::invalid_argument);
}

TEST_CASE("series tail bounds") {
  SeriesTerm log_tail{1.0, 0.0, 2.0};
  CHECK(series_tail_bound(log_tail, 100.0) ==
        Catch::Approx(1.0 / std::log(102.0)).epsilon(1e-13));
  SeriesTerm power_tail{3.0, 0.5, 0.0};
  CHECK(series_tail_bound(power_tail, 99.0) ==
        Catch::Approx(6.0 / 10.0).epsilon(1e-13));
  CHECK_THROWS_AS(series_tail_bound({1.0, 0.0, 1.0}, 10.0), std::domain_error);
}

TEST_CASE("partial sum comparisons stay within a bounded ratio") {
  ComparisonSides rise = rising_sum_comparison(1.0, 2.0, 2000);
  CHECK(rise.lhs > 0.0);
  CHECK(rise.rhs > 0.0);
  CHECK(rise.lhs / rise.rhs > 0.2);
  CHECK(rise.lhs / rise.rhs < 5.0);

  ComparisonSides rise_half = rising_sum_comparison(0.5, 1.5, 5000);
  CHECK(rise_half.lhs / rise_half.rhs > 0.2);
  CHECK(rise_half.lhs / rise_half.rhs < 5.0);

  ComparisonSides decay = decaying_tail_comparison(0.5, 2.0, 100, 200000);
  CHECK(decay.lhs / decay.rhs > 0.2);
  CHECK(decay.lhs / decay.rhs < 5.0);

  CHECK_THROWS_AS(rising_sum_comparison(0.0, 2.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(decaying_tail_comparison(0.5, 0.0, 10), std::invalid_argument);
}

TEST_CASE("log slope fit recovers exact power laws") {
  std::vector<double> xs = {10.0, 100.0, 1000.0};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3.0 * std::pow(x, 0.7));
  CHECK(fit_log_slope(xs, ys) == Catch::Approx(0.7).epsilon(1e-12));
  CHECK_THROWS_AS(fit_log_slope({1.0}, {2.0}), std::invalid_argument);
}

TEST_CASE("decreasing chain parameter validation") {
  CHECK_THROWS_WITH(build_counterexample_small_gamma(2.0, 0.5, 0.6, 8, 0.5),
                    "gamma must satisfy 0 < gamma < q");
  CHECK_THROWS_WITH(build_counterexample_small_gamma(2.0, 0.5, 0.25, 8, 1.5),
                    "epsilon must satisfy 0 < epsilon < 1");
  CHECK_THROWS_WITH(build_counterexample_small_gamma(1.0, 0.5, 0.25, 8, 0.5),
                    "p must exceed 1");
  CHECK_THROWS_AS(build_counterexample_small_gamma(2.0, 0.5, 0.25, 3, 0.5),
                  std::invalid_argument);
}

TEST_CASE("decreasing chain materialization") {
  const double p = 2.0, q = 0.5, gamma = 0.25, epsilon = 0.5;
  const std::size_t n = 8;
  SmallGammaChain chain = build_counterexample_small_gamma(p, q, gamma, n, epsilon);
  const Instance& inst = chain.instance;
  const Tree& t = inst.tree;
  CHECK(chain.alpha == 1.0);
  CHECK(chain.beta == Catch::Approx(0.5));
  CHECK(chain.delta == Catch::Approx(2.0));
  CHECK(t.depth == static_cast<int>(n) + 1);

  // frozen j = 1 coefficient, and the frozen j = 0 copy of it
  double lam1 = std::pow(std::log(3.0), -2.0);
  CHECK(inst.lambda[t.level_offset[1]] == Catch::Approx(lam1).epsilon(1e-13));
  CHECK(inst.lambda[t.level_offset[0]] == Catch::Approx(lam1).epsilon(1e-13));

  for (std::size_t j = 0; j <= n; ++j) {
    std::size_t pj = t.level_offset[j];
    REQUIRE(inst.active[pj]);
    double mass = 0.0;
    for (std::size_t m = j; m <= n; ++m) mass += std::pow(static_cast<double>(m + 1), -1.5);
    CHECK(inst.omega.node[pj] == Catch::Approx(mass).epsilon(1e-12));
    double sig = std::pow(std::log(static_cast<double>(j) + 2.0), -epsilon);
    CHECK(inst.sigma.node[pj] == Catch::Approx(sig).epsilon(1e-10));
  }

  // tracked testing quantity equals the P_0 energy term computed directly
  double prefix = 0.0, direct = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    prefix += inst.lambda[t.level_offset[k]];
    direct += std::pow(static_cast<double>(k + 1), -1.5) * std::pow(prefix, q);
  }
  direct *= std::pow(std::pow(std::log(2.0), -epsilon), -q / p);
  CHECK(chain.necessary_quantity == Catch::Approx(direct).epsilon(1e-12));
  CHECK(necessary_energy_sup(inst) >=
        std::pow(chain.necessary_quantity, 1.0 / q) * (1.0 - 1e-9));
}

TEST_CASE("streamed majorant dominates the materialized potential integral") {
  for (std::size_t n : {8u, 12u}) {
    SmallGammaChain chain = build_counterexample_small_gamma(2.0, 0.5, 0.25, n, 0.5);
    double exact = wolff_condition_value(chain.instance, 0.25);
    CHECK(exact > 0.0);
    CHECK(exact <= chain.wolff_quantity * (1.0 + 1e-9));
  }
}

TEST_CASE("decreasing chain partial sum trends") {
  SmallGammaPartials parts =
      small_gamma_partials(2.0, 0.5, 0.25, 0.5, {250, 500, 1000, 2000, 4000});
  for (std::size_t i = 1; i < parts.depths.size(); ++i) {
    CHECK(parts.necessary[i] > parts.necessary[i - 1]);
    CHECK(parts.wolff[i] > parts.wolff[i - 1]);
  }
  // the convergent quantity's windows shrink, the divergent one's stay fat
  double w0 = parts.wolff[2] - parts.wolff[1];
  double w1 = parts.wolff[3] - parts.wolff[2];
  double w2 = parts.wolff[4] - parts.wolff[3];
  CHECK(w1 < w0);
  CHECK(w2 < w1);

  SmallGammaSeries terms = small_gamma_series_terms(2.0, 0.5, 0.5);
  CHECK(terms.necessary.a == Catch::Approx(0.0).margin(1e-14));
  CHECK(terms.necessary.b == Catch::Approx(1.0).epsilon(1e-13));
  CHECK_FALSE(classify_series(terms.necessary).converges);
  CHECK(terms.wolff.a == Catch::Approx(0.0).margin(1e-14));
  CHECK(terms.wolff.b == Catch::Approx(7.0 / 6.0).epsilon(1e-13));
  CHECK(classify_series(terms.wolff).converges);
}

TEST_CASE("increasing chain parameter validation") {
  CHECK_THROWS_WITH(build_counterexample_large_gamma(2.0, 0.5, 8, 1.0),
                    "beta must exceed 1");
  CHECK_THROWS_WITH(build_counterexample_large_gamma(2.0, 0.5, 8, 2.0),
                    "alpha*beta must stay below 1");
  CHECK_THROWS_AS(build_counterexample_large_gamma(2.0, 0.5, 2, 1.25),
                  std::invalid_argument);
}

TEST_CASE("increasing chain materialization") {
  const double p = 2.0, q = 0.5, beta = 1.25;
  const std::size_t n = 8;
  LargeGammaChain chain = build_counterexample_large_gamma(p, q, n, beta);
  const Instance& inst = chain.instance;
  const Tree& t = inst.tree;
  CHECK(chain.alpha == Catch::Approx(2.0 / 3.0).epsilon(1e-13));

  CHECK(inst.lambda[t.first_leaf()] == Catch::Approx(0.25).epsilon(1e-13));
  CHECK(inst.omega.leaf[0] == 2.0);
  CHECK(inst.sigma.leaf[0] == 1.0);

  for (std::size_t j = 0; j <= n; ++j) {
    std::size_t pj = t.level_offset[t.depth - static_cast<int>(j)];
    REQUIRE(inst.active[pj]);
    double mass = std::pow(2.0, static_cast<double>(j) + 2.0) - 2.0;
    CHECK(inst.omega.node[pj] == Catch::Approx(mass).epsilon(1e-12));
    CHECK(std::pow(inst.lambda[pj], q) * inst.omega.node[pj] ==
          Catch::Approx(std::pow(static_cast<double>(j + 1), -beta)).epsilon(1e-12));
    CHECK(inst.sigma.node[pj] == 1.0);
  }

  double sufficient = 0.0, divergent = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    double b = std::pow(static_cast<double>(j + 1), -beta);
    sufficient += b;
    double mass = std::pow(2.0, static_cast<double>(j) + 2.0) - 2.0;
    divergent += (std::pow(2.0, static_cast<double>(j) + 1.0) / mass) *
                 std::pow(b, chain.alpha);
  }
  CHECK(chain.sufficient_quantity == Catch::Approx(sufficient).epsilon(1e-12));
  CHECK(chain.divergent_quantity == Catch::Approx(divergent).epsilon(1e-12));
}

TEST_CASE("increasing chain partial sum trends") {
  LargeGammaPartials parts = large_gamma_partials(2.0, 0.5, 1.25, {100, 1000, 10000});
  CHECK(parts.sufficient[2] - parts.sufficient[0] <
        std::pow(100.0, 1.0 - 1.25) / 0.25);
  CHECK(parts.divergent[2] / parts.divergent[0] > 1.8);

  double slope = fit_log_slope(
      {100.0, 1000.0, 10000.0},
      {parts.divergent[0], parts.divergent[1], parts.divergent[2]});
  double target = 1.0 - (2.0 / 3.0) * 1.25;
  CHECK(std::abs(slope - target) < 0.06);
}

TEST_CASE("telescoping lower estimate") {
  for (std::size_t n : {100u, 10000u}) {
    LowerEstimate le = large_gamma_lower_estimate(2.0, 0.5, 1.25, n);
    CHECK(std::isfinite(le.lhs));
    CHECK(std::isfinite(le.rhs));
    CHECK(le.lhs >= le.rhs);
  }
  // log-space total mass agrees with the direct value while it is representable
  LowerEstimate le = large_gamma_lower_estimate(2.0, 0.5, 1.25, 20);
  double alpha = 2.0 / 3.0;
  double direct = std::log(std::pow(2.0, 22.0) - 2.0) * std::pow(21.0, -1.25 * alpha) -
                  std::log(2.0);
  CHECK(le.rhs == Catch::Approx(direct).epsilon(1e-12));
}

TEST_CASE("riesz model coefficients") {
  Tree t0 = make_tree(2, 0);
  Measure s0 = make_measure(t0, {1.0});
  std::vector<double> lam0 = riesz_model_coefficients(t0, s0, 0.5);
  CHECK(lam0[0] == Catch::Approx(1.0));

  Tree t = make_tree(2, 5);
  std::vector<double> uniform(t.leaf_count, 1.0);
  Measure sig = make_measure(t, uniform);
  const double alpha_r = 0.5;
  std::vector<double> lam = riesz_model_coefficients(t, sig, alpha_r);
  for (std::size_t node = 0; node < t.node_count; ++node) {
    double k = static_cast<double>(t.level_of(node));
    double expected = sig.node[node] * std::pow(2.0, k * (1.0 - alpha_r));
    CHECK(lam[node] == Catch::Approx(expected).epsilon(1e-12));
  }

  Instance inst = make_instance(t, lam, uniform, uniform, Exponents{2.0, 0.5, 1.0});
  double cap = 1.0 / (1.0 - std::pow(2.0, -alpha_r));
  CHECK(dlbo_ratio(inst) <= cap + 1e-9);
  for (std::size_t node = 0; node < t.node_count; ++node) {
    ValueRange r = localized_range(inst, node);
    CHECK(r.max <= lam[node] * cap * (1.0 + 1e-12));
  }

  // point mass sigma keeps the coefficients on one ancestor chain
  std::vector<double> point(t.leaf_count, 0.0);
  point[5] = 1.0;
  Measure psig = make_measure(t, point);
  std::vector<double> plam = riesz_model_coefficients(t, psig, alpha_r);
  for (std::size_t node = 0; node < t.node_count; ++node) {
    auto [lo, hi] = t.leaf_span(node);
    bool on_chain = lo <= 5 && 5 < hi;
    CHECK((plam[node] > 0.0) == on_chain);
  }

  Tree t3 = make_tree(3, 2);
  Measure s3 = make_measure(t3, std::vector<double>(t3.leaf_count, 1.0));
  CHECK_THROWS_AS(riesz_model_coefficients(t3, s3, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(riesz_model_coefficients(t, sig, 1.5), std::invalid_argument);

  Tree t4 = make_tree(4, 3);  // branching 2^2
  Measure s4 = make_measure(t4, std::vector<double>(t4.leaf_count, 1.0));
  std::vector<double> lam4 = riesz_model_coefficients(t4, s4, 1.5);
  CHECK(lam4[t4.root()] == Catch::Approx(s4.node[t4.root()]).epsilon(1e-12));
}
