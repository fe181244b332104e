#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "dyadic/instance.hpp"
#include "dyadic/wolff.hpp"

using namespace dyadic;

// ===========================================================================
// Independent slow-path evaluation: activity, rho, gamma-averages and the
// potential all recomputed by explicit walks, no shared sweeps.
// ===========================================================================
namespace slowpath {

double sigma_of(const Instance& inst, std::size_t node) {
  auto [lo, hi] = inst.tree.leaf_span(node);
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += inst.sigma.leaf[i];
  return s;
}
double omega_of(const Instance& inst, std::size_t node) {
  auto [lo, hi] = inst.tree.leaf_span(node);
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += inst.omega.leaf[i];
  return s;
}
bool active(const Instance& inst, std::size_t node) {
  return inst.lambda[node] > 0.0 && sigma_of(inst, node) > 0.0 && omega_of(inst, node) > 0.0;
}

double rho(const Instance& inst, std::size_t cube, std::size_t leaf) {
  double s = 0.0;
  std::size_t node = inst.tree.leaf_node(leaf);
  while (true) {
    if (active(inst, node)) s += inst.lambda[node];
    if (node == cube) break;
    node = inst.tree.parent(node);
  }
  return s;
}

double gamma_average(const Instance& inst, std::size_t cube, double gamma) {
  auto [lo, hi] = inst.tree.leaf_span(cube);
  double total = omega_of(inst, cube);
  double acc = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (!(inst.omega.leaf[i] > 0.0)) continue;
    acc += inst.omega.leaf[i] * std::pow(rho(inst, cube, i), gamma);
  }
  return std::pow(acc / total, 1.0 / gamma);
}

double condition_value(const Instance& inst, double gamma) {
  const double pp = inst.exps.conj_p();
  double total = 0.0;
  for (std::size_t leaf = 0; leaf < inst.tree.leaf_count; ++leaf) {
    if (!(inst.omega.leaf[leaf] > 0.0)) continue;
    double w = 0.0;
    std::size_t node = inst.tree.leaf_node(leaf);
    while (true) {
      if (active(inst, node)) {
        double lam = gamma_average(inst, node, gamma);
        w += inst.lambda[node] * std::pow(omega_of(inst, node) / sigma_of(inst, node), pp - 1.0) *
             std::pow(lam, pp - 1.0);
      }
      if (node == inst.tree.root()) break;
      node = inst.tree.parent(node);
    }
    if (w > 0.0) total += inst.omega.leaf[leaf] * std::pow(w, inst.exps.omega_power());
  }
  return total;
}

}  // namespace slowpath

namespace {

Instance random_instance(int depth, std::uint64_t seed, double p = 2.0, double q = 0.5,
                         double zero_fraction = 0.2) {
  Tree t = make_tree(2, depth);
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> ln(0.0, 0.8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> lambda(t.node_count, 0.0), sl(t.leaf_count, 0.0), wl(t.leaf_count, 0.0);
  for (auto& v : lambda)
    if (u(rng) >= zero_fraction) v = ln(rng);
  for (std::size_t i = 0; i < t.leaf_count; ++i) {
    if (u(rng) >= zero_fraction) sl[i] = ln(rng);
    if (u(rng) >= zero_fraction) wl[i] = ln(rng);
  }
  if (*std::max_element(sl.begin(), sl.end()) == 0.0) sl[0] = 1.0;
  if (*std::max_element(wl.begin(), wl.end()) == 0.0) wl[0] = 1.0;
  if (*std::max_element(lambda.begin(), lambda.end()) == 0.0) lambda[0] = 1.0;
  return make_instance(t, lambda, sl, wl, Exponents{p, q, 1.0});
}

Instance all_ones() {
  Tree t = make_tree(2, 0);
  return make_instance(t, {1.0}, {1.0}, {1.0}, Exponents{2.0, 0.5, 1.0});
}

}  // namespace

TEST_CASE("gamma averages of constant localized sums") {
  Tree t = make_tree(2, 2);
  std::vector<double> lambda(t.node_count, 0.0);
  lambda[t.root()] = 1.0;
  Measure om = make_measure(t, {0.25, 0.25, 0.25, 0.25});
  for (double g : {-kInf, -1.0, 0.0, 0.5, 1.0, 2.0, kInf})
    CHECK(lambda_gamma(t, lambda, om, t.root(), g) == Catch::Approx(1.0).epsilon(1e-13));

  // a leaf cube sees only its own coefficient
  std::vector<double> lam2(t.node_count, 0.0);
  std::size_t leaf_node = t.leaf_node(2);
  lam2[leaf_node] = 0.7;
  for (double g : {-2.0, 1.0, 3.0, kInf})
    CHECK(lambda_gamma(t, lam2, om, leaf_node, g) == Catch::Approx(0.7).epsilon(1e-13));
}

TEST_CASE("two-leaf gamma averages") {
  Tree t = make_tree(2, 1);
  std::vector<double> lambda = {1.0, 1.0, 0.0};
  Measure om = make_measure(t, {0.5, 0.5});
  CHECK(lambda_gamma(t, lambda, om, t.root(), 1.0) == Catch::Approx(1.5).epsilon(1e-13));
  CHECK(lambda_gamma(t, lambda, om, t.root(), 2.0) ==
        Catch::Approx(std::sqrt(2.5)).epsilon(1e-13));
  CHECK(lambda_gamma(t, lambda, om, t.root(), kInf) == Catch::Approx(2.0));
  CHECK(lambda_gamma(t, lambda, om, t.root(), -kInf) == Catch::Approx(1.0));
  CHECK(lambda_gamma(t, lambda, om, t.root(), 0.0) ==
        Catch::Approx(std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("gamma average needs omega mass") {
  Tree t = make_tree(2, 1);
  std::vector<double> lambda = {1.0, 1.0, 1.0};
  Measure om = make_measure(t, {1.0, 0.0});
  CHECK_THROWS_AS(lambda_gamma(t, lambda, om, t.child(t.root(), 1), 1.0), std::domain_error);
}

TEST_CASE("zero localized sums under negative gamma give zero averages") {
  Tree t = make_tree(2, 1);
  // lambda only on the left leaf: rho_root = 0 on the charged right leaf
  std::vector<double> lambda = {0.0, 1.0, 0.0};
  Measure om = make_measure(t, {0.5, 0.5});
  CHECK(lambda_gamma(t, lambda, om, t.root(), -1.0) == 0.0);
  CHECK(lambda_gamma(t, lambda, om, t.root(), 0.0) == 0.0);
  CHECK(lambda_gamma(t, lambda, om, t.root(), -kInf) == 0.0);
  CHECK(lambda_gamma(t, lambda, om, t.root(), 1.0) == Catch::Approx(0.5));
}

TEST_CASE("linear case matches the subtree-sum identity") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    Instance inst = random_instance(4, seed);
    auto generic = localized_power_means(inst.tree, inst.lambda_active, inst.omega, 1.0);
    auto identity = inner_sum_means(inst.tree, inst.lambda_active, inst.omega);
    for (std::size_t n = 0; n < inst.tree.node_count; ++n)
      CHECK(std::abs(generic[n] - identity[n]) <= 1e-12 * std::max(1.0, identity[n]));
  }
}

TEST_CASE("gamma averages are monotone in gamma") {
  const double grid[] = {-kInf, -2.0, -0.5, 0.0, 0.25, 0.5, 1.0, 2.0, 4.0, kInf};
  for (std::uint64_t seed : {31u, 32u}) {
    Instance inst = random_instance(3, seed);
    std::vector<std::vector<double>> means;
    for (double g : grid)
      means.push_back(localized_power_means(inst.tree, inst.lambda_active, inst.omega, g));
    for (std::size_t k = 0; k + 1 < means.size(); ++k)
      for (std::size_t n = 0; n < inst.tree.node_count; ++n)
        CHECK(means[k][n] <= means[k + 1][n] + 1e-12 * std::max(1.0, means[k + 1][n]));
  }
}

TEST_CASE("potential and condition on a single cube") {
  Instance inst = all_ones();
  auto w = wolff_potential(inst, 1.0);
  REQUIRE(w.size() == 1);
  CHECK(w[0] == Catch::Approx(1.0));
  CHECK(wolff_condition_value(inst, 1.0) == Catch::Approx(1.0));
  CHECK(necessary_energy_sup(inst) == Catch::Approx(1.0));
}

TEST_CASE("potential rejects the endpoint p equal one") {
  Tree t = make_tree(2, 0);
  Instance inst = make_instance(t, {1.0}, {1.0}, {1.0}, Exponents{1.0, 0.5, 1.0});
  CHECK_THROWS_AS(wolff_potential(inst, 1.0), std::invalid_argument);
}

TEST_CASE("potential increases with gamma pointwise") {
  for (std::uint64_t seed : {41u, 42u, 43u}) {
    Instance inst = random_instance(3, seed);
    auto w1 = wolff_potential(inst, 1.0);
    auto w2 = wolff_potential(inst, 2.0);
    for (std::size_t i = 0; i < w1.size(); ++i)
      CHECK(w1[i] <= w2[i] + 1e-12 * std::max(1.0, w2[i]));
  }
}

TEST_CASE("homogeneity degrees of the potential and condition") {
  Instance inst = random_instance(3, 55, 1.5, 0.5, 0.0);
  const double pp = inst.exps.conj_p();
  auto w0 = wolff_potential(inst, 2.0);
  double c0 = wolff_condition_value(inst, 2.0);

  for (double t : {0.5, 2.0}) {
    std::vector<double> lam = inst.lambda;
    for (auto& v : lam) v *= t;
    Instance scaled = make_instance(inst.tree, lam, inst.sigma.leaf, inst.omega.leaf, inst.exps);
    auto w1 = wolff_potential(scaled, 2.0);
    for (std::size_t i = 0; i < w0.size(); ++i)
      CHECK(w1[i] == Catch::Approx(std::pow(t, pp) * w0[i]).epsilon(1e-12));
    double c1 = wolff_condition_value(scaled, 2.0);
    double deg = inst.exps.p * inst.exps.q / (inst.exps.p - inst.exps.q);
    CHECK(c1 == Catch::Approx(std::pow(t, deg) * c0).epsilon(1e-12));

    std::vector<double> sl = inst.sigma.leaf;
    for (auto& v : sl) v *= t;
    Instance sscaled = make_instance(inst.tree, inst.lambda, sl, inst.omega.leaf, inst.exps);
    auto w2 = wolff_potential(sscaled, 2.0);
    for (std::size_t i = 0; i < w0.size(); ++i)
      CHECK(w2[i] == Catch::Approx(std::pow(t, -(pp - 1.0)) * w0[i]).epsilon(1e-12));
  }
}

TEST_CASE("condition value matches the slow triple loop") {
  for (std::uint64_t seed : {61u, 62u, 63u, 64u}) {
    Instance inst = random_instance(2, seed);
    for (double g : {1.0, 2.0, 0.5}) {
      double fast = wolff_condition_value(inst, g);
      double slow = slowpath::condition_value(inst, g);
      CHECK(std::abs(fast - slow) <= 1e-12 * std::max(1.0, slow));
    }
  }
}

TEST_CASE("report is recomputable and coherent") {
  Instance inst = random_instance(3, 71);
  auto rep = wolff_report(inst, 1.0);
  CHECK(rep.condition_value ==
        Catch::Approx(wolff_condition_from_potential(inst, rep.potential)).epsilon(1e-12));
  CHECK(rep.dlbo >= 1.0);
  for (double v : rep.potential) CHECK(v >= 0.0);
}

TEST_CASE("oscillation ratio of a single-coefficient family is one") {
  Tree t = make_tree(2, 2);
  std::vector<double> lambda(t.node_count, 0.0);
  lambda[t.root()] = 3.0;
  Instance inst = make_instance(t, lambda, {1.0, 1.0, 1.0, 1.0}, {1.0, 2.0, 3.0, 4.0},
                                Exponents{2.0, 0.5, 1.0});
  CHECK(dlbo_ratio(inst) == Catch::Approx(1.0));
  auto r = localized_range(inst, t.root());
  CHECK(r.min == Catch::Approx(3.0));
  CHECK(r.max == Catch::Approx(3.0));
}

TEST_CASE("oscillation grows along a loaded chain with charged siblings") {
  double prev = 0.0;
  for (int depth : {2, 4, 6}) {
    Tree t = make_tree(2, depth);
    std::vector<double> lambda(t.node_count, 0.0);
    std::size_t node = t.root();
    while (true) {
      lambda[node] = 1.0;
      if (t.is_leaf(node)) break;
      node = t.child(node, 0);
    }
    std::vector<double> ones(t.leaf_count, 1.0);
    Instance inst = make_instance(t, lambda, ones, ones, Exponents{2.0, 0.5, 1.0});
    double ratio = dlbo_ratio(inst);
    CHECK(ratio == Catch::Approx(static_cast<double>(depth + 1)));
    CHECK(ratio > prev);
    prev = ratio;
  }
}

TEST_CASE("envelope comparison on a single cube") {
  Instance inst = all_ones();
  auto pair = power_mean_envelope_check(inst, {1.0}, 0.25);
  CHECK(pair.lhs == Catch::Approx(1.0));
  CHECK(pair.rhs == Catch::Approx(1.0));
}

TEST_CASE("envelope comparison stays finite and positive") {
  for (std::uint64_t seed : {81u, 82u}) {
    Instance inst = random_instance(3, seed);
    std::vector<double> a(inst.tree.node_count, 0.0);
    std::mt19937_64 rng(seed + 7);
    std::lognormal_distribution<double> ln(0.0, 0.6);
    for (std::size_t n = 0; n < a.size(); ++n)
      if (inst.active[n]) a[n] = ln(rng);
    auto pair = power_mean_envelope_check(inst, a, 0.25);
    CHECK(std::isfinite(pair.lhs));
    CHECK(std::isfinite(pair.rhs));
    CHECK(pair.lhs > 0.0);
    CHECK(pair.rhs > 0.0);
  }
}

TEST_CASE("variant construction on a single cube") {
  Instance inst = all_ones();
  auto var = sufficiency_family_variant(inst, 1.0);
  CHECK(var.d[0] == Catch::Approx(1.0));
  CHECK(var.sup_value == Catch::Approx(1.0));
  CHECK(var.integral_value == Catch::Approx(1.0));
}

TEST_CASE("variant construction with a root-only family") {
  Tree t = make_tree(2, 1);
  std::vector<double> lambda = {2.0, 0.0, 0.0};
  Instance inst = make_instance(t, lambda, {1.0, 1.0}, {0.5, 0.5}, Exponents{2.0, 0.5, 1.0});
  auto var = sufficiency_family_variant(inst, 0.5);
  // constant rho = 2 makes every average 2: d = 2^{1/2} (omega/sigma) 2^{1/2} = 2·(1/2)
  CHECK(var.d[0] == Catch::Approx(1.0));
  CHECK(var.sup_value == Catch::Approx(1.0));
  CHECK(var.sup_value <= 1.0 / 0.5 + 1e-9);
}

TEST_CASE("variant sup condition bounded by the summation-by-parts constant") {
  for (std::uint64_t seed : {91u, 92u, 93u}) {
    Instance inst = random_instance(3, seed);
    for (double g : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      auto var = sufficiency_family_variant(inst, g);
      INFO("seed=" << seed << " gamma=" << g);
      CHECK(var.sup_value <= std::max(1.0, 1.0 / g) + 1e-9);
      if (g <= 1.0) CHECK(var.sup_value <= 1.0 / g + 1e-9);
      CHECK(std::isfinite(var.integral_value));
      for (std::size_t n = 0; n < inst.tree.node_count; ++n)
        if (inst.active[n]) CHECK(var.d[n] > 0.0);
    }
  }
}

TEST_CASE("pair construction on a single cube") {
  Instance inst = all_ones();
  auto pair = sufficiency_family_pair(inst);
  CHECK(pair.a[0] == Catch::Approx(1.0));
  CHECK(pair.c[0] == Catch::Approx(1.0));
  CHECK(pair.sup_value == Catch::Approx(1.0));
  CHECK(pair.sum_value == Catch::Approx(1.0));
  CHECK(pair.envelope_value == Catch::Approx(1.0));
}

TEST_CASE("pair construction yields positive families and finite conditions") {
  for (std::uint64_t seed : {95u, 96u}) {
    Instance inst = random_instance(3, seed);
    auto pair = sufficiency_family_pair(inst);
    for (std::size_t n = 0; n < inst.tree.node_count; ++n) {
      if (inst.active[n]) {
        CHECK(pair.a[n] > 0.0);
        CHECK(pair.c[n] > 0.0);
      } else {
        CHECK(pair.a[n] == 0.0);
        CHECK(pair.c[n] == 0.0);
      }
    }
    CHECK(std::isfinite(pair.sup_value));
    CHECK(std::isfinite(pair.sum_value));
    CHECK(std::isfinite(pair.envelope_value));
    CHECK(pair.sum_value > 0.0);
  }
}
