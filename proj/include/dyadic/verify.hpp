#pragma once

// ============================================================================
// Seeded property suites over random instances.
//
//   invariants       exact identities: measure additivity, serialization
//                    round trips, norm power scaling, summation-by-parts
//                    brackets, coefficient transforms, power-mean identities
//   sandwich         minimized envelope and factorization bounds bracket the
//                    estimated operator norm within a recorded constant
//   wolff-scale      potential / condition homogeneity in lambda and sigma,
//                    pointwise monotonicity in the averaging exponent
//   counterexamples  chain generators reproduce the certified convergence
//                    and divergence verdicts
//
// Instance k is generated from (seed, k) alone, so results are identical for
// any worker count; DYADIC_WORKERS sets the fan-out and logs are merged in
// index order.  The first failing instance is dumped as a reproducer file.
// ============================================================================

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "dyadic/chains.hpp"
#include "dyadic/characterize.hpp"
#include "dyadic/instance.hpp"
#include "dyadic/io.hpp"
#include "dyadic/mixed_norm.hpp"
#include "dyadic/op.hpp"
#include "dyadic/tree.hpp"
#include "dyadic/wolff.hpp"

namespace dyadic {

struct SuiteOptions {
  std::uint64_t seed = 7;
  int instances = 0;  // 0: per-suite default
  int max_depth = 3;
  std::string reproducer_dir = ".";
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  int checks = 0;
  int failures = 0;
  std::vector<std::string> messages;
  std::map<std::string, double> constants;
  std::string reproducer_path;
};

inline Instance random_suite_instance(std::uint64_t seed, std::size_t index, int max_depth) {
  const double p_grid[] = {1.5, 2.0, 3.0};
  const double q_grid[] = {0.25, 0.5, 0.75};
  double p = p_grid[index % 3];
  double q = q_grid[(index / 3) % 3];
  int branching = index % 5 == 4 ? 3 : 2;
  int depth = 1 + static_cast<int>(index % static_cast<std::size_t>(std::max(1, max_depth)));

  Tree t = make_tree(branching, depth);
  std::mt19937_64 rng(seed * 1000003ull + index * 97ull + 13ull);
  std::lognormal_distribution<double> ln(0.0, 0.8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> lambda(t.node_count, 0.0);
  std::vector<double> sl(t.leaf_count, 0.0), wl(t.leaf_count, 0.0);
  for (std::size_t n = 0; n < t.node_count; ++n)
    if (u(rng) >= 0.2) lambda[n] = ln(rng);
  for (std::size_t i = 0; i < t.leaf_count; ++i) {
    if (u(rng) >= 0.2) sl[i] = ln(rng);
    if (u(rng) >= 0.2) wl[i] = ln(rng);
  }
  lambda[t.root()] = ln(rng);  // root stays active: the norm never degenerates
  if (*std::max_element(sl.begin(), sl.end()) == 0.0) sl[0] = 1.0;
  if (*std::max_element(wl.begin(), wl.end()) == 0.0) wl[0] = 1.0;
  return make_instance(t, lambda, sl, wl, Exponents{p, q, 1.0});
}

namespace detail {

struct CheckLog {
  int checks = 0;
  std::vector<std::string> failures;
  std::map<std::string, double> constants;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
  }
  void record_max(const std::string& key, double value) {
    auto it = constants.find(key);
    if (it == constants.end() || value > it->second) constants[key] = value;
  }
};

inline std::vector<double> random_node_family(const Instance& inst, std::uint64_t seed,
                                              bool strictly_positive) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> ln(0.0, 0.6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> fam(inst.tree.node_count, 0.0);
  for (auto& v : fam)
    if (strictly_positive || u(rng) >= 0.3) v = ln(rng);
  return fam;
}

inline bool close_rel(double x, double y, double tol) {
  double scale = std::max({std::abs(x), std::abs(y), 1.0});
  return std::abs(x - y) <= tol * scale;
}

inline void check_invariants(const Instance& inst, std::size_t index, std::uint64_t seed,
                             CheckLog& log) {
  const Tree& t = inst.tree;
  const std::string tag = "instance " + std::to_string(index) + ": ";

  // node masses are the exact bottom-up sums of their children
  bool additive = true;
  for (std::size_t n = 0; n < t.node_count && additive; ++n) {
    if (t.is_leaf(n)) continue;
    double s = 0.0, w = 0.0;
    for (int j = 0; j < t.branching; ++j) {
      s += inst.sigma.node[t.child(n, j)];
      w += inst.omega.node[t.child(n, j)];
    }
    additive = s == inst.sigma.node[n] && w == inst.omega.node[n];
  }
  log.expect(additive, tag + "measure additivity is not bitwise");

  Instance round = instance_from_json(instance_to_json(inst));
  log.expect(instance_digest(round) == instance_digest(inst),
             tag + "serialization round trip changed the digest");

  std::vector<double> fam = random_node_family(inst, seed + 1, false);
  const NormExponents regimes[] = {{2.0, 1.0}, {kInf, 2.0}, {1.5, kInf}};
  for (const auto& rs : regimes) {
    PowerScalingCheck sc = power_scaling_check(t, inst.omega, fam, rs, 2.0);
    log.expect(close_rel(sc.ratio, 1.0, 1e-12), tag + "norm power scaling drifted");
  }

  std::vector<double> pos = random_node_family(inst, seed + 2, true);
  ExpressionRatios sbp = summation_by_parts_ratio(t, inst.omega, pos, inst.exps.p);
  bool sbp_ok = sbp.values.size() == 3;
  for (double v : sbp.values) sbp_ok = sbp_ok && std::isfinite(v) && v >= 0.0;
  if (sbp_ok)
    sbp_ok = sbp.values[0] >= sbp.values[1] * (1.0 - 1e-12) &&
             sbp.values[0] >= sbp.values[2] * (1.0 - 1e-12);
  log.expect(sbp_ok, tag + "partial-summation expressions lost their ordering");

  // walk each leaf chain: for a = ancestor sums of b the weighted tower
  // Sum rho_Q b_Q matches Sum lambda_Q a_Q and sup a_Q matches Sum b_Q;
  // for b = envelope increments of a the tower matches sup a_Q and the
  // weighted tower dominates Sum lambda_Q a_Q
  std::vector<double> a_fam = ancestor_sum_family(t, pos);
  std::vector<double> inc = envelope_increment_family(t, pos);
  std::vector<double> prefix = ancestor_sum(t, inst.lambda_active);
  bool tower_ok = true, sup_ok = true, inc_sup_ok = true, inc_dom_ok = true;
  for (std::size_t leaf = 0; leaf < t.leaf_count; ++leaf) {
    std::size_t node = t.leaf_node(leaf);
    double s_leaf = prefix[node];
    double weighted = 0.0, tower = 0.0, lam_a = 0.0, sup_a = 0.0;
    double lam_pos = 0.0, sup_pos = 0.0, inc_tower = 0.0, inc_weighted = 0.0;
    std::size_t cur = node;
    while (true) {
      double rho = s_leaf - (prefix[cur] - inst.lambda_active[cur]);
      weighted += rho * pos[cur];
      tower += pos[cur];
      lam_a += inst.lambda_active[cur] * a_fam[cur];
      sup_a = std::max(sup_a, a_fam[cur]);
      lam_pos += inst.lambda_active[cur] * pos[cur];
      sup_pos = std::max(sup_pos, pos[cur]);
      inc_tower += inc[cur];
      inc_weighted += rho * inc[cur];
      if (cur == t.root()) break;
      cur = t.parent(cur);
    }
    tower_ok = tower_ok && close_rel(weighted, lam_a, 1e-12);
    sup_ok = sup_ok && close_rel(sup_a, tower, 1e-12);
    inc_sup_ok = inc_sup_ok && close_rel(inc_tower, sup_pos, 1e-12);
    inc_dom_ok = inc_dom_ok && inc_weighted >= lam_pos - 1e-12 * std::max(1.0, lam_pos);
  }
  log.expect(tower_ok, tag + "ancestor-sum transform broke the weighted tower identity");
  log.expect(sup_ok, tag + "ancestor-sum transform broke the envelope identity");
  log.expect(inc_sup_ok, tag + "increment transform broke the tower identity");
  log.expect(inc_dom_ok, tag + "increment transform lost pointwise domination");

  std::vector<double> means1 = localized_power_means(t, inst.lambda_active, inst.omega, 1.0);
  std::vector<double> direct = inner_sum_means(t, inst.lambda_active, inst.omega);
  bool mean_ok = true;
  for (std::size_t n = 0; n < t.node_count && mean_ok; ++n)
    if (inst.active[n]) mean_ok = close_rel(means1[n], direct[n], 1e-12);
  log.expect(mean_ok, tag + "first power mean disagrees with the direct average");

  std::vector<double> lo = localized_power_means(t, inst.lambda_active, inst.omega, 0.5);
  std::vector<double> hi = localized_power_means(t, inst.lambda_active, inst.omega, 2.0);
  bool jensen = true;
  for (std::size_t n = 0; n < t.node_count && jensen; ++n)
    if (inst.active[n]) jensen = lo[n] <= hi[n] * (1.0 + 1e-12);
  log.expect(jensen, tag + "power mean monotonicity in gamma failed");
}

inline void check_sandwich(const Instance& inst, std::size_t index, CheckLog& log) {
  const std::string tag = "instance " + std::to_string(index) + ": ";
  const double cap = 50.0;
  double norm = estimate_operator_norm(inst).value;
  log.expect(norm > 0.0, tag + "estimated norm vanished on an active instance");
  if (!(norm > 0.0)) return;

  FamilySearch fs = minimize_auxiliary_bound(inst);
  FactorSearch fb = minimize_factorization_bound(inst);
  double hi = std::max(fs.value, fb.value) / norm;
  double lo = std::min(fs.value, fb.value) / norm;
  char key[64];
  std::snprintf(key, sizeof(key), "p=%g,q=%g:sandwich", inst.exps.p, inst.exps.q);
  log.record_max(key, std::max(hi, 1.0 / lo));
  log.expect(hi <= cap && lo >= 1.0 / cap, tag + "bound/norm ratio left the [1/50, 50] band");
  log.expect(fb.value >= norm * (1.0 - 1e-6),
             tag + "a coefficient factorization undercut the norm");
}

inline Instance scale_lambda(const Instance& inst, double t) {
  std::vector<double> lam = inst.lambda;
  for (auto& v : lam) v *= t;
  return make_instance(inst.tree, lam, inst.sigma.leaf, inst.omega.leaf, inst.exps);
}

inline Instance scale_sigma(const Instance& inst, double t) {
  std::vector<double> sl = inst.sigma.leaf;
  for (auto& v : sl) v *= t;
  return make_instance(inst.tree, inst.lambda, sl, inst.omega.leaf, inst.exps);
}

inline void check_wolff_scale(const Instance& inst, std::size_t index, CheckLog& log) {
  const std::string tag = "instance " + std::to_string(index) + ": ";
  const double gamma = 1.0;
  const double pp = inst.exps.conj_p();
  std::vector<double> w = wolff_potential(inst, gamma);
  double cond = wolff_condition_value(inst, gamma);

  for (double tscale : {0.5, 2.0}) {
    Instance lam_scaled = scale_lambda(inst, tscale);
    std::vector<double> w2 = wolff_potential(lam_scaled, gamma);
    bool ok = true;
    for (std::size_t i = 0; i < w.size() && ok; ++i)
      ok = close_rel(w2[i], w[i] * std::pow(tscale, pp), 1e-10);
    log.expect(ok, tag + "potential does not scale like lambda^{p'}");
    double cond2 = wolff_condition_value(lam_scaled, gamma);
    double expo = inst.exps.p * inst.exps.q / (inst.exps.p - inst.exps.q);
    log.expect(close_rel(cond2, cond * std::pow(tscale, expo), 1e-10),
               tag + "condition value does not scale like lambda^{pq/(p-q)}");

    Instance sig_scaled = scale_sigma(inst, tscale);
    std::vector<double> w3 = wolff_potential(sig_scaled, gamma);
    bool ok3 = true;
    for (std::size_t i = 0; i < w.size() && ok3; ++i)
      ok3 = close_rel(w3[i], w[i] * std::pow(tscale, -(pp - 1.0)), 1e-10);
    log.expect(ok3, tag + "potential does not scale like sigma^{-(p'-1)}");
  }

  std::vector<double> w_lo = wolff_potential(inst, 0.5);
  std::vector<double> w_hi = wolff_potential(inst, 2.0);
  bool mono = true;
  for (std::size_t i = 0; i < w_lo.size() && mono; ++i)
    mono = w_lo[i] <= w_hi[i] * (1.0 + 1e-12);
  log.expect(mono, tag + "potential not monotone in the averaging exponent");

  log.expect(dlbo_ratio(inst) >= 1.0 - 1e-12, tag + "localized ratio dipped below 1");
}

inline void check_counterexamples(CheckLog& log) {
  SmallGammaSeries terms = small_gamma_series_terms(2.0, 0.5, 0.5);
  log.expect(!classify_series(terms.necessary).converges,
             "testing-quantity series misclassified as convergent");
  log.expect(classify_series(terms.wolff).converges,
             "potential-quantity series misclassified as divergent");

  SmallGammaPartials sg = small_gamma_partials(2.0, 0.5, 0.25, 0.5, {2500, 5000, 10000});
  log.expect(sg.necessary[0] < sg.necessary[1] && sg.necessary[1] < sg.necessary[2],
             "testing-quantity partial sums are not strictly increasing");
  double w0 = sg.wolff[1] - sg.wolff[0], w1 = sg.wolff[2] - sg.wolff[1];
  log.expect(w1 < w0 && w1 > 0.0, "potential-quantity windows are not shrinking");

  SmallGammaChain chain = build_counterexample_small_gamma(2.0, 0.5, 0.25, 8, 0.5);
  double exact = wolff_condition_value(chain.instance, 0.25);
  log.expect(exact <= chain.wolff_quantity * (1.0 + 1e-9),
             "streamed majorant fell below the materialized potential integral");
  double lam1 = std::pow(std::log(3.0), -2.0);
  log.expect(close_rel(chain.instance.lambda[chain.instance.tree.level_offset[1]], lam1, 1e-12),
             "frozen decreasing-chain coefficient drifted");

  LargeGammaPartials lg = large_gamma_partials(2.0, 0.5, 1.25, {100, 10000});
  log.expect(lg.divergent[1] / lg.divergent[0] > 1.8,
             "divergent quantity is not growing across decades");
  log.expect(lg.sufficient[1] - lg.sufficient[0] < std::pow(100.0, -0.25) / 0.25,
             "convergent quantity exceeded its integral tail bound");
  LowerEstimate le = large_gamma_lower_estimate(2.0, 0.5, 1.25, 10000);
  log.expect(le.lhs >= le.rhs, "telescoping lower estimate failed");

  LargeGammaChain big = build_counterexample_large_gamma(2.0, 0.5, 8, 1.25);
  log.expect(close_rel(big.instance.lambda[big.instance.tree.first_leaf()], 0.25, 1e-12),
             "frozen increasing-chain coefficient drifted");
}

}  // namespace detail

inline int suite_worker_count() {
  if (const char* env = std::getenv("DYADIC_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

inline SuiteResult run_suite(const std::string& name, const SuiteOptions& opts = {}) {
  if (name != "invariants" && name != "sandwich" && name != "wolff-scale" &&
      name != "counterexamples")
    throw std::invalid_argument("unknown suite: " + name);
  int count = opts.instances;
  if (count <= 0) {
    if (name == "invariants") count = 200;
    else if (name == "sandwich") count = 27;
    else count = 100;
  }
  if (name == "counterexamples") count = 1;  // the chain checks are instance-free

  std::vector<detail::CheckLog> logs(static_cast<std::size_t>(count));
  auto work = [&](std::size_t index) {
    detail::CheckLog& log = logs[index];
    if (name == "counterexamples") {
      detail::check_counterexamples(log);
      return;
    }
    Instance inst = random_suite_instance(opts.seed, index, opts.max_depth);
    if (name == "invariants")
      detail::check_invariants(inst, index, opts.seed, log);
    else if (name == "sandwich")
      detail::check_sandwich(inst, index, log);
    else
      detail::check_wolff_scale(inst, index, log);
  };

  int workers = std::min<int>(suite_worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < logs.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < logs.size();
             i += static_cast<std::size_t>(workers))
          work(i);
      });
    for (auto& th : pool) th.join();
  }

  SuiteResult result;
  result.name = name;
  std::size_t first_failure = logs.size();
  for (std::size_t i = 0; i < logs.size(); ++i) {
    result.checks += logs[i].checks;
    result.failures += static_cast<int>(logs[i].failures.size());
    for (const auto& msg : logs[i].failures) result.messages.push_back(msg);
    for (const auto& [key, value] : logs[i].constants) {
      auto it = result.constants.find(key);
      if (it == result.constants.end() || value > it->second) result.constants[key] = value;
    }
    if (!logs[i].failures.empty() && first_failure == logs.size()) first_failure = i;
  }
  result.passed = result.failures == 0;
  if (!result.passed && name != "counterexamples") {
    Instance bad = random_suite_instance(opts.seed, first_failure, opts.max_depth);
    result.reproducer_path = opts.reproducer_dir + "/dyadic_reproducer_" + name + "_" +
                             std::to_string(first_failure) + ".json";
    save_instance(bad, result.reproducer_path);
  }
  return result;
}

}  // namespace dyadic
